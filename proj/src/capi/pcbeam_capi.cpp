#include <pcbeam/pcbeam.h>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "permanent.hpp"
#include "validation.hpp"

#include <cstdio>
#include <new>
#include <string>

struct pcb_config {
    pcb::RunConfig run;
};

namespace {

thread_local std::string g_last_error;

pcb_status fail(pcb_status status, const std::string& msg)
{
    g_last_error = msg;
    return status;
}

template <class F>
pcb_status guarded(F&& body)
{
    g_last_error.clear();
    try {
        return body();
    } catch (const pcb::Error& e) {
        switch (e.kind()) {
        case pcb::ErrorKind::config:
            return fail(PCB_ERROR_CONFIG, e.what());
        case pcb::ErrorKind::numeric:
            return fail(PCB_ERROR_NUMERIC, e.what());
        case pcb::ErrorKind::range:
            return fail(PCB_ERROR_RANGE, e.what());
        }
        return fail(PCB_ERROR_INTERNAL, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PCB_ERROR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PCB_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(PCB_ERROR_INTERNAL, "unknown failure");
    }
}

pcb_status need(const void* p, const char* what)
{
    if (p)
        return PCB_OK;
    return fail(PCB_ERROR_CONFIG, std::string(what) + " must not be NULL");
}

void stderr_warning(const char* msg, void*) { std::fprintf(stderr, "warning: %s\n", msg); }

} // namespace

extern "C" {

const char* pcb_version(void) { return "1.0.0"; }

const char* pcb_last_error(void) { return g_last_error.c_str(); }

void pcb_set_warning_handler(pcb_warning_fn fn, void* user)
{
    if (fn)
        pcb::set_warning_handler(fn, user);
    else
        pcb::set_warning_handler(stderr_warning, nullptr);
}

pcb_status pcb_config_load(const char* path, pcb_config** out)
{
    if (pcb_status s = need(path, "path"); s != PCB_OK)
        return s;
    if (pcb_status s = need(out, "out"); s != PCB_OK)
        return s;
    *out = nullptr;
    return guarded([&] {
        auto cfg = new pcb_config{pcb::parse_config(path)};
        *out = cfg;
        return PCB_OK;
    });
}

pcb_status pcb_config_parse(const char* json_text, const char* base_dir, pcb_config** out)
{
    if (pcb_status s = need(json_text, "json_text"); s != PCB_OK)
        return s;
    if (pcb_status s = need(out, "out"); s != PCB_OK)
        return s;
    *out = nullptr;
    return guarded([&] {
        auto cfg = new pcb_config{pcb::parse_config_text(json_text, base_dir ? base_dir : "")};
        *out = cfg;
        return PCB_OK;
    });
}

void pcb_config_free(pcb_config* config) { delete config; }

pcb_status pcb_config_set_seed(pcb_config* config, uint64_t seed)
{
    if (pcb_status s = need(config, "config"); s != PCB_OK)
        return s;
    config->run.experiment.master_seed = seed;
    return PCB_OK;
}

pcb_status pcb_config_set_threads(pcb_config* config, int threads)
{
    if (pcb_status s = need(config, "config"); s != PCB_OK)
        return s;
    if (threads < 0)
        return fail(PCB_ERROR_CONFIG, "threads must be nonnegative");
    config->run.experiment.threads = threads;
    return PCB_OK;
}

const char* pcb_config_validate_suite(const pcb_config* config)
{
    return config ? config->run.validate_suite.c_str() : "analytic";
}

pcb_status pcb_run_analytic(const pcb_config* config, const char* out_csv)
{
    if (pcb_status s = need(config, "config"); s != PCB_OK)
        return s;
    return guarded([&] {
        pcb::cmd_analytic(config->run, out_csv ? out_csv : "");
        return PCB_OK;
    });
}

pcb_status pcb_run_figure(const pcb_config* config, const char* out_csv)
{
    if (pcb_status s = need(config, "config"); s != PCB_OK)
        return s;
    return guarded([&] {
        pcb::cmd_figure(config->run, out_csv ? out_csv : "");
        return PCB_OK;
    });
}

pcb_status pcb_run_mc(const pcb_config* config, const char* out_csv)
{
    if (pcb_status s = need(config, "config"); s != PCB_OK)
        return s;
    return guarded([&] {
        pcb::ExperimentResult res = pcb::cmd_mc(config->run, out_csv ? out_csv : "");
        if (config->run.acceptance && !res.accepted()) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "acceptance failed: %.1f%% of second-moment z-scores below 3 (need 95%%)",
                          100.0 * res.second_moment_pass_fraction);
            return fail(PCB_ERROR_VALIDATION, msg);
        }
        return PCB_OK;
    });
}

pcb_status pcb_run_validate(const char* suite, int perturb, int threads, uint64_t seed, const char* out_report,
                            int echo)
{
    return guarded([&] {
        std::string path = out_report ? out_report : "";
        pcb::require_writable(path);
        std::vector<int> ids = pcb::suite_criteria(suite ? suite : "analytic");
        pcb::ValidationOptions opt;
        opt.perturb = perturb != 0;
        opt.threads = threads;
        opt.seed = seed;
        std::vector<pcb::CriterionReport> reports;
        for (int id : ids) {
            reports.push_back(pcb::run_criterion(id, opt));
            if (echo) {
                std::string table = pcb::report_table({reports.back()});
                // The per-criterion footer line is repeated in the summary.
                table.erase(table.rfind('\n', table.size() - 2) + 1);
                std::fputs(table.c_str(), stdout);
                std::fflush(stdout);
            }
        }
        std::string table = pcb::report_table(reports);
        pcb::write_text_file(path, table);
        if (echo) {
            std::string summary = table.substr(table.rfind('\n', table.size() - 2) + 1);
            std::fputs(summary.c_str(), stdout);
        }
        std::string failed;
        for (const auto& r : reports)
            if (!r.pass())
                failed += (failed.empty() ? "" : ", ") + std::to_string(r.id);
        if (!failed.empty())
            return fail(PCB_ERROR_VALIDATION, "validation failed for criteria " + failed);
        return PCB_OK;
    });
}

pcb_status pcb_detector_factor(double tau_s, double T, double* out)
{
    if (pcb_status s = need(out, "out"); s != PCB_OK)
        return s;
    return guarded([&] {
        if (!(tau_s > 0.0) || !(T > 0.0))
            return fail(PCB_ERROR_CONFIG, "tau_s and T must be positive");
        *out = pcb::f_T_exponential(tau_s, T);
        return PCB_OK;
    });
}

pcb_status pcb_chi_ratio_gaussian(double z, double sigma_m2, double r0, double rw, double theta, int dim,
                                  double* out)
{
    if (pcb_status s = need(out, "out"); s != PCB_OK)
        return s;
    return guarded([&] {
        if (dim != 1 && dim != 2)
            return fail(PCB_ERROR_CONFIG, "dim must be 1 or 2");
        if (!(theta > 0.0 && theta <= 1.0))
            return fail(PCB_ERROR_CONFIG, "theta must lie in (0,1]");
        *out = pcb::chi_ratio_gaussian(z, sigma_m2, r0, rw, theta, dim);
        return PCB_OK;
    });
}

pcb_status pcb_chi_ratio_bessel(double z, double sigma_m2, double r0, double rw, double theta, double* out)
{
    if (pcb_status s = need(out, "out"); s != PCB_OK)
        return s;
    return guarded([&] {
        if (!(theta > 0.0 && theta <= 1.0))
            return fail(PCB_ERROR_CONFIG, "theta must lie in (0,1]");
        *out = pcb::chi_ratio_bessel(z, sigma_m2, r0, rw, theta);
        return PCB_OK;
    });
}

pcb_status pcb_permanent(const double* matrix, int p, double* out)
{
    if (pcb_status s = need(matrix, "matrix"); s != PCB_OK)
        return s;
    if (pcb_status s = need(out, "out"); s != PCB_OK)
        return s;
    return guarded([&] {
        if (p < 0 || p > 10)
            return fail(PCB_ERROR_RANGE, "out of implemented range: permanent supports p <= 10");
        *out = pcb::permanent(std::vector<double>(matrix, matrix + std::size_t(p) * p), p);
        return PCB_OK;
    });
}

} // extern "C"
