// Command-line front end. Talks to the library only through the C API.
#include <pcbeam/pcbeam.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

enum Exit { exit_ok = 0, exit_config = 1, exit_numeric = 2, exit_validation = 3 };

int exit_code(pcb_status s)
{
    switch (s) {
    case PCB_OK:
        return exit_ok;
    case PCB_ERROR_CONFIG:
    case PCB_ERROR_RANGE:
        return exit_config;
    case PCB_ERROR_VALIDATION:
        return exit_validation;
    case PCB_ERROR_NUMERIC:
    case PCB_ERROR_INTERNAL:
        return exit_numeric;
    }
    return exit_numeric;
}

int report(pcb_status s)
{
    if (s != PCB_OK)
        std::fprintf(stderr, "error: %s\n", pcb_last_error());
    return exit_code(s);
}

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string suite;
    bool perturb = false;
};

using ConfigPtr = std::unique_ptr<pcb_config, decltype(&pcb_config_free)>;

// Loads the config and applies the command-line overrides.
pcb_status load(const Options& o, ConfigPtr& out)
{
    pcb_config* raw = nullptr;
    pcb_status s = pcb_config_load(o.config.c_str(), &raw);
    out.reset(raw);
    if (s != PCB_OK)
        return s;
    if (o.seed && (s = pcb_config_set_seed(raw, *o.seed)) != PCB_OK)
        return s;
    if (o.threads && (s = pcb_config_set_threads(raw, *o.threads)) != PCB_OK)
        return s;
    return PCB_OK;
}

void common_options(CLI::App* cmd, Options& o, bool config_required)
{
    auto* c = cmd->add_option("--config", o.config, "JSON run configuration");
    if (config_required)
        c->required();
    cmd->add_option("--out", o.out, "output file (CSV; plots are written next to it)")->required();
    cmd->add_option("--seed", o.seed, "override the master seed");
    cmd->add_option("--threads", o.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Partially coherent beams in random media: asymptotics and Monte Carlo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pcb_version());

    Options o;
    auto* analytic = app.add_subcommand("analytic", "tabulate limiting scintillation curves");
    common_options(analytic, o, true);
    auto* mc = app.add_subcommand("mc", "run a Monte Carlo experiment");
    common_options(mc, o, true);
    auto* figure = app.add_subcommand("figure", "render a figure preset");
    common_options(figure, o, true);
    auto* validate = app.add_subcommand("validate", "run the acceptance suites");
    common_options(validate, o, false);
    validate->add_option("--suite", o.suite, "analytic, mc or all (default: from config, else analytic)")
        ->check(CLI::IsMember({"analytic", "mc", "all"}));
    validate->add_flag("--perturb", o.perturb, "self-test: inject impossible tolerances, every check must fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    if (*validate) {
        std::string suite = o.suite;
        std::uint64_t seed = o.seed.value_or(20240611);
        if (!o.config.empty()) {
            ConfigPtr cfg(nullptr, pcb_config_free);
            if (pcb_status s = load(o, cfg); s != PCB_OK)
                return report(s);
            if (suite.empty())
                suite = pcb_config_validate_suite(cfg.get());
        }
        if (suite.empty())
            suite = "analytic";
        return report(pcb_run_validate(suite.c_str(), o.perturb ? 1 : 0, o.threads.value_or(0), seed,
                                       o.out.c_str(), 1));
    }

    ConfigPtr cfg(nullptr, pcb_config_free);
    if (pcb_status s = load(o, cfg); s != PCB_OK)
        return report(s);
    if (*analytic)
        return report(pcb_run_analytic(cfg.get(), o.out.c_str()));
    if (*figure)
        return report(pcb_run_figure(cfg.get(), o.out.c_str()));
    return report(pcb_run_mc(cfg.get(), o.out.c_str()));
}
