#include "config.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <fstream>
#include <set>
#include <sstream>

namespace pcb {
namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        config_error(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key()))
            config_error("unknown key '" + (where.empty() ? it.key() : where + "." + it.key()) + "'");
}

std::string path_of(const std::string& where, const char* key)
{
    return where.empty() ? std::string(key) : where + "." + key;
}

double number(const json& obj, const std::string& where, const char* key, std::optional<double> fallback = {})
{
    if (!obj.contains(key)) {
        if (fallback)
            return *fallback;
        config_error("missing key '" + path_of(where, key) + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_number())
        config_error(path_of(where, key) + ": expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d))
        config_error(path_of(where, key) + ": must be finite");
    return d;
}

double positive(const json& obj, const std::string& where, const char* key, std::optional<double> fallback = {})
{
    double d = number(obj, where, key, fallback);
    if (!(d > 0.0))
        config_error(path_of(where, key) + ": must be positive");
    return d;
}

int integer(const json& obj, const std::string& where, const char* key, std::optional<int> fallback = {})
{
    if (!obj.contains(key)) {
        if (fallback)
            return *fallback;
        config_error("missing key '" + path_of(where, key) + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        config_error(path_of(where, key) + ": expected an integer");
    return v.get<int>();
}

std::string text(const json& obj, const std::string& where, const char* key, std::optional<std::string> fallback = {})
{
    if (!obj.contains(key)) {
        if (fallback)
            return *fallback;
        config_error("missing key '" + path_of(where, key) + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_string())
        config_error(path_of(where, key) + ": expected a string");
    return v.get<std::string>();
}

bool flag(const json& obj, const std::string& where, const char* key, bool fallback)
{
    if (!obj.contains(key))
        return fallback;
    if (!obj.at(key).is_boolean())
        config_error(path_of(where, key) + ": expected true or false");
    return obj.at(key).get<bool>();
}

Point point(const json& obj, const std::string& where, const char* key, int dim, Point fallback = {0.0, 0.0})
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    Point p{0.0, 0.0};
    if (dim == 1 && v.is_number())
        return {v.get<double>(), 0.0};
    if (!v.is_array() || int(v.size()) != dim)
        config_error(path_of(where, key) + ": expected " + std::to_string(dim) + " coordinates");
    for (int a = 0; a < dim; ++a) {
        if (!v[a].is_number())
            config_error(path_of(where, key) + ": coordinates must be numbers");
        p[a] = v[a].get<double>();
    }
    return p;
}

std::vector<double> numbers(const json& v, const std::string& where)
{
    if (!v.is_array())
        config_error(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            config_error(where + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::string resolve(const std::string& base, const std::string& file)
{
    std::filesystem::path p(file);
    if (p.is_absolute() || base.empty())
        return p.string();
    return (std::filesystem::path(base) / p).string();
}

MediumSpec parse_medium(const json& m, int dim, const std::string& base)
{
    const std::string w = "medium";
    std::string kind = text(m, w, "kind", "gaussian");
    if (kind == "gaussian") {
        check_keys(m, w, {"kind", "sigma_R2", "ell_m"});
        return make_gaussian_medium(dim, number(m, w, "sigma_R2", 1.0), positive(m, w, "ell_m", 1.0));
    }
    if (kind == "tabulated") {
        check_keys(m, w, {"kind", "spectrum_file"});
        return load_tabulated_medium(dim, resolve(base, text(m, w, "spectrum_file")));
    }
    config_error("medium.kind: expected 'gaussian' or 'tabulated'");
}

SourceSpec parse_source(const json& s, int dim, const std::string& base)
{
    const std::string w = "source";
    check_keys(s, w, {"coherence", "r0", "rw", "theta", "beta", "tau_s", "temporal", "kernel_file", "bessel_modes"});
    SourceSpec out;
    out.dim = dim;
    std::string coh = text(s, w, "coherence", "gaussian");
    if (coh == "gaussian")
        out.coherence = CoherenceKind::gaussian;
    else if (coh == "bessel")
        out.coherence = CoherenceKind::bessel;
    else if (coh == "fully_coherent")
        out.coherence = CoherenceKind::fully_coherent;
    else
        config_error("source.coherence: expected 'gaussian', 'bessel' or 'fully_coherent'");
    out.r0 = number(s, w, "r0", 1.0);
    out.rw = number(s, w, "rw", 1.0);
    out.theta = number(s, w, "theta", 1.0);
    out.beta = number(s, w, "beta", 1.0);
    out.tau_s = number(s, w, "tau_s", 1.0);
    out.bessel_modes = integer(s, w, "bessel_modes", 256);
    std::string temporal = text(s, w, "temporal", "exponential");
    if (temporal == "exponential") {
        if (s.contains("kernel_file"))
            config_error("source.kernel_file: only valid with temporal = 'tabulated'");
        out.temporal = TemporalKind::exponential;
    } else if (temporal == "tabulated") {
        out.temporal = TemporalKind::tabulated;
        load_temporal_kernel(out, resolve(base, text(s, w, "kernel_file")));
    } else {
        config_error("source.temporal: expected 'exponential' or 'tabulated'");
    }
    validate_source(out);
    return out;
}

RegimeScaling parse_scaling(const json& s, double k0)
{
    const std::string w = "scaling";
    check_keys(s, w, {"epsilon", "regime", "eta"});
    RegimeScaling out;
    out.k0 = k0;
    out.epsilon = number(s, w, "epsilon", 0.05);
    std::string regime = text(s, w, "regime", "kinetic");
    if (regime == "kinetic")
        out.regime = RegimeKind::kinetic;
    else if (regime == "diffusive")
        out.regime = RegimeKind::diffusive;
    else if (regime == "custom")
        out.regime = RegimeKind::custom;
    else
        config_error("scaling.regime: expected 'kinetic', 'diffusive' or 'custom'");
    if (s.contains("eta") && out.regime != RegimeKind::custom)
        config_error("scaling.eta: only valid with regime = 'custom'");
    out.eta_custom = number(s, w, "eta", 1.0);
    validate_scaling(out);
    return out;
}

Sweep parse_sweep(const json& s)
{
    const std::string w = "analytic.sweep";
    check_keys(s, w, {"parameter", "values", "start", "stop", "count", "spacing"});
    Sweep out;
    out.parameter = text(s, w, "parameter", "sigma_m2_z3");
    static const std::set<std::string> known{"sigma_m2_z3", "z", "theta", "tau_over_T", "rw", "r0"};
    if (!known.count(out.parameter))
        config_error("analytic.sweep.parameter: '" + out.parameter +
                     "' is not one of sigma_m2_z3, z, theta, tau_over_T, rw, r0");
    if (s.contains("values")) {
        if (s.contains("start") || s.contains("stop") || s.contains("count") || s.contains("spacing"))
            config_error("analytic.sweep: give either 'values' or 'start'/'stop'/'count'");
        out.values = numbers(s.at("values"), w + ".values");
    } else {
        double a = number(s, w, "start");
        double b = number(s, w, "stop");
        int n = integer(s, w, "count");
        std::string spacing = text(s, w, "spacing", "log");
        if (n < 2)
            config_error("analytic.sweep.count: must be at least 2");
        if (spacing == "log") {
            if (!(a > 0.0 && b > 0.0))
                config_error("analytic.sweep: log spacing needs positive start and stop");
            for (int i = 0; i < n; ++i)
                out.values.push_back(a * std::pow(b / a, double(i) / (n - 1)));
        } else if (spacing == "linear") {
            for (int i = 0; i < n; ++i)
                out.values.push_back(a + (b - a) * double(i) / (n - 1));
        } else {
            config_error("analytic.sweep.spacing: expected 'log' or 'linear'");
        }
    }
    if (out.values.empty())
        config_error("analytic.sweep.values: must not be empty");
    return out;
}

BetaCase parse_beta_case(const std::string& s, const std::string& where)
{
    if (s == "beta_gt_1")
        return BetaCase::beta_gt_1;
    if (s == "beta_eq_1")
        return BetaCase::beta_eq_1;
    if (s == "theta_to_0")
        return BetaCase::theta_to_0;
    config_error(where + ": expected 'beta_gt_1', 'beta_eq_1' or 'theta_to_0'");
}

AnalyticSpec parse_analytic(const json& a, int dim, const SourceSpec& source)
{
    const std::string w = "analytic";
    check_keys(a, w, {"regime", "beta_case", "detector_T", "z", "r", "sweep"});
    AnalyticSpec out;
    std::string regime = text(a, w, "regime", "diffusive");
    if (regime == "diffusive")
        out.regime = LimitRegime::diffusive;
    else if (regime == "kinetic")
        out.regime = LimitRegime::kinetic;
    else
        config_error("analytic.regime: expected 'kinetic' or 'diffusive'");
    std::string fallback = source.beta > 1.0 ? "beta_gt_1" : "beta_eq_1";
    out.beta_case = parse_beta_case(text(a, w, "beta_case", fallback), "analytic.beta_case");
    out.detector_T = positive(a, w, "detector_T", source.tau_s);
    out.z = positive(a, w, "z", 1.0);
    out.r = point(a, w, "r", dim);
    if (a.contains("sweep")) {
        out.sweep = parse_sweep(a.at("sweep"));
    } else {
        for (int i = 0; i <= 40; ++i)
            out.sweep.values.push_back(std::pow(10.0, -1.0 + 0.1 * i));
    }
    return out;
}

ExperimentConfig parse_experiment(const json& root, const RunConfig& rc, bool& acceptance)
{
    ExperimentConfig c;
    c.medium = rc.medium;
    c.source = rc.source;
    c.scaling = rc.scaling;
    const int d = rc.dimension;
    if (!root.contains("grid"))
        config_error("missing key 'grid' (required with 'experiment')");
    const json& g = root.at("grid");
    check_keys(g, "grid", {"n", "dx"});
    c.grid = make_centered_grid(d, integer(g, "grid", "n"), positive(g, "grid", "dx"));

    if (!root.contains("propagation"))
        config_error("missing key 'propagation' (required with 'experiment')");
    const json& p = root.at("propagation");
    check_keys(p, "propagation", {"z_final", "dz", "n_steps", "record_planes"});
    double z_final = positive(p, "propagation", "z_final");
    if (p.contains("dz") && p.contains("n_steps"))
        config_error("propagation: give at most one of 'dz' and 'n_steps'");
    int steps;
    if (p.contains("n_steps")) {
        steps = integer(p, "propagation", "n_steps");
    } else {
        double dz = p.contains("dz") ? positive(p, "propagation", "dz") : default_step(c.scaling, c.grid, c.medium);
        steps = std::max(1, int(std::ceil(z_final / dz - 1e-9)));
    }
    std::vector<double> planes;
    if (p.contains("record_planes"))
        planes = numbers(p.at("record_planes"), "propagation.record_planes");
    c.plan = make_plan(z_final, steps, planes);

    const json& e = root.at("experiment");
    const std::string w = "experiment";
    check_keys(e, w, {"n_realizations", "seed", "detector_T", "dt", "threads", "acceptance", "probes"});
    c.n_realizations = integer(e, w, "n_realizations");
    if (c.n_realizations < 2)
        config_error("experiment.n_realizations: must be at least 2");
    if (e.contains("seed")) {
        if (!e.at("seed").is_number_unsigned())
            config_error("experiment.seed: expected a nonnegative integer");
        c.master_seed = e.at("seed").get<std::uint64_t>();
    }
    c.detector_T = number(e, w, "detector_T", 0.0);
    if (c.detector_T < 0.0)
        config_error("experiment.detector_T: must be nonnegative");
    c.dt = e.contains("dt") ? positive(e, w, "dt") : 0.0;
    c.threads = integer(e, w, "threads", 0);
    acceptance = flag(e, w, "acceptance", false);
    if (!e.contains("probes"))
        config_error("missing key 'experiment.probes'");
    const json& probes = e.at("probes");
    if (!probes.is_array() || probes.empty())
        config_error("experiment.probes: expected a non-empty array");
    for (std::size_t i = 0; i < probes.size(); ++i) {
        std::string pw = "experiment.probes[" + std::to_string(i) + "]";
        check_keys(probes[i], pw, {"r", "x", "t"});
        ProbeSpec probe;
        probe.r = point(probes[i], pw, "r", d);
        probe.x = point(probes[i], pw, "x", d);
        probe.t = number(probes[i], pw, "t", 0.0);
        c.probes.push_back(probe);
    }
    fill_time_sampling(c);
    validate_experiment(c);
    return c;
}

} // namespace

RunConfig parse_config_text(const std::string& body, const std::string& base_dir)
{
    json root;
    try {
        root = json::parse(body);
    } catch (const json::parse_error& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "", {"schema_version", "dimension", "k0", "medium", "source", "scaling", "grid", "propagation",
                          "experiment", "analytic", "figure", "validate"});
    if (!root.contains("schema_version"))
        config_error("missing key 'schema_version'");
    if (integer(root, "", "schema_version") != 1)
        config_error("schema_version: only version 1 is supported");

    RunConfig rc;
    rc.dimension = integer(root, "", "dimension", 1);
    if (rc.dimension != 1 && rc.dimension != 2)
        config_error("dimension: must be 1 or 2");
    rc.k0 = positive(root, "", "k0", 1.0);
    rc.medium = parse_medium(root.value("medium", json::object()), rc.dimension, base_dir);
    rc.source = parse_source(root.value("source", json::object()), rc.dimension, base_dir);
    rc.scaling = parse_scaling(root.value("scaling", json::object()), rc.k0);

    if (root.contains("experiment")) {
        rc.has_experiment = true;
        rc.experiment = parse_experiment(root, rc, rc.acceptance);
    } else {
        for (const char* key : {"grid", "propagation"})
            if (root.contains(key))
                config_error(std::string("key '") + key + "' is only valid together with 'experiment'");
    }
    if (root.contains("analytic")) {
        rc.has_analytic = true;
        rc.analytic = parse_analytic(root.at("analytic"), rc.dimension, rc.source);
    }
    if (root.contains("figure")) {
        const json& f = root.at("figure");
        check_keys(f, "figure", {"preset"});
        rc.has_figure = true;
        rc.figure = figure_preset(text(f, "figure", "preset"), rc);
    }
    if (root.contains("validate")) {
        const json& v = root.at("validate");
        check_keys(v, "validate", {"suite"});
        rc.validate_suite = text(v, "validate", "suite", "analytic");
        if (rc.validate_suite != "analytic" && rc.validate_suite != "mc" && rc.validate_suite != "all")
            config_error("validate.suite: expected 'analytic', 'mc' or 'all'");
    }
    return rc;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string base = std::filesystem::path(path).parent_path().string();
    return parse_config_text(ss.str(), base);
}

namespace {

// Smallest theta in (0, 1] whose large-z ratio reaches `target`.
double theta_for_ratio(const std::function<double(double)>& ratio, double target)
{
    if (ratio(1.0) <= target)
        return 1.0;
    double lo = 1e-3, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (ratio(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

FigureSpec figure_preset(const std::string& name, const RunConfig& base)
{
    FigureSpec fig;
    fig.preset = name;
    CoherenceKind kind;
    if (name == "gaussian_panels") {
        kind = CoherenceKind::gaussian;
        fig.title = "Gaussian correlated beam, time averaged scintillation (shape reproduction)";
    } else if (name == "bessel_panels") {
        kind = CoherenceKind::bessel;
        fig.title = "Bessel correlated beam, time averaged scintillation (shape reproduction)";
    } else {
        config_error("figure.preset: expected 'gaussian_panels' or 'bessel_panels'");
    }
    if (base.dimension != 2)
        config_error("figure presets need dimension = 2");
    // Saturation levels 1.5, 1 and 0.6 reached with tau_s / T = 10, 1, 0.1;
    // theta is solved from the large-z limit so each curve lands on its level.
    const double levels[] = {1.5, 1.0, 0.6};
    const double tau_over_T[] = {10.0, 1.0, 0.1};
    for (int i = 0; i < 3; ++i) {
        CurveSpec c;
        c.source = base.source;
        c.source.dim = 2;
        c.source.coherence = kind;
        c.source.beta = 1.0;
        c.analytic.regime = LimitRegime::diffusive;
        c.analytic.beta_case = BetaCase::beta_eq_1;
        c.analytic.detector_T = c.source.tau_s / tau_over_T[i];
        double ft = f_T_exponential(c.source.tau_s, c.analytic.detector_T);
        double target = (levels[i] - ft) / (1.0 + ft);
        const double r0 = c.source.r0, rw = c.source.rw;
        auto ratio = [&](double th) {
            if (kind == CoherenceKind::gaussian)
                return chi_ratio_gaussian(1e12, 1.0, r0, rw, th, 2);
            return chi_ratio_bessel(1e12, 1.0, r0, rw, th);
        };
        c.source.theta = theta_for_ratio(ratio, target);
        for (int k = 0; k <= 60; ++k)
            c.analytic.sweep.values.push_back(std::pow(10.0, -2.0 + 0.1 * k));
        std::ostringstream label;
        label << "tau_s/T = " << tau_over_T[i] << ", theta = " << std::setprecision(3) << c.source.theta;
        c.label = label.str();
        fig.curves.push_back(c);
    }
    return fig;
}

} // namespace pcb
