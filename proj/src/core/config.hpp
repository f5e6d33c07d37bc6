#pragma once

#include "asymptotics.hpp"
#include "montecarlo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcb {

// Values of one swept parameter. Recognized names: sigma_m2_z3, z, theta,
// tau_over_T, rw, r0.
struct Sweep {
    std::string parameter = "sigma_m2_z3";
    std::vector<double> values;
};

struct AnalyticSpec {
    LimitRegime regime = LimitRegime::diffusive;
    BetaCase beta_case = BetaCase::beta_eq_1;
    double detector_T = 1.0;
    double z = 1.0; // used when the sweep does not set z itself
    Point r{0.0, 0.0};
    Sweep sweep;
};

struct CurveSpec {
    std::string label;
    AnalyticSpec analytic;
    SourceSpec source;
};

struct FigureSpec {
    std::string title;
    std::string preset;
    std::vector<CurveSpec> curves;
};

struct RunConfig {
    int dimension = 1;
    MediumSpec medium;
    SourceSpec source;
    RegimeScaling scaling;
    double k0 = 1.0;
    bool has_experiment = false;
    ExperimentConfig experiment;
    bool acceptance = false; // mc exits with the validation code when z-scores fail
    bool has_analytic = false;
    AnalyticSpec analytic;
    bool has_figure = false;
    FigureSpec figure;
    std::string validate_suite = "analytic";
};

// Reads and validates a JSON config. Unknown keys are rejected with a
// message naming the key. Relative file references resolve against the
// directory of `path`.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& base_dir);

// The built-in figure presets ("gaussian_panels", "bessel_panels").
FigureSpec figure_preset(const std::string& name, const RunConfig& base);

} // namespace pcb
