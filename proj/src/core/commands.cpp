#include "commands.hpp"

#include <algorithm>
#include <cmath>

namespace pcb {
namespace {

double sigma_m2_of(const MediumSpec& medium)
{
    return isotropic_sigma_m2(hessian_xi(medium));
}

CurveRow curve_point(const MediumSpec& medium, SourceSpec source, double k0, const AnalyticSpec& spec, double v)
{
    double z = spec.z;
    double T = spec.detector_T;
    const double sm2 = sigma_m2_of(medium);
    const std::string& param = spec.sweep.parameter;
    if (param == "sigma_m2_z3")
        z = std::cbrt(v / sm2);
    else if (param == "z")
        z = v;
    else if (param == "theta")
        source.theta = v;
    else if (param == "tau_over_T")
        T = source.tau_s / v;
    else if (param == "rw")
        source.rw = v;
    else if (param == "r0")
        source.r0 = v;
    else
        config_error("unknown sweep parameter '" + param + "'");
    validate_source(source);
    if (!(T > 0.0))
        config_error("detector_T must be positive");

    AsymptoticModel model{medium, source, k0};
    CurveRow row;
    row.abscissa = v;
    row.beta_case = spec.beta_case;
    row.theta = source.theta;
    row.tau_over_T = source.tau_s / T;
    row.dim = source.dim;
    row.sigma_m2 = sm2;
    row.r0 = source.r0;
    row.rw = source.rw;
    row.k0 = k0;

    if (spec.regime == LimitRegime::kinetic) {
        KineticScintillation ks = limit_scintillation(model, LimitRegime::kinetic, spec.beta_case, z, spec.r, T);
        row.s_T = ks.time_averaged;
        row.mean_intensity = ks.mean_intensity;
        row.chi_ratio = 0.5 * (ks.instantaneous - 1.0);
        return row;
    }
    const double ft = f_T(source, T);
    row.mean_intensity = mean_intensity(model, LimitRegime::diffusive, spec.beta_case, z, spec.r);
    switch (spec.beta_case) {
    case BetaCase::beta_gt_1:
        row.chi_ratio = 1.0;
        row.s_T = 1.0 + 2.0 * ft;
        break;
    case BetaCase::theta_to_0:
        row.chi_ratio = 0.0;
        row.s_T = ft;
        break;
    case BetaCase::beta_eq_1:
        if (!(row.mean_intensity > 0.0))
            numeric_error("degenerate intensity: mean intensity is not positive");
        row.chi_ratio = chi(model, z, spec.r) / (row.mean_intensity * row.mean_intensity);
        row.s_T = ft + row.chi_ratio * (1.0 + ft);
        break;
    }
    return row;
}

std::string abscissa_label(const std::string& param)
{
    if (param == "sigma_m2_z3")
        return "sigma_m^2 z^3";
    if (param == "tau_over_T")
        return "tau_s / T";
    return param;
}

} // namespace

std::vector<CurveRow> compute_curve(const MediumSpec& medium, const SourceSpec& source, double k0,
                                    const AnalyticSpec& spec)
{
    std::vector<CurveRow> rows;
    rows.reserve(spec.sweep.values.size());
    for (double v : spec.sweep.values)
        rows.push_back(curve_point(medium, source, k0, spec, v));
    return rows;
}

void cmd_analytic(const RunConfig& config, const std::string& out_csv)
{
    require_writable(out_csv);
    if (!config.has_analytic)
        config_error("the analytic command needs an 'analytic' section");
    std::vector<CurveRow> rows = compute_curve(config.medium, config.source, config.k0, config.analytic);

    PlotSpec plot;
    plot.title = "Scintillation index, " + beta_case_name(config.analytic.beta_case);
    plot.x_label = abscissa_label(config.analytic.sweep.parameter);
    plot.y_label = "S_T";
    plot.log_x = std::all_of(rows.begin(), rows.end(), [](const CurveRow& r) { return r.abscissa > 0.0; });
    PlotSeries s_t{"S_T", {}, {}}, ratio{"chi / E[I]^2", {}, {}};
    for (const auto& r : rows) {
        s_t.x.push_back(r.abscissa);
        s_t.y.push_back(r.s_T);
        ratio.x.push_back(r.abscissa);
        ratio.y.push_back(r.chi_ratio);
    }
    plot.series = {s_t, ratio};

    write_text_file(out_csv, curve_csv(rows));
    write_text_file(sibling_path(out_csv, ".svg"), svg_plot(plot));
}

void cmd_figure(const RunConfig& config, const std::string& out_csv)
{
    require_writable(out_csv);
    if (!config.has_figure)
        config_error("the figure command needs a 'figure' section");
    std::vector<CurveRow> all;
    PlotSpec plot;
    plot.title = config.figure.title;
    plot.x_label = "sigma_m^2 z^3";
    plot.y_label = "S_T";
    for (const auto& curve : config.figure.curves) {
        std::vector<CurveRow> rows = compute_curve(config.medium, curve.source, config.k0, curve.analytic);
        PlotSeries s{curve.label, {}, {}};
        for (const auto& r : rows) {
            s.x.push_back(r.abscissa);
            s.y.push_back(r.s_T);
        }
        plot.series.push_back(s);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    write_text_file(out_csv, curve_csv(all));
    write_text_file(sibling_path(out_csv, ".svg"), svg_plot(plot));
}

ExperimentResult cmd_mc(const RunConfig& config, const std::string& out_csv)
{
    require_writable(out_csv);
    if (!config.has_experiment)
        config_error("the mc command needs an 'experiment' section");
    ExperimentResult result = run_experiment(config.experiment);
    write_text_file(out_csv, experiment_csv(result, config.dimension));
    return result;
}

} // namespace pcb
