#pragma once

#include "config.hpp"
#include "montecarlo.hpp"

#include <string>
#include <vector>

namespace pcb {

// One row of a scintillation curve, carrying its full parameter record.
struct CurveRow {
    double abscissa = 0.0;
    double s_T = 0.0;
    double chi_ratio = 0.0;
    double mean_intensity = 0.0;
    BetaCase beta_case = BetaCase::beta_eq_1;
    double theta = 0.0;
    double tau_over_T = 0.0;
    int dim = 2;
    double sigma_m2 = 0.0;
    double r0 = 0.0;
    double rw = 0.0;
    double k0 = 0.0;
};

std::string beta_case_name(BetaCase c);
// %.17g
std::string format_real(double v);

std::string curve_csv(const std::vector<CurveRow>& rows);
std::string experiment_csv(const ExperimentResult& result, int dim);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    std::vector<PlotSeries> series;
};

std::string svg_plot(const PlotSpec& plot);

// Fails with a config error when `path` is empty or its directory is missing
// or not writable. Called before any computation starts.
void require_writable(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);
// `path` with its extension replaced by `ext` (".svg").
std::string sibling_path(const std::string& path, const std::string& ext);

} // namespace pcb
