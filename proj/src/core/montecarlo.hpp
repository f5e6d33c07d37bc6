#pragma once

#include "asymptotics.hpp"
#include "lattice.hpp"
#include "medium.hpp"
#include "propagator.hpp"
#include "source.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pcb {

struct Estimate {
    cplx mean{0.0, 0.0};
    double std_error = 0.0;
    int n_samples = 0;
};

// Sample mean and sample-std / sqrt(n). Complex samples use |x - mean|^2.
Estimate make_estimate(const std::vector<double>& samples);
Estimate make_estimate(const std::vector<cplx>& samples);

// Probe at midpoint r with separation x: the coherence statistic pairs
// r + x/2 with r - x/2. Coordinates are physical; t is the window start.
struct ProbeSpec {
    Point r{0.0, 0.0};
    Point x{0.0, 0.0};
    double t = 0.0;
};

struct ExperimentConfig {
    MediumSpec medium;
    SourceSpec source;
    RegimeScaling scaling;
    Grid grid;
    PropagationPlan plan;
    int n_realizations = 0;
    std::uint64_t master_seed = 1;
    double detector_T = 0.0;
    int n_time_samples = 1;
    double dt = 0.0; // spacing of the source time samples
    std::vector<ProbeSpec> probes;
    int threads = 0; // 0: hardware concurrency
};

// Fills dt and n_time_samples when they are unset: dt = tau_s / 4, shrunk so
// an integer number of steps spans detector_T, and enough samples to cover
// the latest probe window.
void fill_time_sampling(ExperimentConfig& config);
void validate_experiment(const ExperimentConfig& config);
std::vector<double> sample_times(const ExperimentConfig& config);

// (1/T) int_0^T I(start*dt + s) ds by the trapezoid rule on uniformly spaced
// samples; a partial last interval uses the linearly interpolated end value.
double time_averaged_intensity(const std::vector<double>& intensity, double dt, double T, std::size_t start = 0);

// Var / Mean^2 with the unbiased variance.
double scintillation_index(const std::vector<double>& samples);
// Scintillation index with a delete-a-block jackknife standard error.
Estimate scintillation_estimate(const std::vector<double>& samples);
// S(a) - S(b) for paired samples, jackknifed jointly.
Estimate scintillation_difference(const std::vector<double>& a, const std::vector<double>& b);

// Per-realization observation: fields at every record plane and time sample.
using Observer = std::function<std::vector<double>(const PlaneStack&, const std::vector<double>& times)>;
// Runs every realization (in parallel) and returns the observations indexed
// by realization. Realization i draws from streams addressed by (seed, i).
std::vector<std::vector<double>> run_realizations(const ExperimentConfig& config, const Observer& observe);

// |u|^2 at each probe midpoint and time, last record plane.
std::vector<Estimate> estimate_intensity(const ExperimentConfig& config);

// prod u(points[j]; times[j]) over unconjugated entries times prod u* over
// conjugated ones, last record plane.
Estimate estimate_field_moment(const ExperimentConfig& config, const std::vector<bool>& conjugate,
                               const std::vector<Point>& points, const std::vector<double>& times);

struct ResultRow {
    ProbeSpec probe;
    std::string stat;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double asymptotic = 0.0; // NaN when no reference applies
    double z_score = 0.0;    // NaN when no reference applies
    int n_realizations = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    double z_final = 0.0;
    double eta = 1.0;
    // Share of second-moment rows with |z| < 3.
    double second_moment_pass_fraction = 1.0;
    bool accepted() const { return second_moment_pass_fraction >= 0.95; }
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Deterministic references in physical coordinates.
cplx exact_mean_field(const ExperimentConfig& config, double z, const Point& x);
cplx exact_coherence(const ExperimentConfig& config, double z, const Point& x, const Point& y);

} // namespace pcb
