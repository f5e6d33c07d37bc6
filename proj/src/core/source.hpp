#pragma once

#include "common.hpp"
#include "lattice.hpp"
#include "rng.hpp"

#include <string>
#include <vector>

namespace pcb {

enum class CoherenceKind { gaussian, bessel, fully_coherent };
enum class TemporalKind { exponential, tabulated };

struct SourceSpec {
    int dim = 1;
    double r0 = 1.0;
    CoherenceKind coherence = CoherenceKind::gaussian;
    double rw = 1.0;
    double theta = 1.0;
    double beta = 1.0;
    double tau_s = 1.0;
    TemporalKind temporal = TemporalKind::exponential;
    // Tabulated kernel: lag in units of tau_s, starting at 0, and F there.
    std::vector<double> kernel_t;
    std::vector<double> kernel_f;
    int bessel_modes = 256;
};

// Throws config errors for out-of-range fields.
void validate_source(const SourceSpec& spec);
// CSV with header and columns t, F(t); t in units of tau_s.
void load_temporal_kernel(SourceSpec& spec, const std::string& path);

// f(x) = exp(-|x|^2 / r0^2)
double envelope(const SourceSpec& spec, const Point& x);
// g_theta(lag); identically 1 for the fully coherent kind.
double coherence_g(const SourceSpec& spec, const Point& lag);
// J_theta(x, y) = f(x) f(y) g_theta(x - y)
double mutual_coherence(const SourceSpec& spec, const Point& x, const Point& y);
// Gamma(r, s) = J_theta(r + theta s / 2, r - theta s / 2)
double gamma_profile(const SourceSpec& spec, const Point& r, const Point& s);
// F(dt / tau_s)
double temporal_kernel(const SourceSpec& spec, double dt);

struct SourceRealization {
    std::vector<ComplexField> fields;
    std::vector<double> times;
};

// One draw of u0(x; t) on `grid` in physical coordinates: envelope
// f(eps^beta x), spatial coherence g_theta(eps^beta (x - y)) and temporal
// covariance F. `times` must be uniformly spaced.
SourceRealization sample_source_field(const SourceSpec& spec, const Grid& grid, const std::vector<double>& times,
                                      double epsilon, RandomStream& stream);

// Source moment S_p as the permanent of A_jl = F(t_j - t'_l) J(x_j, y_l).
// `times` holds t_1..t_p followed by t'_1..t'_p. For the fully coherent kind
// the moment is the product prod f(x_j) f(y_l).
double s_p(const SourceSpec& spec, const std::vector<Point>& xs, const std::vector<Point>& ys,
           const std::vector<double>& times);
// S_p^I(X) = S_p(X, X; 0)
double s_p_intensity(const SourceSpec& spec, const std::vector<Point>& xs);

} // namespace pcb
