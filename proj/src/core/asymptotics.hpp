#pragma once

#include "common.hpp"
#include "medium.hpp"
#include "quadrature.hpp"
#include "source.hpp"

#include <utility>
#include <vector>

namespace pcb {

enum class LimitRegime { kinetic, diffusive };
enum class BetaCase { beta_gt_1, beta_eq_1, theta_to_0 };

// Arguments of the limiting moment M_{p,p}(z, r, X, Y; T). `times` holds
// t_1..t_p followed by t'_1..t'_p.
struct MomentQuery {
    LimitRegime regime = LimitRegime::diffusive;
    BetaCase beta_case = BetaCase::beta_eq_1;
    double z = 0.0;
    Point r{0.0, 0.0};
    std::vector<Point> xs;
    std::vector<Point> ys;
    std::vector<double> times;
};

struct AsymptoticModel {
    MediumSpec medium;
    SourceSpec source;
    double k0 = 1.0;
};

// Convenience query with p coincident points at the origin and zero times.
MomentQuery coincident_query(LimitRegime regime, BetaCase beta_case, double z, const Point& r, int p);

// ---- second moments -------------------------------------------------------

cplx m11_kinetic(const AsymptoticModel& model, const MomentQuery& q);
cplx m11_diffusive(const AsymptoticModel& model, const MomentQuery& q);
// The beta = 1 diffusive moment by tensor quadrature (closed form bypassed).
cplx m11_diffusive_quadrature(const AsymptoticModel& model, const MomentQuery& q);

// E[I](z, r). Diffusive uses the closed Gaussian convolution; kinetic uses the
// coincident-point value of m11_kinetic.
double mean_intensity(const AsymptoticModel& model, LimitRegime regime, BetaCase beta_case, double z,
                      const Point& r);
// Same Gaussian convolution by numeric convolution quadrature.
double mean_intensity_quadrature(const AsymptoticModel& model, double z, const Point& r);

// ---- detector factors -----------------------------------------------------

double f_T(const SourceSpec& source, double T);
double f_T_exponential(double tau_s, double T);
// F_p(T). p <= 3 uses tensor quadrature on the ordered simplex, p = 4 uses a
// shifted Sobol rule whose standard error is returned.
QuadResult f_p(const SourceSpec& source, int p, double T);
double f_p_limit_small_T(int p);
double f_p_limit_large_T(int p);

// ---- chi and scintillation ------------------------------------------------

// chi(z, r) for the diffusive beta = 1 case. z = 0 returns Gamma(r, 0)^2.
double chi(const AsymptoticModel& model, double z, const Point& r);
// The same integral by tensor Gauss-Legendre quadrature over R^{2d}.
double chi_quadrature(const AsymptoticModel& model, double z, const Point& r);
double chi_ratio_gaussian(double z, double sigma_m2, double r0, double rw, double theta, int dim);
double chi_ratio_bessel(double z, double sigma_m2, double r0, double rw, double theta);

double scint_T(const AsymptoticModel& model, BetaCase beta_case, double z, const Point& r, double T);
// z -> infinity value for beta = 1 from integrals of Gamma.
double scint_T_limit(const AsymptoticModel& model, double T);
// theta^d int Gamma^2 / (int Gamma(., 0))^2 by quadrature.
double saturation_ratio(const SourceSpec& source);

// ---- higher moments -------------------------------------------------------

// Partial pairings between {0..p-1} and {0..q-1}, the empty one included.
using Pairing = std::vector<std::pair<int, int>>;
const std::vector<Pairing>& partial_pairings(int p, int q);

cplx functional_F(const std::vector<cplx>& h, const std::vector<cplx>& h_prime, const std::vector<cplx>& g);
cplx functional_G(const std::vector<cplx>& h, const std::vector<cplx>& g, int p);
cplx permanent_complex(const std::vector<cplx>& a, int p);

cplx mpp_limit(const AsymptoticModel& model, const MomentQuery& q);

double intensity_moment(const AsymptoticModel& model, BetaCase beta_case, double z, const Point& r, int p);
double time_avg_intensity_moment(const AsymptoticModel& model, BetaCase beta_case, double z, const Point& r, int p,
                                 double T);

// ---- finite-epsilon references for the split-step solver -----------------

// Exact second moment E[u(z,x) u*(z,y)] of the Ito-Schroedinger model for a
// Schell source in physical coordinates, d = 1 or 2, times equal.
cplx exact_second_moment(const AsymptoticModel& model, double epsilon, double eta, double z, const Point& x,
                         const Point& y);

struct KineticScintillation {
    double mean_intensity = 0.0;
    double instantaneous = 0.0;
    double time_averaged = 0.0;
};
// Limiting scintillation index at coincident points from M_{1,1} and M_{2,2}.
// The fourth moment is affine in F(t1 - t2)^2, which gives the time average.
KineticScintillation limit_scintillation(const AsymptoticModel& model, LimitRegime regime, BetaCase beta_case,
                                         double z, const Point& r, double T);
// Kinetic beta = 1 case of limit_scintillation.
KineticScintillation kinetic_scintillation(const AsymptoticModel& model, double z, const Point& r, double T);

} // namespace pcb
