#pragma once

#include "common.hpp"
#include "lattice.hpp"
#include "rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace pcb {

enum class MediumKind { gaussian, tabulated };

struct TabulatedCovariance;

struct MediumSpec {
    MediumKind kind = MediumKind::gaussian;
    int dim = 1;
    double sigma_R2 = 1.0; // R(0)
    double ell_m = 1.0;
    // Radial spectrum samples (k >= 0, increasing) for the tabulated kind.
    std::vector<double> table_k;
    std::vector<double> table_spectrum;
    // Built by make_tabulated_medium; shared between copies.
    std::shared_ptr<const TabulatedCovariance> table;
};

MediumSpec make_gaussian_medium(int dim, double sigma_R2, double ell_m);
// Validates the table, synthesizes R by inverse transform and caches an
// interpolant. sigma_R2 of the result is the synthesized R(0).
MediumSpec make_tabulated_medium(int dim, std::vector<double> k, std::vector<double> spectrum);
// CSV with header row and columns k, spectrum.
MediumSpec load_tabulated_medium(int dim, const std::string& path);

// Fourier transform of R, R^(k) = int R(x) e^{-ikx} dx, as a function of |k|.
double medium_spectrum(const MediumSpec& spec, double k_abs);

// R(x). Tabulated kind beyond the resolvable lag returns 0 and warns.
double covariance_r(const MediumSpec& spec, const Point& x);
// Q(x) = R(x) - R(0).
double q_potential(const MediumSpec& spec, const Point& x);

struct HessianXi {
    Eigen::MatrixXd matrix;
    // Absolute determinant, used by the closed-form ratios.
    double abs_det() const { return std::abs(matrix.determinant()); }
};

HessianXi hessian_xi(const MediumSpec& spec);
// sigma_m^2 when Xi = -sigma_m^2 I; numeric error otherwise.
double isotropic_sigma_m2(const HessianXi& xi);

// log of cal_Q(tau, tau') = (k0^2 z / 4 eta^2) int_0^1 Q(tau + tau' s z / k0) ds.
double log_cal_q(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z, double eta,
                 double k0);
// Same exponent by adaptive quadrature only (closed forms bypassed).
double log_cal_q_quadrature(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z,
                            double eta, double k0);
double cal_q(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z, double eta, double k0);
// cal_R = cal_Q * exp(k0^2 R(0) z / 4 eta^2).
double cal_r(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z, double eta, double k0);

// Spectral filter for increments dB over a step dz on a periodic grid.
class PhaseScreenSampler {
  public:
    PhaseScreenSampler(const MediumSpec& spec, const Grid& grid, double dz);

    // Real screen with covariance dz R(x - x') under periodization.
    void sample(RandomStream& stream, std::vector<double>& out) const;

    double clamped_fraction() const { return clamped_fraction_; }
    const Grid& grid() const { return grid_; }

  private:
    Grid grid_;
    std::vector<double> amplitude_;
    double clamped_fraction_ = 0.0;
};

std::vector<double> sample_phase_screen(const MediumSpec& spec, const Grid& grid, double dz,
                                        RandomStream& stream);

} // namespace pcb
