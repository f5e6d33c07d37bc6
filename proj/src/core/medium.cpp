#include "medium.hpp"

#include "fft.hpp"
#include "quadrature.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pcb {

struct TabulatedCovariance {
    double r_max = 0.0;  // resolvable lag, pi / table spacing
    double r_zero = 0.0; // R is negligible from here on
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
};

namespace {

constexpr double kPi = std::numbers::pi;

// Linear interpolation of the radial table; constant below the first node,
// zero beyond the last.
double table_value(const MediumSpec& s, double k)
{
    const auto& ks = s.table_k;
    const auto& vs = s.table_spectrum;
    if (k <= ks.front())
        return vs.front();
    if (k >= ks.back())
        return k == ks.back() ? vs.back() : 0.0;
    auto it = std::upper_bound(ks.begin(), ks.end(), k);
    std::size_t i = std::size_t(it - ks.begin()) - 1;
    double t = (k - ks[i]) / (ks[i + 1] - ks[i]);
    return vs[i] + t * (vs[i + 1] - vs[i]);
}

// Integrates g(k) * spectrum(k) over [0, k_last] with Gauss-Legendre on every
// table interval.
template <class G>
double table_integral(const MediumSpec& s, G&& g, int nodes = 16)
{
    double total = 0.0;
    std::vector<double> cuts;
    if (s.table_k.front() > 0.0)
        cuts.push_back(0.0);
    cuts.insert(cuts.end(), s.table_k.begin(), s.table_k.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rule r = gauss_legendre(nodes, cuts[i], cuts[i + 1]);
        for (std::size_t j = 0; j < r.nodes.size(); ++j)
            total += r.weights[j] * g(r.nodes[j]) * table_value(s, r.nodes[j]);
    }
    return total;
}

// Inverse transform of a radial spectrum at lag r.
double synthesize(const MediumSpec& s, double r)
{
    if (s.dim == 1)
        return table_integral(s, [r](double k) { return std::cos(k * r); }) / kPi;
    return table_integral(s, [r](double k) { return k * gsl_sf_bessel_J0(k * r); }) / (2.0 * kPi);
}

} // namespace

MediumSpec make_gaussian_medium(int dim, double sigma_R2, double ell_m)
{
    if (dim != 1 && dim != 2)
        config_error("medium dimension must be 1 or 2");
    if (!(sigma_R2 >= 0.0) || !std::isfinite(sigma_R2))
        config_error("medium sigma_R2 must be nonnegative");
    if (!(ell_m > 0.0) || !std::isfinite(ell_m))
        config_error("medium ell_m must be positive");
    MediumSpec s;
    s.kind = MediumKind::gaussian;
    s.dim = dim;
    s.sigma_R2 = sigma_R2;
    s.ell_m = ell_m;
    return s;
}

MediumSpec make_tabulated_medium(int dim, std::vector<double> k, std::vector<double> spectrum)
{
    if (dim != 1 && dim != 2)
        config_error("medium dimension must be 1 or 2");
    if (k.size() < 4 || k.size() != spectrum.size())
        config_error("tabulated spectrum needs at least 4 rows of (k, spectrum)");
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (!std::isfinite(k[i]) || !std::isfinite(spectrum[i]))
            config_error("tabulated spectrum contains a non-finite value");
        if (spectrum[i] < 0.0)
            config_error("tabulated spectrum must be nonnegative");
        if (k[i] < 0.0 || (i > 0 && !(k[i] > k[i - 1])))
            config_error("tabulated wavenumbers must be nonnegative and strictly increasing");
    }
    MediumSpec s;
    s.kind = MediumKind::tabulated;
    s.dim = dim;
    s.table_k = std::move(k);
    s.table_spectrum = std::move(spectrum);

    double max_step = 0.0;
    for (std::size_t i = 0; i + 1 < s.table_k.size(); ++i)
        max_step = std::max(max_step, s.table_k[i + 1] - s.table_k[i]);
    if (s.table_k.front() > 0.0)
        max_step = std::max(max_step, s.table_k.front());

    // Knots fine enough for the shortest scale the table carries, marched out
    // until R has stayed negligible for a while.
    double r_max = kPi / max_step;
    double h = std::min(r_max / 64.0, kPi / (4.0 * s.table_k.back()));
    std::vector<double> values{synthesize(s, 0.0)};
    if (!(values[0] > 0.0))
        config_error("tabulated spectrum has zero total mass");
    const int quiet_run = 32;
    int quiet = 0;
    while (values.size() * h < r_max && quiet < quiet_run) {
        double v = synthesize(s, double(values.size()) * h);
        values.push_back(v);
        quiet = std::abs(v) < 1e-7 * values[0] ? quiet + 1 : 0;
    }
    double r_zero = quiet >= quiet_run ? double(values.size() - quiet_run) * h : r_max;
    s.sigma_R2 = values[0];
    s.ell_m = 0.0;
    auto table = std::make_shared<TabulatedCovariance>(TabulatedCovariance{
        r_max, r_zero,
        boost::math::interpolators::cardinal_cubic_b_spline<double>(values.begin(), values.end(), 0.0, h, 0.0)});
    s.table = std::move(table);
    return s;
}

MediumSpec load_tabulated_medium(int dim, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        config_error("cannot open spectrum file " + path);
    std::string line;
    if (!std::getline(in, line))
        config_error("spectrum file " + path + " is empty");
    std::vector<double> k, v;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        double a, b;
        if (!(is >> a >> b))
            config_error("spectrum file " + path + ": cannot parse row " + std::to_string(row));
        k.push_back(a);
        v.push_back(b);
    }
    return make_tabulated_medium(dim, std::move(k), std::move(v));
}

double medium_spectrum(const MediumSpec& spec, double k_abs)
{
    if (spec.kind == MediumKind::gaussian) {
        double l = spec.ell_m;
        return std::pow(2.0 * kPi, 0.5 * spec.dim) * std::pow(l, spec.dim) * spec.sigma_R2 *
               std::exp(-0.5 * k_abs * k_abs * l * l);
    }
    return table_value(spec, k_abs);
}

double covariance_r(const MediumSpec& spec, const Point& x)
{
    double r2 = spec.dim == 1 ? x[0] * x[0] : norm2(x);
    if (spec.kind == MediumKind::gaussian)
        return spec.sigma_R2 * std::exp(-0.5 * r2 / (spec.ell_m * spec.ell_m));
    double r = std::sqrt(r2);
    if (r >= spec.table->r_zero && r <= spec.table->r_max)
        return 0.0;
    if (r > spec.table->r_max) {
        warn("tabulated covariance requested beyond its resolvable lag; using 0");
        return 0.0;
    }
    return spec.table->spline(r);
}

double q_potential(const MediumSpec& spec, const Point& x)
{
    return covariance_r(spec, x) - spec.sigma_R2;
}

HessianXi hessian_xi(const MediumSpec& spec)
{
    HessianXi xi;
    if (spec.kind == MediumKind::gaussian) {
        xi.matrix = -(spec.sigma_R2 / (spec.ell_m * spec.ell_m)) *
                    Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    } else {
        int power = spec.dim == 1 ? 2 : 3;
        double norm = spec.dim == 1 ? 1.0 / kPi : 1.0 / (4.0 * kPi);
        double total = table_integral(spec, [power](double k) { return std::pow(k, power); });
        // A finite second moment has a negligible contribution from the last
        // quarter of the table.
        double k_last = spec.table_k.back();
        double cut = spec.table_k.front() + 0.75 * (k_last - spec.table_k.front());
        double tail = 0.0;
        for (std::size_t i = 0; i + 1 < spec.table_k.size(); ++i) {
            double a = std::max(spec.table_k[i], cut), b = spec.table_k[i + 1];
            if (b <= a)
                continue;
            Rule r = gauss_legendre(16, a, b);
            for (std::size_t j = 0; j < r.nodes.size(); ++j)
                tail += r.weights[j] * std::pow(r.nodes[j], power) * table_value(spec, r.nodes[j]);
        }
        if (!(total > 0.0) || tail > 1e-3 * total)
            numeric_error("Xi undefined: the tabulated spectrum has no finite second moment");
        xi.matrix = -(norm * total) * Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    }
    return xi;
}

double isotropic_sigma_m2(const HessianXi& xi)
{
    const auto& m = xi.matrix;
    double s = -m(0, 0);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double expect = i == j ? -s : 0.0;
            if (std::abs(m(i, j) - expect) > 1e-12 * std::max(1.0, s))
                numeric_error("Xi is not a multiple of the identity");
        }
    if (!(s > 0.0))
        numeric_error("Xi is not negative definite");
    return s;
}

double log_cal_q_quadrature(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z,
                            double eta, double k0)
{
    if (z == 0.0)
        return 0.0;
    double scale = k0 * k0 * z / (4.0 * eta * eta);
    auto f = [&](double s) { return q_potential(spec, tau + (s * z / k0) * tau_prime); };
    double r0 = spec.sigma_R2;
    QuadResult q = integrate_adaptive(f, 0.0, 1.0, 1e-10, std::max(1e-14, 1e-14 * r0));
    return scale * q.value;
}

double log_cal_q(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z, double eta,
                 double k0)
{
    if (z == 0.0)
        return 0.0;
    if (spec.kind != MediumKind::gaussian)
        return log_cal_q_quadrature(spec, tau, tau_prime, z, eta, k0);
    Point a = tau, b = (z / k0) * tau_prime;
    if (spec.dim == 1) {
        a[1] = 0.0;
        b[1] = 0.0;
    }
    double l = spec.ell_m;
    double bb = norm2(b);
    double scale = k0 * k0 * z / (4.0 * eta * eta);
    double mean_r;
    if (bb < 1e-12 * l * l) {
        // Nearly constant integrand: midpoint expansion is exact to O(b^2).
        Point mid = a + 0.5 * b;
        double g = std::exp(-0.5 * norm2(mid) / (l * l));
        double ab = dot(mid, b) / (l * l);
        double corr = (ab * ab - bb / (l * l)) / 24.0;
        mean_r = spec.sigma_R2 * g * (1.0 + corr);
    } else {
        // |a + b s|^2 = |b|^2 (s + s0)^2 + perp^2
        double bn = std::sqrt(bb);
        double s0 = dot(a, b) / bb;
        double perp2 = std::max(0.0, norm2(a) - dot(a, b) * dot(a, b) / bb);
        double c = bn / (std::sqrt(2.0) * l);
        double lo = c * s0, hi = c * (1.0 + s0);
        double diff;
        if (lo >= 0.0)
            diff = std::erfc(lo) - std::erfc(hi);
        else if (hi <= 0.0)
            diff = std::erfc(-hi) - std::erfc(-lo);
        else
            diff = std::erf(hi) - std::erf(lo);
        mean_r = spec.sigma_R2 * std::exp(-0.5 * perp2 / (l * l)) * 0.5 * std::sqrt(kPi) * diff / c;
    }
    return scale * (mean_r - spec.sigma_R2);
}

double cal_q(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z, double eta, double k0)
{
    return std::exp(log_cal_q(spec, tau, tau_prime, z, eta, k0));
}

double cal_r(const MediumSpec& spec, const Point& tau, const Point& tau_prime, double z, double eta, double k0)
{
    double shift = k0 * k0 * spec.sigma_R2 * z / (4.0 * eta * eta);
    return std::exp(log_cal_q(spec, tau, tau_prime, z, eta, k0) + shift);
}

PhaseScreenSampler::PhaseScreenSampler(const MediumSpec& spec, const Grid& grid, double dz) : grid_(grid)
{
    if (!(dz > 0.0))
        config_error("screen step dz must be positive");
    if (spec.dim != grid.dim)
        config_error("medium and grid dimensions differ");
    const std::size_t n = grid.size();
    double volume = std::pow(grid.extent(), grid.dim);
    amplitude_.resize(n);
    double total = 0.0, clamped = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Point k = grid.wavevector(j);
        double kabs = std::sqrt(grid.dim == 1 ? k[0] * k[0] : norm2(k));
        double v = medium_spectrum(spec, kabs);
        total += std::abs(v);
        if (v < 0.0) {
            clamped += -v;
            v = 0.0;
        }
        amplitude_[j] = std::sqrt(2.0 * dz * v / volume);
    }
    clamped_fraction_ = total > 0.0 ? clamped / total : 0.0;
    if (clamped_fraction_ > 1e-6)
        numeric_error("discretized medium spectrum has too much negative mass");
}

void PhaseScreenSampler::sample(RandomStream& stream, std::vector<double>& out) const
{
    const std::size_t n = grid_.size();
    std::vector<cplx> work(n);
    for (std::size_t j = 0; j < n; ++j)
        work[j] = amplitude_[j] * stream.complex_normal();
    fft_inplace(work.data(), grid_.dims(), +1);
    out.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        out[j] = work[j].real();
}

std::vector<double> sample_phase_screen(const MediumSpec& spec, const Grid& grid, double dz, RandomStream& stream)
{
    PhaseScreenSampler s(spec, grid, dz);
    std::vector<double> out;
    s.sample(stream, out);
    return out;
}

} // namespace pcb
