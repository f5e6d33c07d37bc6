#include "asymptotics.hpp"

#include "permanent.hpp"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pcb {
namespace {

constexpr double kPi = std::numbers::pi;
// Gaussian tails are cut where they fall below 1e-12 of the peak.
const double kTailSigmas = std::sqrt(2.0 * std::log(1e12)) * 1.05;

int dim_of(const AsymptoticModel& m)
{
    if (m.medium.dim != m.source.dim)
        config_error("medium and source dimensions differ");
    return m.source.dim;
}

Eigen::MatrixXd xi_of(const AsymptoticModel& m) { return hessian_xi(m.medium).matrix; }

Eigen::VectorXd vec(const Point& p, int d)
{
    Eigen::VectorXd v(d);
    for (int a = 0; a < d; ++a)
        v(a) = p[a];
    return v;
}

double factorial(int p)
{
    double f = 1.0;
    for (int i = 2; i <= p; ++i)
        f *= i;
    return f;
}

// Fourier transform of f^2 = exp(-2|x|^2/r0^2).
double envelope_sq_hat(const SourceSpec& s, double zeta2)
{
    return std::pow(0.5 * kPi * s.r0 * s.r0, 0.5 * s.dim) * std::exp(-zeta2 * s.r0 * s.r0 / 8.0);
}

double gamma_r0(const SourceSpec& s, const Point& r) { return gamma_profile(s, r, {0.0, 0.0}); }

Rule composite_rule(double a, double b, int panels, int nodes)
{
    Rule out;
    double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        Rule p = gauss_legendre(nodes, a + i * h, a + (i + 1) * h);
        out.nodes.insert(out.nodes.end(), p.nodes.begin(), p.nodes.end());
        out.weights.insert(out.weights.end(), p.weights.begin(), p.weights.end());
    }
    return out;
}

// Tensor Gauss-Legendre over a box, refined by doubling the panel count until
// the relative change drops below 1e-10. Non-convergence beyond 1e-6 throws.
template <class T, class Fn>
T box_integral(const std::vector<double>& lo, const std::vector<double>& hi, int panels, Fn&& f,
               const std::string& what, double abs_floor = 1e-300)
{
    const std::size_t dims = lo.size();
    const int nodes = 8;
    T prev{};
    double last_change = INFINITY;
    bool have = false;
    for (int level = 0;; ++level) {
        int np = panels << level;
        double count = std::pow(double(np * nodes), double(dims));
        if (have && count > 3e7)
            break;
        std::vector<Rule> rules;
        for (std::size_t a = 0; a < dims; ++a)
            rules.push_back(composite_rule(lo[a], hi[a], np, nodes));
        T sum{};
        tensor_for_each(rules, [&](const std::vector<double>& x, double w) { sum += w * f(x); });
        if (have) {
            last_change = std::abs(sum - prev);
            if (last_change <= std::max(1e-10 * std::abs(sum), abs_floor))
                return sum;
        }
        prev = sum;
        have = true;
    }
    if (last_change <= std::max(1e-6 * std::abs(prev), abs_floor))
        return prev;
    std::ostringstream os;
    os << what << ": quadrature did not converge (last change " << last_change << " on value " << std::abs(prev)
       << ")";
    numeric_error(os.str());
}

void require_pairs(const MomentQuery& q, int p)
{
    if (int(q.xs.size()) != p || int(q.ys.size()) != p || int(q.times.size()) != 2 * p)
        config_error("moment query needs p points in X and Y and 2p times");
}

MomentQuery pair_query(const MomentQuery& q, int j, int l)
{
    MomentQuery out = q;
    out.xs = {q.xs[j]};
    out.ys = {q.ys[l]};
    int p = int(q.xs.size());
    out.times = {q.times[j], q.times[p + l]};
    return out;
}

// Gaussian pieces of the source moment with paired points collapsed onto
// integration variables s_k and unpaired points fixed at r:
//   weight * exp(-1/2 s^T A s + beta^T s + c), identical on every axis for A.
struct SourceGaussian {
    double weight = 0.0;
    Eigen::MatrixXd a;    // m x m
    Eigen::MatrixXd beta; // m x d
    double c = 0.0;
};

struct Slot {
    int s = -1; // integration variable index, -1 for the fixed point r
};

struct GaussianBuilder {
    int m, d;
    Point r;
    SourceGaussian g;

    GaussianBuilder(int m_, int d_, const Point& r_) : m(m_), d(d_), r(r_)
    {
        g.a = Eigen::MatrixXd::Zero(m, m);
        g.beta = Eigen::MatrixXd::Zero(m, d);
        g.weight = 1.0;
    }
    double r2() const { return d == 1 ? r[0] * r[0] : norm2(r); }
    // adds -coef |pt|^2
    void square(Slot pt, double coef)
    {
        if (pt.s >= 0)
            g.a(pt.s, pt.s) += 2.0 * coef;
        else
            g.c -= coef * r2();
    }
    // adds -coef |a - b|^2
    void difference(Slot a, Slot b, double coef)
    {
        if (a.s < 0 && b.s < 0)
            return;
        if (a.s >= 0 && b.s >= 0) {
            if (a.s == b.s)
                return;
            g.a(a.s, a.s) += 2.0 * coef;
            g.a(b.s, b.s) += 2.0 * coef;
            g.a(a.s, b.s) -= 2.0 * coef;
            g.a(b.s, a.s) -= 2.0 * coef;
            return;
        }
        int k = a.s >= 0 ? a.s : b.s;
        g.a(k, k) += 2.0 * coef;
        for (int ax = 0; ax < d; ++ax)
            g.beta(k, ax) += 2.0 * coef * r[ax];
        g.c -= coef * r2();
    }
};

// Source moment S_p(X'(s), Y'(s); T) as a sum of Gaussians in s.
std::vector<SourceGaussian> source_gaussians(const SourceSpec& src, const std::vector<Slot>& xs,
                                             const std::vector<Slot>& ys, const std::vector<double>& times, int m,
                                             const Point& r)
{
    const int p = int(xs.size());
    const int d = src.dim;
    std::vector<SourceGaussian> out;
    const double inv_r0 = 1.0 / (src.r0 * src.r0);
    if (src.coherence == CoherenceKind::fully_coherent) {
        GaussianBuilder b(m, d, r);
        for (int j = 0; j < p; ++j) {
            b.square(xs[j], inv_r0);
            b.square(ys[j], inv_r0);
        }
        out.push_back(b.g);
        return out;
    }
    bool cross = false;
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (xs[j].s != ys[l].s || xs[j].s < 0)
                cross = cross || !(xs[j].s < 0 && ys[l].s < 0);
    if (src.coherence == CoherenceKind::bessel && (p > 1 || cross))
        range_error("beta = 1 moments beyond p = 1 need a gaussian or fully coherent source");
    const double w = src.theta * src.rw;
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        double weight = 1.0;
        for (int j = 0; j < p; ++j)
            weight *= temporal_kernel(src, times[j] - times[p + perm[j]]);
        if (weight == 0.0)
            continue;
        GaussianBuilder b(m, d, r);
        b.g.weight = weight;
        for (int j = 0; j < p; ++j) {
            b.square(xs[j], inv_r0);
            b.square(ys[perm[j]], inv_r0);
            if (src.coherence == CoherenceKind::gaussian)
                b.difference(xs[j], ys[perm[j]], 0.5 / (w * w));
        }
        out.push_back(b.g);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

// Fourier transform in s of one Gaussian piece, pre-factored:
//   value(zeta) = exp(log_scale - i sum_ax zeta_ax^T mean_ax - 1/2 sum_ax zeta_ax^T ainv zeta_ax)
struct GaussianTransform {
    double weight;
    double log_scale;
    Eigen::MatrixXd ainv; // m x m
    Eigen::MatrixXd mean; // m x d
};

GaussianTransform transform(const SourceGaussian& g, int d)
{
    const int m = int(g.a.rows());
    GaussianTransform t;
    t.weight = g.weight;
    Eigen::LLT<Eigen::MatrixXd> llt(g.a);
    if (llt.info() != Eigen::Success)
        numeric_error("source moment Gaussian is not positive definite");
    t.ainv = llt.solve(Eigen::MatrixXd::Identity(m, m));
    t.mean = t.ainv * g.beta;
    Eigen::MatrixXd L = llt.matrixL();
    double logdet = 0.0;
    for (int i = 0; i < m; ++i)
        logdet += 2.0 * std::log(L(i, i));
    double quad = 0.0;
    for (int ax = 0; ax < d; ++ax)
        quad += 0.5 * g.beta.col(ax).dot(t.mean.col(ax));
    t.log_scale = g.c + quad + d * (0.5 * m * std::log(2.0 * kPi) - 0.5 * logdet);
    return t;
}

cplx evaluate_transform(const GaussianTransform& t, const std::vector<double>& zeta, int d)
{
    const int m = int(t.ainv.rows());
    double re = t.log_scale;
    double im = 0.0;
    for (int ax = 0; ax < d; ++ax) {
        for (int k = 0; k < m; ++k) {
            double zk = zeta[std::size_t(k) * d + ax];
            im -= zk * t.mean(k, ax);
            double row = 0.0;
            for (int l = 0; l < m; ++l)
                row += t.ainv(k, l) * zeta[std::size_t(l) * d + ax];
            re -= 0.5 * zk * row;
        }
    }
    return t.weight * std::exp(cplx(re, im));
}

// Slots for a pairing: x'_{j_k} = y'_{l_k} = s_k, everything else at r.
void pairing_slots(const Pairing& pairing, int p, std::vector<Slot>& xs, std::vector<Slot>& ys)
{
    xs.assign(p, Slot{});
    ys.assign(p, Slot{});
    for (std::size_t k = 0; k < pairing.size(); ++k) {
        xs[pairing[k].first].s = int(k);
        ys[pairing[k].second].s = int(k);
    }
}

void check_beta_one_source(const SourceSpec& src, int p)
{
    if (p > 1 && src.coherence == CoherenceKind::bessel)
        range_error("beta = 1 moments beyond p = 1 need a gaussian or fully coherent source");
}

// Kinetic beta = 1 convolution moment by quadrature over the zeta variables
// of each pairing.
cplx mpp_kinetic_beta_one(const AsymptoticModel& model, const MomentQuery& q)
{
    const int p = int(q.xs.size());
    const int d = dim_of(model);
    if (p > 2)
        range_error("kinetic beta = 1 moments are implemented for p <= 2");
    check_beta_one_source(model.source, p);
    const double k0 = model.k0;
    const double e_full = std::exp(-k0 * k0 * model.medium.sigma_R2 * q.z / 4.0);

    std::vector<Point> rs(p, q.r);
    cplx total = std::pow(e_full, p) * s_p(model.source, rs, rs, q.times);
    for (const Pairing& pairing : partial_pairings(p, p)) {
        const int m = int(pairing.size());
        if (m == 0)
            continue;
        std::vector<Slot> xs, ys;
        pairing_slots(pairing, p, xs, ys);
        std::vector<GaussianTransform> terms;
        for (const auto& g : source_gaussians(model.source, xs, ys, q.times, m, q.r))
            terms.push_back(transform(g, d));
        if (terms.empty())
            continue;
        std::vector<double> hi(std::size_t(m) * d), lo;
        for (int k = 0; k < m; ++k) {
            double var = 0.0;
            for (const auto& t : terms) {
                Eigen::MatrixXd a = t.ainv.inverse();
                var = std::max(var, a(k, k));
            }
            for (int ax = 0; ax < d; ++ax)
                hi[std::size_t(k) * d + ax] = kTailSigmas * std::sqrt(var);
        }
        lo = hi;
        for (auto& v : lo)
            v = -v;
        std::vector<Point> taus(m);
        for (int k = 0; k < m; ++k)
            taus[k] = q.ys[pairing[k].second] - q.xs[pairing[k].first];
        auto integrand = [&](const std::vector<double>& zeta) {
            cplx factor = 1.0;
            double phase = 0.0;
            for (int k = 0; k < m; ++k) {
                Point zk{zeta[std::size_t(k) * d], d == 2 ? zeta[std::size_t(k) * d + 1] : 0.0};
                factor *= cal_q(model.medium, taus[k], zk, q.z, 1.0, k0) - e_full;
                phase += dot(zk, q.r);
            }
            cplx h = 0.0;
            for (const auto& t : terms)
                h += evaluate_transform(t, zeta, d);
            return factor * std::polar(1.0, phase) * h;
        };
        cplx value = box_integral<cplx>(lo, hi, 1, integrand, "kinetic moment", 1e-15);
        total += std::pow(e_full, p - m) * value / std::pow(2.0 * kPi, double(m * d));
    }
    return total;
}

// Diffusive beta = 1 convolution moment, closed Gaussian form.
cplx mpp_diffusive_beta_one(const AsymptoticModel& model, const MomentQuery& q)
{
    const int p = int(q.xs.size());
    const int d = dim_of(model);
    if (p > 4)
        range_error("diffusive beta = 1 moments are implemented for p <= 4");
    check_beta_one_source(model.source, p);
    const double k0 = model.k0, z = q.z;
    const Eigen::MatrixXd xi = xi_of(model);
    cplx total = 0.0;
    for (const Pairing& pairing : partial_pairings(p, p)) {
        if (int(pairing.size()) != p)
            continue;
        std::vector<Slot> xs, ys;
        pairing_slots(pairing, p, xs, ys);
        std::vector<Eigen::VectorXd> taus(p);
        double tau_quad = 0.0;
        for (int k = 0; k < p; ++k) {
            taus[k] = vec(q.ys[pairing[k].second] - q.xs[pairing[k].first], d);
            tau_quad += (k0 * k0 * z / 8.0) * taus[k].dot(xi * taus[k]);
        }
        for (const auto& g : source_gaussians(model.source, xs, ys, q.times, p, q.r)) {
            GaussianTransform t = transform(g, d);
            const int n = p * d;
            Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(n, n);
            Eigen::VectorXcd b(n);
            for (int k = 0; k < p; ++k) {
                Eigen::VectorXd drift = (k0 * z * z / 8.0) * (xi * taus[k]);
                for (int a = 0; a < d; ++a) {
                    for (int l = 0; l < p; ++l)
                        mm(k * d + a, l * d + a) += t.ainv(k, l);
                    for (int a2 = 0; a2 < d; ++a2)
                        mm(k * d + a, k * d + a2) -= (z * z * z / 12.0) * xi(a, a2);
                    b(k * d + a) = cplx(drift(a), q.r[a] - t.mean(k, a));
                }
            }
            cplx c = t.log_scale + tau_quad - double(n) * std::log(2.0 * kPi);
            total += t.weight * gaussian_integral(mm, b, c);
        }
    }
    return total;
}

} // namespace

MomentQuery coincident_query(LimitRegime regime, BetaCase beta_case, double z, const Point& r, int p)
{
    MomentQuery q;
    q.regime = regime;
    q.beta_case = beta_case;
    q.z = z;
    q.r = r;
    q.xs.assign(p, Point{0.0, 0.0});
    q.ys.assign(p, Point{0.0, 0.0});
    q.times.assign(2 * p, 0.0);
    return q;
}

cplx m11_kinetic(const AsymptoticModel& model, const MomentQuery& q)
{
    require_pairs(q, 1);
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    double f = src.coherence == CoherenceKind::fully_coherent ? 1.0 : temporal_kernel(src, q.times[0] - q.times[1]);
    Point tau = q.ys[0] - q.xs[0];
    if (q.beta_case == BetaCase::beta_gt_1)
        return f * gamma_r0(src, q.r) * cal_q(model.medium, tau, {0.0, 0.0}, q.z, 1.0, model.k0);
    double half = kTailSigmas * 2.0 / src.r0;
    std::vector<double> lo(d, -half), hi(d, half);
    auto integrand = [&](const std::vector<double>& zv) {
        Point zeta{zv[0], d == 2 ? zv[1] : 0.0};
        double z2 = d == 1 ? zeta[0] * zeta[0] : norm2(zeta);
        return envelope_sq_hat(src, z2) * cal_q(model.medium, tau, zeta, q.z, 1.0, model.k0) *
               std::polar(1.0, dot(zeta, q.r));
    };
    cplx v = box_integral<cplx>(lo, hi, 1, integrand, "kinetic second moment", 1e-15);
    return f * v / std::pow(2.0 * kPi, double(d));
}

cplx m11_diffusive(const AsymptoticModel& model, const MomentQuery& q)
{
    require_pairs(q, 1);
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    const Eigen::MatrixXd xi = xi_of(model);
    double f = src.coherence == CoherenceKind::fully_coherent ? 1.0 : temporal_kernel(src, q.times[0] - q.times[1]);
    Eigen::VectorXd tau = vec(q.ys[0] - q.xs[0], d);
    const double k0 = model.k0, z = q.z;
    double tau_quad = (k0 * k0 * z / 8.0) * tau.dot(xi * tau);
    if (q.beta_case == BetaCase::beta_gt_1)
        return f * gamma_r0(src, q.r) * std::exp(tau_quad);
    Eigen::MatrixXd a = (src.r0 * src.r0 / 4.0) * Eigen::MatrixXd::Identity(d, d) - (z * z * z / 12.0) * xi;
    Eigen::VectorXd drift = (k0 * z * z / 8.0) * (xi * tau);
    Eigen::VectorXcd b(d);
    for (int ax = 0; ax < d; ++ax)
        b(ax) = cplx(drift(ax), q.r[ax]);
    double c = tau_quad + 0.5 * d * std::log(0.5 * kPi * src.r0 * src.r0) - d * std::log(2.0 * kPi);
    return f * gaussian_integral(a, b, c);
}

cplx m11_diffusive_quadrature(const AsymptoticModel& model, const MomentQuery& q)
{
    require_pairs(q, 1);
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    const Eigen::MatrixXd xi = xi_of(model);
    double f = src.coherence == CoherenceKind::fully_coherent ? 1.0 : temporal_kernel(src, q.times[0] - q.times[1]);
    if (q.beta_case == BetaCase::beta_gt_1)
        return m11_diffusive(model, q);
    Eigen::VectorXd tau = vec(q.ys[0] - q.xs[0], d);
    const double k0 = model.k0, z = q.z;
    double half = kTailSigmas * 2.0 / src.r0;
    std::vector<double> lo(d, -half), hi(d, half);
    auto integrand = [&](const std::vector<double>& zv) {
        Eigen::VectorXd zeta(d);
        for (int a = 0; a < d; ++a)
            zeta(a) = zv[a];
        double expo = (k0 * k0 * z / 8.0) *
                      (tau.dot(xi * tau) + (z / k0) * tau.dot(xi * zeta) + (z * z / (3.0 * k0 * k0)) * zeta.dot(xi * zeta));
        double phase = 0.0;
        for (int a = 0; a < d; ++a)
            phase += zv[a] * q.r[a];
        return envelope_sq_hat(src, zeta.squaredNorm()) * std::exp(expo) * std::polar(1.0, phase);
    };
    cplx v = box_integral<cplx>(lo, hi, 1, integrand, "diffusive second moment", 1e-15);
    return f * v / std::pow(2.0 * kPi, double(d));
}

double mean_intensity(const AsymptoticModel& model, LimitRegime regime, BetaCase beta_case, double z, const Point& r)
{
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    if (regime == LimitRegime::kinetic) {
        MomentQuery q = coincident_query(regime, beta_case, z, r, 1);
        return m11_kinetic(model, q).real();
    }
    if (beta_case == BetaCase::beta_gt_1 || z == 0.0)
        return gamma_r0(src, r);
    // f^2 = exp(-1/2 x^T A x) with A = 4/r0^2, convolved with a normalized
    // Gaussian of covariance C = -z^3 Xi / 12.
    Eigen::MatrixXd ainv = (src.r0 * src.r0 / 4.0) * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd cov = -(z * z * z / 12.0) * xi_of(model);
    Eigen::MatrixXd total = ainv + cov;
    Eigen::VectorXd rv = vec(r, d);
    double ratio = std::sqrt(ainv.determinant() / total.determinant());
    return ratio * std::exp(-0.5 * rv.dot(total.ldlt().solve(rv)));
}

double mean_intensity_quadrature(const AsymptoticModel& model, double z, const Point& r)
{
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    if (z == 0.0)
        return gamma_r0(src, r);
    Eigen::MatrixXd cov = -(z * z * z / 12.0) * xi_of(model);
    Eigen::MatrixXd cinv = cov.inverse();
    double norm = 1.0 / (std::pow(2.0 * kPi, 0.5 * d) * std::sqrt(cov.determinant()));
    double width = std::max(src.r0 / 2.0, std::sqrt(cov.maxCoeff()));
    std::vector<double> lo(d), hi(d);
    for (int a = 0; a < d; ++a) {
        lo[a] = r[a] - kTailSigmas * width * 1.5;
        hi[a] = r[a] + kTailSigmas * width * 1.5;
    }
    auto integrand = [&](const std::vector<double>& xv) {
        Point x{xv[0], d == 2 ? xv[1] : 0.0};
        Eigen::VectorXd v = vec(r - x, d);
        return norm * std::exp(-0.5 * v.dot(cinv * v)) * gamma_r0(src, x);
    };
    return box_integral<double>(lo, hi, 2, integrand, "mean intensity convolution", 1e-300);
}

double f_T_exponential(double tau_s, double T)
{
    double x = T / tau_s;
    return (1.0 / x) * (1.0 + (0.5 / x) * std::expm1(-2.0 * x));
}

double f_T(const SourceSpec& source, double T)
{
    if (!(T > 0.0))
        config_error("detector time T must be positive");
    const double ts = source.tau_s;
    // (1/T^2) int int F(t1 - t2)^2 = (2/T^2) int_0^T (T - u) F(u)^2 du, on
    // panels that double in length from tau_s so long windows stay cheap.
    auto g = [&](double u) {
        double v = temporal_kernel(source, u);
        return (T - u) * v * v;
    };
    double sum = 0.0;
    for (double a = 0.0, b = std::min(T, ts); a < T; a = b, b = std::min(T, 2.0 * b))
        sum += integrate_adaptive(g, a, b, 1e-12, 1e-15 * ts * T).value;
    return 2.0 * sum / (T * T);
}

QuadResult f_p(const SourceSpec& source, int p, double T)
{
    if (p < 1 || p > 4)
        range_error("F_p is implemented for 1 <= p <= 4");
    if (!(T > 0.0))
        config_error("detector time T must be positive");
    if (p == 1)
        return {1.0, 0.0};
    // Entries are F itself: a transposition contributes F(t_i - t_j)^2, which
    // keeps F_2 = 1 + F_T.
    auto kern = [&](double u) { return temporal_kernel(source, u); };
    if (p == 4) {
        std::vector<double> a(16);
        auto integrand = [&](const std::vector<double>& u) {
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    a[i * 4 + j] = kern(T * (u[i] - u[j]));
            return permanent(a, 4);
        };
        return qmc_integrate(4, integrand, 1 << 15, 16, 0x5eedULL);
    }
    // Symmetric integrand: p! times the ordered simplex t_1 < ... < t_p, whose
    // faces carry the kinks of F.
    const double scale = 0.5 * source.tau_s;
    auto simplex = [&](int nodes) {
        Rule r1 = graded_rule(0.0, T, scale, nodes);
        double total = 0.0;
        for (std::size_t i = 0; i < r1.nodes.size(); ++i) {
            double t1 = r1.nodes[i];
            Rule r2 = graded_rule(t1, T, scale, nodes);
            double s2 = 0.0;
            for (std::size_t j = 0; j < r2.nodes.size(); ++j) {
                double t2 = r2.nodes[j];
                double a12 = kern(t1 - t2);
                if (p == 2) {
                    s2 += r2.weights[j] * (1.0 + a12 * a12);
                    continue;
                }
                Rule r3 = graded_rule(t2, T, scale, nodes);
                double s3 = 0.0;
                for (std::size_t k = 0; k < r3.nodes.size(); ++k) {
                    double t3 = r3.nodes[k];
                    double a13 = kern(t1 - t3), a23 = kern(t2 - t3);
                    // permanent of the symmetric 3x3 matrix with unit diagonal
                    s3 += r3.weights[k] * (1.0 + a12 * a12 + a13 * a13 + a23 * a23 + 2.0 * a12 * a23 * a13);
                }
                s2 += r2.weights[j] * s3;
            }
            total += r1.weights[i] * s2;
        }
        return factorial(p) * total / std::pow(T, p);
    };
    double prev = simplex(6);
    for (int nodes : {10, 16}) {
        double v = simplex(nodes);
        double change = std::abs(v - prev);
        if (change <= 1e-10 * std::abs(v))
            return {v, change};
        prev = v;
        if (nodes == 16) {
            if (change > 1e-6 * std::abs(v))
                numeric_error("F_p quadrature did not converge");
            return {v, change};
        }
    }
    return {prev, 0.0};
}

double f_p_limit_small_T(int p) { return factorial(p); }
double f_p_limit_large_T(int) { return 1.0; }

namespace {

// int exp((12/z^3)(r-r')^T Xi^{-1} (r-r')) exp(-4|r'|^2/r0^2) dr'
double chi_spatial_closed(const AsymptoticModel& model, double z, const Point& r)
{
    const int d = model.source.dim;
    Eigen::MatrixXd xi = xi_of(model);
    Eigen::MatrixXd pm = -(24.0 / (z * z * z)) * xi.inverse();
    Eigen::MatrixXd a = (8.0 / (model.source.r0 * model.source.r0)) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd rv = vec(r, d);
    Eigen::VectorXcd b = (pm * rv).cast<cplx>();
    return gaussian_integral(a + pm, b, -0.5 * rv.dot(pm * rv)).real();
}

// int exp((3 theta^2/z^3) s^T Xi^{-1} s) Gamma(0, s)^2 ds
double chi_lag_closed(const AsymptoticModel& model, double z)
{
    const SourceSpec& src = model.source;
    const int d = src.dim;
    const double th = src.theta;
    Eigen::MatrixXd xi = xi_of(model);
    Eigen::MatrixXd base = -(6.0 * th * th / (z * z * z)) * xi.inverse() +
                           (2.0 * th * th / (src.r0 * src.r0)) * Eigen::MatrixXd::Identity(d, d);
    switch (src.coherence) {
    case CoherenceKind::gaussian: {
        Eigen::MatrixXd a = base + (2.0 / (src.rw * src.rw)) * Eigen::MatrixXd::Identity(d, d);
        return gaussian_integral(a, Eigen::VectorXcd::Zero(d), 0.0).real();
    }
    case CoherenceKind::fully_coherent:
        return gaussian_integral(base, Eigen::VectorXcd::Zero(d), 0.0).real();
    case CoherenceKind::bessel: {
        double s2 = isotropic_sigma_m2(hessian_xi(model.medium));
        double a = 3.0 * th * th / (s2 * z * z * z) + th * th / (src.r0 * src.r0);
        double x = 1.0 / (2.0 * a * src.rw * src.rw);
        return (kPi / a) * gsl_sf_bessel_I0_scaled(x);
    }
    }
    return 0.0;
}

double chi_prefactor(const AsymptoticModel& model, double z)
{
    const int d = model.source.dim;
    double det = std::abs(xi_of(model).determinant());
    return std::pow(12.0 * model.source.theta / (z * z * z), d) / (det * std::pow(2.0 * kPi, d));
}

// Gaussian-envelope Schell sources factor as
// Gamma(r', s')^2 = Gamma(r', 0)^2 Gamma(0, s')^2, so the R^{2d} rule is the
// tensor product of an r' rule and an s' rule.
double chi_spatial_quadrature(const AsymptoticModel& model, double z, const Point& r)
{
    const SourceSpec& src = model.source;
    const int d = src.dim;
    Eigen::MatrixXd xinv = xi_of(model).inverse();
    double width = src.r0 / std::sqrt(8.0);
    std::vector<double> lo(d), hi(d);
    for (int a = 0; a < d; ++a) {
        lo[a] = -kTailSigmas * width * 1.2;
        hi[a] = kTailSigmas * width * 1.2;
    }
    auto integrand = [&](const std::vector<double>& xv) {
        Point x{xv[0], d == 2 ? xv[1] : 0.0};
        Eigen::VectorXd v = vec(r - x, d);
        double g = gamma_r0(src, x);
        return std::exp((12.0 / (z * z * z)) * v.dot(xinv * v)) * g * g;
    };
    return box_integral<double>(lo, hi, 2, integrand, "chi spatial factor", 1e-300);
}

double chi_lag_quadrature(const AsymptoticModel& model, double z)
{
    const SourceSpec& src = model.source;
    const int d = src.dim;
    const double th = src.theta;
    Eigen::MatrixXd xinv = xi_of(model).inverse();
    // Decay rate of the Gaussian part in |s|^2.
    double rate = th * th / (src.r0 * src.r0) + 3.0 * th * th / (z * z * z) * (-xinv).diagonal().minCoeff();
    if (src.coherence == CoherenceKind::gaussian)
        rate += 1.0 / (src.rw * src.rw);
    double half = std::sqrt(std::log(1e14) / rate);
    int panels = std::max(2, int(std::ceil(2.0 * half / (kPi * src.rw))));
    std::vector<double> lo(d, -half), hi(d, half);
    auto integrand = [&](const std::vector<double>& sv) {
        Point s{sv[0], d == 2 ? sv[1] : 0.0};
        Eigen::VectorXd v = vec(s, d);
        double g = gamma_profile(src, {0.0, 0.0}, s);
        return std::exp((3.0 * th * th / (z * z * z)) * v.dot(xinv * v)) * g * g;
    };
    return box_integral<double>(lo, hi, panels, integrand, "chi lag factor", 1e-300);
}

} // namespace

double chi(const AsymptoticModel& model, double z, const Point& r)
{
    dim_of(model);
    if (z == 0.0) {
        double g = gamma_r0(model.source, r);
        return g * g;
    }
    return chi_prefactor(model, z) * chi_spatial_closed(model, z, r) * chi_lag_closed(model, z);
}

double chi_quadrature(const AsymptoticModel& model, double z, const Point& r)
{
    dim_of(model);
    if (z == 0.0) {
        double g = gamma_r0(model.source, r);
        return g * g;
    }
    return chi_prefactor(model, z) * chi_spatial_quadrature(model, z, r) * chi_lag_quadrature(model, z);
}

double chi_ratio_gaussian(double z, double sigma_m2, double r0, double rw, double theta, int dim)
{
    if (z == 0.0)
        return 1.0;
    double half_alpha = 1.0 / (r0 * r0) + 3.0 / (sigma_m2 * z * z * z);
    double coh = 1.0 / (theta * theta * rw * rw);
    return std::pow(half_alpha / (half_alpha + coh), 0.5 * dim);
}

double chi_ratio_bessel(double z, double sigma_m2, double r0, double rw, double theta)
{
    if (z == 0.0)
        return 1.0;
    double inv_r2 = 1.0 / (r0 * r0) + 3.0 / (sigma_m2 * z * z * z);
    double x = 1.0 / (inv_r2 * 2.0 * theta * theta * rw * rw);
    return gsl_sf_bessel_I0_scaled(x);
}

double scint_T(const AsymptoticModel& model, BetaCase beta_case, double z, const Point& r, double T)
{
    double ft = f_T(model.source, T);
    switch (beta_case) {
    case BetaCase::beta_gt_1:
        return 1.0 + 2.0 * ft;
    case BetaCase::theta_to_0:
        return ft;
    case BetaCase::beta_eq_1: {
        double mean = mean_intensity(model, LimitRegime::diffusive, BetaCase::beta_eq_1, z, r);
        if (!(mean > 0.0))
            numeric_error("degenerate intensity: mean intensity is not positive");
        return ft + chi(model, z, r) / (mean * mean) * (1.0 + ft);
    }
    }
    return 0.0;
}

double saturation_ratio(const SourceSpec& source)
{
    const int d = source.dim;
    double w_r = source.r0 / std::sqrt(8.0);
    std::vector<double> lo(d, -kTailSigmas * w_r * 1.2), hi(d, kTailSigmas * w_r * 1.2);
    auto sq_r = [&](const std::vector<double>& xv) {
        double g = gamma_r0(source, {xv[0], d == 2 ? xv[1] : 0.0});
        return g * g;
    };
    double int_sq_r = box_integral<double>(lo, hi, 2, sq_r, "Gamma^2 spatial integral");
    double rate = source.theta * source.theta / (source.r0 * source.r0);
    if (source.coherence == CoherenceKind::gaussian)
        rate += 1.0 / (source.rw * source.rw);
    double half = std::sqrt(std::log(1e14) / rate);
    int panels = std::max(2, int(std::ceil(2.0 * half / (kPi * source.rw))));
    std::vector<double> slo(d, -half), shi(d, half);
    auto sq_s = [&](const std::vector<double>& sv) {
        double g = gamma_profile(source, {0.0, 0.0}, {sv[0], d == 2 ? sv[1] : 0.0});
        return g * g;
    };
    double int_sq_s = box_integral<double>(slo, shi, panels, sq_s, "Gamma^2 lag integral");
    double w1 = source.r0 / 2.0;
    std::vector<double> lo1(d, -kTailSigmas * w1 * 1.2), hi1(d, kTailSigmas * w1 * 1.2);
    auto g0 = [&](const std::vector<double>& xv) { return gamma_r0(source, {xv[0], d == 2 ? xv[1] : 0.0}); };
    double int_g = box_integral<double>(lo1, hi1, 2, g0, "Gamma integral");
    return std::pow(source.theta, d) * int_sq_r * int_sq_s / (int_g * int_g);
}

double scint_T_limit(const AsymptoticModel& model, double T)
{
    double ft = f_T(model.source, T);
    return ft + saturation_ratio(model.source) * (1.0 + ft);
}

const std::vector<Pairing>& partial_pairings(int p, int q)
{
    if (p < 0 || q < 0 || p > 6 || q > 6)
        range_error("pairings are enumerated for p, q <= 6");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::vector<Pairing>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(p, q);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    std::vector<Pairing> out;
    Pairing current;
    std::vector<bool> used(q, false);
    auto rec = [&](auto&& self, int j) -> void {
        if (j == p) {
            out.push_back(current);
            return;
        }
        self(self, j + 1);
        for (int l = 0; l < q; ++l) {
            if (used[l])
                continue;
            used[l] = true;
            current.emplace_back(j, l);
            self(self, j + 1);
            current.pop_back();
            used[l] = false;
        }
    };
    rec(rec, 0);
    return cache.emplace(key, std::move(out)).first->second;
}

cplx permanent_complex(const std::vector<cplx>& a, int p)
{
    if (p == 0)
        return 1.0;
    if (p > 10)
        range_error("permanent size must lie in 0..10");
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    cplx total = 0.0;
    do {
        cplx prod = 1.0;
        for (int i = 0; i < p; ++i)
            prod *= a[std::size_t(i) * p + perm[i]];
        total += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

cplx functional_F(const std::vector<cplx>& h, const std::vector<cplx>& h_prime, const std::vector<cplx>& g)
{
    const int p = int(h.size()), q = int(h_prime.size());
    if (p > 6 || q > 6)
        range_error("functional F supports p, q <= 6");
    if (g.size() != std::size_t(p) * q)
        config_error("functional F needs p*q pair values");
    cplx total = 0.0;
    for (const Pairing& pairing : partial_pairings(p, q)) {
        std::vector<bool> row(p, false), col(q, false);
        cplx prod = 1.0;
        for (auto [j, l] : pairing) {
            prod *= g[std::size_t(j) * q + l] - h[j] * h_prime[l];
            row[j] = true;
            col[l] = true;
        }
        for (int j = 0; j < p; ++j)
            if (!row[j])
                prod *= h[j];
        for (int l = 0; l < q; ++l)
            if (!col[l])
                prod *= h_prime[l];
        total += prod;
    }
    return total;
}

cplx functional_G(const std::vector<cplx>& h, const std::vector<cplx>& g, int p)
{
    if (p > 6)
        range_error("functional G supports p <= 6");
    if (h.size() != std::size_t(p) * p || g.size() != h.size())
        config_error("functional G needs p*p values for h and g");
    cplx total = 0.0;
    for (const Pairing& pairing : partial_pairings(p, p)) {
        std::vector<bool> row(p, false), col(p, false);
        cplx prod = 1.0;
        for (auto [j, l] : pairing) {
            prod *= g[std::size_t(j) * p + l] - h[std::size_t(j) * p + l];
            row[j] = true;
            col[l] = true;
        }
        std::vector<int> rows, cols;
        for (int j = 0; j < p; ++j) {
            if (!row[j])
                rows.push_back(j);
            if (!col[j])
                cols.push_back(j);
        }
        const int n = int(rows.size());
        std::vector<cplx> sub(std::size_t(n) * n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                sub[std::size_t(i) * n + k] = h[std::size_t(rows[i]) * p + cols[k]];
        total += prod * permanent_complex(sub, n);
    }
    return total;
}

cplx mpp_limit(const AsymptoticModel& model, const MomentQuery& q)
{
    const int p = int(q.xs.size());
    require_pairs(q, p);
    if (p == 0)
        return 1.0;
    if (p > 6)
        range_error("limiting moments are implemented for p <= 6");
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    const double k0 = model.k0, z = q.z;
    std::vector<Point> rs(p, q.r);

    if (q.beta_case == BetaCase::beta_eq_1) {
        if (q.regime == LimitRegime::kinetic)
            return mpp_kinetic_beta_one(model, q);
        return mpp_diffusive_beta_one(model, q);
    }

    if (q.regime == LimitRegime::kinetic) {
        const double e_half = std::exp(-k0 * k0 * model.medium.sigma_R2 * z / 8.0);
        if (q.beta_case == BetaCase::beta_gt_1) {
            double sp = s_p(src, rs, rs, q.times);
            std::vector<cplx> h(p, e_half), g(std::size_t(p) * p);
            for (int j = 0; j < p; ++j)
                for (int l = 0; l < p; ++l)
                    g[std::size_t(j) * p + l] = cal_q(model.medium, q.ys[l] - q.xs[j], {0.0, 0.0}, z, 1.0, k0);
            return sp * functional_F(h, h, g);
        }
        // theta -> 0
        std::vector<cplx> h(std::size_t(p) * p), g(h.size());
        const double g0 = gamma_r0(src, q.r);
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) {
                MomentQuery pq = pair_query(q, j, l);
                pq.beta_case = BetaCase::beta_eq_1;
                h[std::size_t(j) * p + l] =
                    temporal_kernel(src, q.times[j] - q.times[p + l]) * g0 * e_half * e_half;
                g[std::size_t(j) * p + l] = m11_kinetic(model, pq);
            }
        return functional_G(h, g, p);
    }

    const Eigen::MatrixXd xi = xi_of(model);
    std::vector<cplx> a(std::size_t(p) * p);
    if (q.beta_case == BetaCase::beta_gt_1) {
        double sp = s_p(src, rs, rs, q.times);
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) {
                Eigen::VectorXd tau = vec(q.ys[l] - q.xs[j], d);
                a[std::size_t(j) * p + l] = std::exp((k0 * k0 * z / 8.0) * tau.dot(xi * tau));
            }
        return sp * permanent_complex(a, p);
    }
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) {
            MomentQuery pq = pair_query(q, j, l);
            pq.beta_case = BetaCase::beta_eq_1;
            a[std::size_t(j) * p + l] = m11_diffusive(model, pq);
        }
    return permanent_complex(a, p);
}

double intensity_moment(const AsymptoticModel& model, BetaCase beta_case, double z, const Point& r, int p)
{
    if (p < 1 || p > 4)
        range_error("intensity moments are implemented for 1 <= p <= 4");
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    const double pf = factorial(p);
    if (beta_case == BetaCase::beta_gt_1)
        return std::pow(gamma_r0(src, r), p) * pf * pf;
    if (beta_case == BetaCase::theta_to_0)
        return pf * std::pow(mean_intensity(model, LimitRegime::diffusive, BetaCase::beta_eq_1, z, r), p);
    std::vector<Point> rs(p, r);
    if (z == 0.0)
        return pf * s_p_intensity(src, rs);

    const Eigen::MatrixXd cov = -(z * z * z / 12.0) * xi_of(model);
    const Eigen::MatrixXd cinv = cov.inverse();
    const int n = p * d;
    if (src.coherence == CoherenceKind::bessel) {
        Eigen::MatrixXd chol = cov.llt().matrixL();
        std::vector<Point> xs(p);
        auto integrand = [&](const std::vector<double>& u) {
            for (int j = 0; j < p; ++j) {
                Eigen::VectorXd nv(d);
                for (int a = 0; a < d; ++a)
                    nv(a) = gsl_cdf_ugaussian_Pinv(std::clamp(u[std::size_t(j) * d + a], 1e-16, 1.0 - 1e-16));
                Eigen::VectorXd shift = chol * nv;
                xs[j] = {r[0] + shift(0), d == 2 ? r[1] + shift(1) : 0.0};
            }
            return s_p_intensity(src, xs);
        };
        QuadResult qr = qmc_integrate(n, integrand, 1 << 14, 16, 0x1a7eULL);
        return pf * qr.value;
    }

    // Product heat kernel times each Gaussian term of S_p^I.
    const double inv_r0 = 1.0 / (src.r0 * src.r0);
    const double w = src.theta * src.rw;
    double log_norm = -0.5 * p * (d * std::log(2.0 * kPi) + std::log(cov.determinant()));
    Eigen::VectorXd rv = vec(r, d);
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    do {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        double c = log_norm;
        for (int j = 0; j < p; ++j) {
            a.block(j * d, j * d, d, d) += cinv;
            b.segment(j * d, d) += cinv * rv;
            c -= 0.5 * rv.dot(cinv * rv);
            // J(x_j, x_pi(j)) envelope part; -|x|^2/r0^2 for both points.
            for (int k : {j, perm[j]})
                a.block(k * d, k * d, d, d) += 2.0 * inv_r0 * Eigen::MatrixXd::Identity(d, d);
            if (src.coherence == CoherenceKind::gaussian && perm[j] != j) {
                int k = perm[j];
                double cf = 2.0 * 0.5 / (w * w);
                a.block(j * d, j * d, d, d) += cf * Eigen::MatrixXd::Identity(d, d);
                a.block(k * d, k * d, d, d) += cf * Eigen::MatrixXd::Identity(d, d);
                a.block(j * d, k * d, d, d) -= cf * Eigen::MatrixXd::Identity(d, d);
                a.block(k * d, j * d, d, d) -= cf * Eigen::MatrixXd::Identity(d, d);
            }
        }
        total += gaussian_integral(a, b.cast<cplx>(), c).real();
        if (src.coherence == CoherenceKind::fully_coherent) {
            total *= pf;
            break;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return pf * total;
}

double time_avg_intensity_moment(const AsymptoticModel& model, BetaCase beta_case, double z, const Point& r, int p,
                                 double T)
{
    double fp = f_p(model.source, p, T).value;
    return intensity_moment(model, beta_case, z, r, p) * fp / factorial(p);
}

cplx exact_second_moment(const AsymptoticModel& model, double epsilon, double eta, double z, const Point& x,
                         const Point& y)
{
    const int d = dim_of(model);
    const SourceSpec& src = model.source;
    const double k0 = model.k0;
    const double sc = std::pow(epsilon, src.beta);
    Point mid = 0.5 * (x + y);
    Point sep = x - y;
    Point tau = y - x;
    const double r0 = src.r0;
    // Transform over the midpoint of the initial coherence f(sc x) f(sc y) g(sc (x - y)).
    auto initial = [&](const Point& k, const Point& lag) {
        double k2 = d == 1 ? k[0] * k[0] : norm2(k);
        double l2 = d == 1 ? lag[0] * lag[0] : norm2(lag);
        return coherence_g(src, sc * lag) * std::exp(-sc * sc * l2 / (2.0 * r0 * r0)) *
               std::pow(kPi * r0 * r0 / (2.0 * sc * sc), 0.5 * d) * std::exp(-k2 * r0 * r0 / (8.0 * sc * sc));
    };
    double half = kTailSigmas * 2.0 * sc / r0;
    std::vector<double> lo(d, -half), hi(d, half);
    auto integrand = [&](const std::vector<double>& kv) {
        Point k{kv[0], d == 2 ? kv[1] : 0.0};
        Point lag = sep - (eta * z / (k0 * epsilon)) * k;
        Point tp = (eta / epsilon) * k;
        return initial(k, lag) * cal_q(model.medium, tau, tp, z, eta, k0) * std::polar(1.0, dot(k, mid));
    };
    cplx v = box_integral<cplx>(lo, hi, 2, integrand, "exact second moment", 1e-15);
    return v / std::pow(2.0 * kPi, double(d));
}

KineticScintillation limit_scintillation(const AsymptoticModel& model, LimitRegime regime, BetaCase beta_case,
                                         double z, const Point& r, double T)
{
    KineticScintillation out;
    MomentQuery q1 = coincident_query(regime, beta_case, z, r, 1);
    out.mean_intensity = mpp_limit(model, q1).real();
    MomentQuery q2 = coincident_query(regime, beta_case, z, r, 2);
    double same = mpp_limit(model, q2).real();
    // Fourth moment is affine in F(t1 - t2)^2; evaluate it with the two source
    // times fully decorrelated to isolate the constant part.
    double far = 1e6 * model.source.tau_s;
    q2.times = {0.0, far, 0.0, far};
    double apart = mpp_limit(model, q2).real();
    double ft = model.source.coherence == CoherenceKind::fully_coherent ? 1.0 : f_T(model.source, T);
    double m2 = out.mean_intensity * out.mean_intensity;
    if (!(m2 > 0.0))
        numeric_error("degenerate intensity: mean intensity is not positive");
    out.instantaneous = same / m2 - 1.0;
    out.time_averaged = (apart + (same - apart) * ft) / m2 - 1.0;
    return out;
}

KineticScintillation kinetic_scintillation(const AsymptoticModel& model, double z, const Point& r, double T)
{
    return limit_scintillation(model, LimitRegime::kinetic, BetaCase::beta_eq_1, z, r, T);
}

} // namespace pcb
