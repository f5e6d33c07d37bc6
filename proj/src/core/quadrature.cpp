#include "quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include "rng.hpp"

#include <gsl/gsl_integration.h>
#include <gsl/gsl_qrng.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace pcb {
namespace {

const Rule& unit_rule(int n)
{
    static std::mutex mutex;
    static std::map<int, Rule> rules;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = rules.find(n);
    if (it != rules.end())
        return it->second;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(std::size_t(n));
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i)
        gsl_integration_glfixed_point(-1.0, 1.0, std::size_t(i), &r.nodes[i], &r.weights[i], t);
    gsl_integration_glfixed_table_free(t);
    return rules.emplace(n, std::move(r)).first->second;
}

} // namespace

Rule gauss_legendre(int n, double a, double b)
{
    const Rule& u = unit_rule(n);
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = m + h * u.nodes[i];
        r.weights[i] = h * u.weights[i];
    }
    return r;
}

Rule graded_rule(double a, double b, double scale, int nodes_per_panel)
{
    std::vector<double> cuts{a, b};
    double len = b - a;
    if (len > 4.0 * scale) {
        for (double w = scale; w < 0.5 * len; w *= 2.0) {
            cuts.push_back(a + w);
            cuts.push_back(b - w);
        }
        cuts.push_back(a + 0.5 * len);
    }
    std::sort(cuts.begin(), cuts.end());
    Rule out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 0.0)
            continue;
        Rule p = gauss_legendre(nodes_per_panel, cuts[i], cuts[i + 1]);
        out.nodes.insert(out.nodes.end(), p.nodes.begin(), p.nodes.end());
        out.weights.insert(out.weights.end(), p.weights.begin(), p.weights.end());
    }
    return out;
}

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_tol)
{
    if (a == b)
        return {};
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    // The recursive estimate is pessimistic for integrands that a single rule
    // already resolves, so try one level first.
    double err = 0.0;
    double value = GK::integrate(f, a, b, 0, rel_tol * 0.1, &err);
    if (!std::isfinite(value) || err > std::max(rel_tol * std::abs(value), abs_tol))
        value = GK::integrate(f, a, b, 20, rel_tol * 0.1, &err);
    if (!std::isfinite(value) || err > std::max(rel_tol * std::abs(value), abs_tol)) {
        std::ostringstream os;
        os << "adaptive quadrature on [" << a << ", " << b << "] did not converge: value " << value
           << ", error estimate " << err;
        numeric_error(os.str());
    }
    return {value, err};
}

cplx gaussian_integral(const Eigen::MatrixXd& A, const Eigen::VectorXcd& b, cplx c)
{
    const Eigen::Index n = A.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        numeric_error("Gaussian integral with a matrix that is not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        logdet += 2.0 * std::log(L(i, i));
    Eigen::VectorXd yr = llt.solve(Eigen::VectorXd(b.real()));
    Eigen::VectorXd yi = llt.solve(Eigen::VectorXd(b.imag()));
    Eigen::VectorXcd y(n);
    y.real() = yr;
    y.imag() = yi;
    cplx quad = 0.5 * (b.transpose() * y)(0);
    double pref = 0.5 * double(n) * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
    return std::exp(quad + c + pref);
}

void tensor_for_each(const std::vector<Rule>& rules,
                     const std::function<void(const std::vector<double>&, double)>& f)
{
    const std::size_t dims = rules.size();
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> x(dims);
    if (dims == 0) {
        f(x, 1.0);
        return;
    }
    for (const auto& r : rules)
        if (r.nodes.empty())
            return;
    while (true) {
        double w = 1.0;
        for (std::size_t d = 0; d < dims; ++d) {
            x[d] = rules[d].nodes[idx[d]];
            w *= rules[d].weights[idx[d]];
        }
        f(x, w);
        std::size_t d = dims;
        while (d > 0) {
            --d;
            if (++idx[d] < rules[d].nodes.size())
                break;
            idx[d] = 0;
            if (d == 0)
                return;
        }
    }
}

QuadResult qmc_integrate(int dim, const std::function<double(const std::vector<double>&)>& f,
                         int points_per_shift, int shifts, std::uint64_t seed)
{
    if (dim < 1 || dim > 40)
        range_error("quasi-random integration supports 1..40 dimensions");
    if (shifts < 2 || points_per_shift < 1)
        numeric_error("quasi-random integration needs at least two shifts");
    std::vector<double> base(std::size_t(points_per_shift) * dim);
    gsl_qrng* q = gsl_qrng_alloc(gsl_qrng_sobol, unsigned(dim));
    for (int i = 0; i < points_per_shift; ++i)
        gsl_qrng_get(q, base.data() + std::size_t(i) * dim);
    gsl_qrng_free(q);

    std::vector<double> means(shifts);
    std::vector<double> x(dim), values(points_per_shift);
    for (int s = 0; s < shifts; ++s) {
        RandomStream stream(seed, std::uint64_t(s), StreamPurpose::quadrature);
        std::vector<double> shift(dim);
        for (auto& v : shift)
            v = stream.uniform();
        for (int i = 0; i < points_per_shift; ++i) {
            for (int k = 0; k < dim; ++k) {
                double u = base[std::size_t(i) * dim + k] + shift[k];
                x[k] = u >= 1.0 ? u - 1.0 : u;
            }
            values[i] = f(x);
        }
        means[s] = pairwise_sum(values.data(), values.size()) / points_per_shift;
    }
    double mean = pairwise_sum(means.data(), means.size()) / shifts;
    double var = 0.0;
    for (double m : means)
        var += (m - mean) * (m - mean);
    var /= (shifts - 1);
    return {mean, std::sqrt(var / shifts)};
}

namespace {
template <class T>
T pairwise_impl(const T* v, std::size_t n)
{
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i)
            s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_impl(v, h) + pairwise_impl(v + h, n - h);
}
} // namespace

double pairwise_sum(const double* v, std::size_t n) { return pairwise_impl(v, n); }
cplx pairwise_sum(const cplx* v, std::size_t n) { return pairwise_impl(v, n); }

} // namespace pcb
