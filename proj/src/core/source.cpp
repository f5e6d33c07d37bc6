#include "source.hpp"

#include "fft.hpp"
#include "permanent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pcb {
namespace {

constexpr double kPi = std::numbers::pi;

double tabulated_kernel(const SourceSpec& s, double u)
{
    const auto& ts = s.kernel_t;
    const auto& fs = s.kernel_f;
    u = std::abs(u);
    if (u >= ts.back())
        return u == ts.back() ? fs.back() : 0.0;
    auto it = std::upper_bound(ts.begin(), ts.end(), u);
    std::size_t i = std::size_t(it - ts.begin()) - 1;
    double w = (u - ts[i]) / (ts[i + 1] - ts[i]);
    return fs[i] + w * (fs[i + 1] - fs[i]);
}

// Eigenvalues of the periodized sampled kernel on n_total points spaced dt.
std::vector<double> temporal_eigenvalues(const SourceSpec& spec, int n_total, double dt)
{
    std::vector<cplx> c(n_total);
    for (int m = 0; m < n_total; ++m)
        c[m] = temporal_kernel(spec, std::min(m, n_total - m) * dt);
    fft_inplace(c.data(), {n_total}, -1);
    std::vector<double> lambda(n_total);
    double total = 0.0, negative = 0.0;
    for (int j = 0; j < n_total; ++j) {
        double v = c[j].real();
        total += std::abs(v);
        if (v < 0.0) {
            negative += -v;
            v = 0.0;
        }
        lambda[j] = v;
    }
    if (negative > 1e-6 * total)
        warn("sampled temporal kernel is not positive definite; negative spectrum clamped");
    return lambda;
}

void check_uniform(const std::vector<double>& times)
{
    if (times.empty())
        config_error("source sampling needs at least one time");
    if (times.size() < 2)
        return;
    double dt = times[1] - times[0];
    if (!(dt > 0.0))
        config_error("source times must be strictly increasing");
    for (std::size_t i = 2; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            config_error("source times must be uniformly spaced");
}

} // namespace

void validate_source(const SourceSpec& spec)
{
    if (spec.dim != 1 && spec.dim != 2)
        config_error("source dimension must be 1 or 2");
    if (!(spec.theta > 0.0 && spec.theta <= 1.0))
        config_error("theta must lie in (0,1]");
    if (!(spec.r0 > 0.0) || !std::isfinite(spec.r0))
        config_error("source r0 must be positive");
    if (!(spec.rw > 0.0) || !std::isfinite(spec.rw))
        config_error("source rw must be positive");
    if (!(spec.beta >= 1.0) || !std::isfinite(spec.beta))
        config_error("source beta must be at least 1");
    if (!(spec.tau_s > 0.0) || !std::isfinite(spec.tau_s))
        config_error("source tau_s must be positive");
    if (spec.coherence == CoherenceKind::bessel && spec.dim != 2)
        config_error("bessel coherence requires dim = 2");
    if (spec.coherence == CoherenceKind::bessel && spec.bessel_modes < 64)
        config_error("bessel coherence needs at least 64 modes");
    if (spec.temporal == TemporalKind::tabulated) {
        const auto& t = spec.kernel_t;
        const auto& f = spec.kernel_f;
        if (t.size() < 2 || t.size() != f.size())
            config_error("tabulated temporal kernel needs at least 2 rows of (t, F)");
        if (t[0] != 0.0 || std::abs(f[0] - 1.0) > 1e-12)
            config_error("tabulated temporal kernel must start at t = 0 with F = 1");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!std::isfinite(t[i]) || !std::isfinite(f[i]))
                config_error("tabulated temporal kernel contains a non-finite value");
            if (f[i] < 0.0 || f[i] > 1.0)
                config_error("tabulated temporal kernel must satisfy 0 <= F <= F(0) = 1");
            if (i > 0 && !(t[i] > t[i - 1]))
                config_error("tabulated temporal kernel lags must be strictly increasing");
        }
    }
}

void load_temporal_kernel(SourceSpec& spec, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        config_error("cannot open temporal kernel file " + path);
    std::string line;
    if (!std::getline(in, line))
        config_error("temporal kernel file " + path + " is empty");
    spec.kernel_t.clear();
    spec.kernel_f.clear();
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        double a, b;
        if (!(is >> a >> b))
            config_error("temporal kernel file " + path + ": cannot parse row " + std::to_string(row));
        spec.kernel_t.push_back(a);
        spec.kernel_f.push_back(b);
    }
    spec.temporal = TemporalKind::tabulated;
}

double envelope(const SourceSpec& spec, const Point& x)
{
    double r2 = spec.dim == 1 ? x[0] * x[0] : norm2(x);
    return std::exp(-r2 / (spec.r0 * spec.r0));
}

double coherence_g(const SourceSpec& spec, const Point& lag)
{
    double r2 = spec.dim == 1 ? lag[0] * lag[0] : norm2(lag);
    double width = spec.theta * spec.rw;
    switch (spec.coherence) {
    case CoherenceKind::gaussian:
        return std::exp(-0.5 * r2 / (width * width));
    case CoherenceKind::bessel:
        return std::cyl_bessel_j(0.0, std::sqrt(r2) / width);
    case CoherenceKind::fully_coherent:
        return 1.0;
    }
    return 1.0;
}

double mutual_coherence(const SourceSpec& spec, const Point& x, const Point& y)
{
    if (spec.coherence == CoherenceKind::bessel && spec.dim != 2)
        config_error("bessel coherence requires dim = 2");
    return envelope(spec, x) * envelope(spec, y) * coherence_g(spec, x - y);
}

double gamma_profile(const SourceSpec& spec, const Point& r, const Point& s)
{
    Point h = (0.5 * spec.theta) * s;
    return mutual_coherence(spec, r + h, r - h);
}

double temporal_kernel(const SourceSpec& spec, double dt)
{
    double u = dt / spec.tau_s;
    if (spec.temporal == TemporalKind::exponential)
        return std::exp(-std::abs(u));
    return tabulated_kernel(spec, u);
}

SourceRealization sample_source_field(const SourceSpec& spec, const Grid& grid, const std::vector<double>& times,
                                      double epsilon, RandomStream& stream)
{
    validate_source(spec);
    check_uniform(times);
    if (grid.dim != spec.dim)
        config_error("source and grid dimensions differ");
    const std::size_t n_space = grid.size();
    const int n_times = int(times.size());
    const double scale = std::pow(epsilon, spec.beta);

    SourceRealization out;
    out.times = times;
    std::vector<double> env(n_space);
    for (std::size_t j = 0; j < n_space; ++j)
        env[j] = envelope(spec, scale * grid.point(j));

    if (spec.coherence == CoherenceKind::fully_coherent) {
        for (int m = 0; m < n_times; ++m) {
            ComplexField f(grid);
            for (std::size_t j = 0; j < n_space; ++j)
                f.values[j] = env[j];
            f.time_index = m;
            out.fields.push_back(std::move(f));
        }
        return out;
    }

    // Periodic time axis with at least 6 tau_s of padding.
    int n_total = 1;
    double dt = 0.0;
    std::vector<double> lambda{1.0};
    if (n_times > 1) {
        dt = times[1] - times[0];
        int pad = int(std::ceil(6.0 * spec.tau_s / dt));
        n_total = n_times + pad;
        lambda = temporal_eigenvalues(spec, n_total, dt);
    }
    // Stored as [time][space].
    std::vector<cplx> work(std::size_t(n_total) * n_space);

    if (spec.coherence == CoherenceKind::gaussian) {
        const double width = spec.theta * spec.rw / scale;
        const double volume = std::pow(grid.extent(), grid.dim);
        std::vector<double> amp(n_space);
        for (std::size_t j = 0; j < n_space; ++j) {
            Point k = grid.wavevector(j);
            double k2 = grid.dim == 1 ? k[0] * k[0] : norm2(k);
            double ghat = std::pow(2.0 * kPi, 0.5 * grid.dim) * std::pow(width, grid.dim) *
                          std::exp(-0.5 * k2 * width * width);
            amp[j] = std::sqrt(ghat / volume);
        }
        // The discrete spectrum sums to g(0) = 1 only when the grid resolves
        // the coherence width and the box holds several of it.
        double total = 0.0;
        for (double a : amp)
            total += a * a;
        if (std::abs(total - 1.0) > 0.01)
            warn("source coherence width is not resolved by the grid; field variance renormalized");
        for (double& a : amp)
            a /= std::sqrt(total);
        for (int t = 0; t < n_total; ++t) {
            double at = std::sqrt(lambda[t] / n_total);
            for (std::size_t j = 0; j < n_space; ++j)
                work[std::size_t(t) * n_space + j] = at * amp[j] * stream.complex_normal();
        }
        std::vector<int> dims{n_total};
        for (int d : grid.dims())
            dims.push_back(d);
        fft_inplace(work.data(), dims, +1);
    } else {
        // Ring spectrum: w = M^{-1/2} sum_m c_m(t) exp(i kappa x . e_m).
        const int modes = spec.bessel_modes;
        const double kappa = scale / (spec.theta * spec.rw);
        const int n = grid.n;
        std::vector<cplx> coeff(static_cast<std::size_t>(n_total));
        std::vector<cplx> ax(n), ay(n);
        const double norm = 1.0 / std::sqrt(double(modes));
        for (int m = 0; m < modes; ++m) {
            double phi = 2.0 * kPi * stream.uniform();
            double ex = std::cos(phi), ey = std::sin(phi);
            for (int t = 0; t < n_total; ++t)
                coeff[t] = std::sqrt(lambda[t] / n_total) * stream.complex_normal();
            if (n_total > 1)
                fft_inplace(coeff.data(), {n_total}, +1);
            for (int i = 0; i < n; ++i) {
                ax[i] = std::polar(1.0, kappa * ex * grid.coordinate(0, i));
                ay[i] = std::polar(1.0, kappa * ey * grid.coordinate(1, i));
            }
            for (int t = 0; t < n_times; ++t) {
                cplx c = norm * coeff[t];
                cplx* row = work.data() + std::size_t(t) * n_space;
                for (int i = 0; i < n; ++i) {
                    cplx ci = c * ax[i];
                    for (int k = 0; k < n; ++k)
                        row[std::size_t(i) * n + k] += ci * ay[k];
                }
            }
        }
    }

    for (int m = 0; m < n_times; ++m) {
        ComplexField f(grid);
        const cplx* row = work.data() + std::size_t(m) * n_space;
        for (std::size_t j = 0; j < n_space; ++j)
            f.values[j] = env[j] * row[j];
        f.time_index = m;
        out.fields.push_back(std::move(f));
    }
    return out;
}

double s_p(const SourceSpec& spec, const std::vector<Point>& xs, const std::vector<Point>& ys,
           const std::vector<double>& times)
{
    const int p = int(xs.size());
    if (p < 1 || p > 10)
        range_error("source moment order must lie in 1..10");
    if (ys.size() != xs.size() || times.size() != 2 * xs.size())
        config_error("source moment needs p points in X and Y and 2p times");
    if (spec.coherence == CoherenceKind::fully_coherent) {
        double prod = 1.0;
        for (int j = 0; j < p; ++j)
            prod *= envelope(spec, xs[j]) * envelope(spec, ys[j]);
        return prod;
    }
    std::vector<double> a(std::size_t(p) * p);
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            a[std::size_t(j) * p + l] =
                temporal_kernel(spec, times[j] - times[p + l]) * mutual_coherence(spec, xs[j], ys[l]);
    return permanent(a, p);
}

double s_p_intensity(const SourceSpec& spec, const std::vector<Point>& xs)
{
    return s_p(spec, xs, xs, std::vector<double>(2 * xs.size(), 0.0));
}

} // namespace pcb
