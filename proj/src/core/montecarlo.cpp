#include "montecarlo.hpp"

#include "quadrature.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace pcb {

Estimate make_estimate(const std::vector<double>& samples)
{
    const std::size_t n = samples.size();
    if (n < 2)
        config_error("an estimate needs at least 2 samples");
    Estimate e;
    e.n_samples = int(n);
    double mean = pairwise_sum(samples.data(), n) / double(n);
    e.mean = mean;
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) {
        e.mean = *lo;
        return e;
    }
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i)
        dev[i] = (samples[i] - mean) * (samples[i] - mean);
    double var = pairwise_sum(dev.data(), n) / double(n - 1);
    e.std_error = std::sqrt(var / double(n));
    return e;
}

Estimate make_estimate(const std::vector<cplx>& samples)
{
    const std::size_t n = samples.size();
    if (n < 2)
        config_error("an estimate needs at least 2 samples");
    Estimate e;
    e.n_samples = int(n);
    cplx mean = pairwise_sum(samples.data(), n) / double(n);
    if (std::all_of(samples.begin(), samples.end(), [&](const cplx& v) { return v == samples.front(); })) {
        e.mean = samples.front();
        return e;
    }
    e.mean = mean;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i)
        dev[i] = std::norm(samples[i] - mean);
    e.std_error = std::sqrt(pairwise_sum(dev.data(), n) / double(n - 1) / double(n));
    return e;
}

void fill_time_sampling(ExperimentConfig& c)
{
    if (c.detector_T < 0.0)
        config_error("detector_T must be nonnegative");
    double latest = 0.0;
    for (const auto& p : c.probes)
        latest = std::max(latest, p.t);
    const double span = latest + c.detector_T;
    if (c.dt <= 0.0) {
        if (c.detector_T > 0.0) {
            int steps = int(std::ceil(c.detector_T / (c.source.tau_s / 4.0) - 1e-9));
            c.dt = c.detector_T / steps;
        } else {
            c.dt = c.source.tau_s / 4.0;
        }
    }
    if (span == 0.0)
        c.n_time_samples = std::max(c.n_time_samples, 1);
    else if (c.n_time_samples < 2)
        c.n_time_samples = int(std::ceil(span / c.dt - 1e-9)) + 1;
}

void validate_experiment(const ExperimentConfig& c)
{
    if (c.n_realizations < 2)
        config_error("n_realizations must be at least 2");
    validate_source(c.source);
    validate_scaling(c.scaling);
    if (c.grid.dim != c.source.dim || c.medium.dim != c.source.dim)
        config_error("grid, medium and source dimensions differ");
    if (c.n_time_samples < 1)
        config_error("n_time_samples must be at least 1");
    if (c.n_time_samples > 1 && !(c.dt > 0.0))
        config_error("dt must be positive");
    if (c.source.coherence != CoherenceKind::fully_coherent && c.n_time_samples > 1 &&
        c.dt > c.source.tau_s / 4.0 * (1.0 + 1e-12))
        config_error("dt must not exceed tau_s / 4");
    if (c.detector_T > 0.0 && (c.n_time_samples - 1) * c.dt < c.detector_T * (1.0 - 1e-12))
        config_error("time samples do not cover [0, detector_T]");
    if (c.probes.empty())
        config_error("experiment needs at least one probe");
    for (const auto& p : c.probes) {
        c.grid.nearest(p.r + 0.5 * p.x);
        c.grid.nearest(p.r - 0.5 * p.x);
        double end = p.t + c.detector_T;
        if (p.t < 0.0 || end > (c.n_time_samples - 1) * c.dt * (1.0 + 1e-12) + 1e-300)
            config_error("probe time window lies outside the sampled times");
    }
}

std::vector<double> sample_times(const ExperimentConfig& c)
{
    std::vector<double> t(c.n_time_samples);
    for (int i = 0; i < c.n_time_samples; ++i)
        t[i] = i * c.dt;
    return t;
}

double time_averaged_intensity(const std::vector<double>& intensity, double dt, double T, std::size_t start)
{
    if (!(T > 0.0) || !(dt > 0.0))
        config_error("time averaging needs positive T and dt");
    double steps = T / dt;
    std::size_t full = std::size_t(std::floor(steps + 1e-9));
    double frac = steps - double(full);
    if (frac < 1e-9)
        frac = 0.0;
    std::size_t needed = start + full + (frac > 0.0 ? 1 : 0);
    if (needed >= intensity.size())
        config_error("time stack too short for the detector window");
    double sum = 0.0;
    for (std::size_t k = 0; k < full; ++k)
        sum += 0.5 * dt * (intensity[start + k] + intensity[start + k + 1]);
    if (frac > 0.0) {
        double a = intensity[start + full];
        double b = intensity[start + full + 1];
        double end = a + frac * (b - a);
        sum += 0.5 * frac * dt * (a + end);
    }
    return sum / T;
}

double scintillation_index(const std::vector<double>& samples)
{
    const std::size_t n = samples.size();
    if (n < 2)
        config_error("scintillation index needs at least 2 samples");
    double mean = pairwise_sum(samples.data(), n) / double(n);
    if (!(mean > 0.0))
        numeric_error("degenerate intensity: mean is not positive");
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i)
        dev[i] = (samples[i] - mean) * (samples[i] - mean);
    double var = pairwise_sum(dev.data(), n) / double(n - 1);
    return var / (mean * mean);
}

namespace {

template <class Stat>
Estimate jackknife(std::size_t n, const Stat& stat)
{
    Estimate e;
    e.n_samples = int(n);
    e.mean = stat(std::size_t(0), std::size_t(0));
    const std::size_t blocks = std::min<std::size_t>(n, 50);
    if (blocks < 2)
        return e;
    std::vector<double> values(blocks);
    for (std::size_t b = 0; b < blocks; ++b)
        values[b] = stat(b * n / blocks, (b + 1) * n / blocks);
    double m = pairwise_sum(values.data(), blocks) / double(blocks);
    double s = 0.0;
    for (double v : values)
        s += (v - m) * (v - m);
    e.std_error = std::sqrt(double(blocks - 1) / double(blocks) * s);
    return e;
}

std::vector<double> without(const std::vector<double>& v, std::size_t lo, std::size_t hi)
{
    std::vector<double> out;
    out.reserve(v.size() - (hi - lo));
    out.insert(out.end(), v.begin(), v.begin() + std::ptrdiff_t(lo));
    out.insert(out.end(), v.begin() + std::ptrdiff_t(hi), v.end());
    return out;
}

} // namespace

Estimate scintillation_estimate(const std::vector<double>& samples)
{
    return jackknife(samples.size(), [&](std::size_t lo, std::size_t hi) {
        return scintillation_index(without(samples, lo, hi));
    });
}

Estimate scintillation_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        config_error("paired samples differ in length");
    return jackknife(a.size(), [&](std::size_t lo, std::size_t hi) {
        return scintillation_index(without(a, lo, hi)) - scintillation_index(without(b, lo, hi));
    });
}

std::vector<std::vector<double>> run_realizations(const ExperimentConfig& config, const Observer& observe)
{
    validate_experiment(config);
    const std::vector<double> times = sample_times(config);
    const int n = config.n_realizations;
    std::vector<std::vector<double>> rows(n);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                RandomStream source_stream(config.master_seed, std::uint64_t(i), StreamPurpose::source);
                RandomStream medium_stream(config.master_seed, std::uint64_t(i), StreamPurpose::medium);
                SourceRealization src =
                    sample_source_field(config.source, config.grid, times, config.scaling.epsilon, source_stream);
                PlaneStack planes = propagate(src, config.medium, config.scaling, config.plan, medium_stream);
                rows[i] = observe(planes, times);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    int threads = config.threads > 0 ? config.threads : int(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return rows;
}

namespace {

std::size_t time_index(const ExperimentConfig& c, double t)
{
    if (c.n_time_samples == 1) {
        if (std::abs(t) > 1e-12)
            config_error("probe time needs more than one time sample");
        return 0;
    }
    double k = t / c.dt;
    double r = std::round(k);
    if (std::abs(k - r) > 1e-9 || r < 0.0 || r >= c.n_time_samples)
        config_error("probe time does not fall on a sampled time");
    return std::size_t(r);
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j)
{
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = rows[i][j];
    return out;
}

} // namespace

std::vector<Estimate> estimate_intensity(const ExperimentConfig& config)
{
    std::vector<std::size_t> idx, tix;
    for (const auto& p : config.probes) {
        idx.push_back(config.grid.nearest(p.r));
        tix.push_back(time_index(config, p.t));
    }
    auto rows = run_realizations(config, [&](const PlaneStack& planes, const std::vector<double>&) {
        std::vector<double> out;
        for (std::size_t k = 0; k < idx.size(); ++k)
            out.push_back(std::norm(planes.back()[tix[k]].values[idx[k]]));
        return out;
    });
    std::vector<Estimate> out;
    for (std::size_t k = 0; k < idx.size(); ++k)
        out.push_back(make_estimate(column(rows, k)));
    return out;
}

Estimate estimate_field_moment(const ExperimentConfig& config, const std::vector<bool>& conjugate,
                               const std::vector<Point>& points, const std::vector<double>& times)
{
    if (conjugate.size() > 8)
        config_error("field moment pattern longer than 8");
    if (conjugate.size() != points.size() || points.size() != times.size())
        config_error("field moment pattern, points and times differ in length");
    std::vector<std::size_t> idx, tix;
    for (std::size_t j = 0; j < points.size(); ++j) {
        idx.push_back(config.grid.nearest(points[j]));
        tix.push_back(time_index(config, times[j]));
    }
    auto rows = run_realizations(config, [&](const PlaneStack& planes, const std::vector<double>&) {
        cplx prod = 1.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            cplx u = planes.back()[tix[j]].values[idx[j]];
            prod *= conjugate[j] ? std::conj(u) : u;
        }
        return std::vector<double>{prod.real(), prod.imag()};
    });
    std::vector<cplx> samples(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        samples[i] = {rows[i][0], rows[i][1]};
    return make_estimate(samples);
}

cplx exact_mean_field(const ExperimentConfig& c, double z, const Point& x)
{
    if (c.source.coherence != CoherenceKind::fully_coherent)
        return 0.0;
    const double e = eta(c.scaling);
    const double k0 = c.scaling.k0, eps = c.scaling.epsilon;
    const int d = c.source.dim;
    // exp(-a |x|^2) under exp(-i eta z |k|^2 / (2 k0 eps)).
    double a = std::pow(eps, 2.0 * c.source.beta) / (c.source.r0 * c.source.r0);
    cplx denom = 1.0 + cplx(0.0, 2.0 * a * e * z / (k0 * eps));
    double x2 = d == 1 ? x[0] * x[0] : norm2(x);
    cplx free = std::pow(1.0 / denom, 0.5 * d) * std::exp(-a * x2 / denom);
    return free * std::exp(-k0 * k0 * c.medium.sigma_R2 * z / (8.0 * e * e));
}

cplx exact_coherence(const ExperimentConfig& c, double z, const Point& x, const Point& y)
{
    AsymptoticModel model{c.medium, c.source, c.scaling.k0};
    return exact_second_moment(model, c.scaling.epsilon, eta(c.scaling), z, x, y);
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    validate_experiment(config);
    const Grid& g = config.grid;
    const bool averaged = config.detector_T > 0.0;
    struct ProbeIndex {
        std::size_t mid, plus, minus, t;
    };
    std::vector<ProbeIndex> pix;
    for (const auto& p : config.probes)
        pix.push_back({g.nearest(p.r), g.nearest(p.r + 0.5 * p.x), g.nearest(p.r - 0.5 * p.x), time_index(config, p.t)});
    const double dt = config.dt;
    const double T = config.detector_T;

    // Per probe: I, Re u, Im u, Re C, Im C, I_T
    constexpr std::size_t stride = 6;
    auto rows = run_realizations(config, [&](const PlaneStack& planes, const std::vector<double>&) {
        const auto& stack = planes.back();
        std::vector<double> out;
        for (const auto& p : pix) {
            cplx u = stack[p.t].values[p.mid];
            cplx c = stack[p.t].values[p.plus] * std::conj(stack[p.t].values[p.minus]);
            double it = 0.0;
            if (averaged) {
                std::vector<double> series(stack.size());
                for (std::size_t k = 0; k < stack.size(); ++k)
                    series[k] = std::norm(stack[k].values[p.mid]);
                it = time_averaged_intensity(series, dt, T, p.t);
            }
            out.insert(out.end(), {std::norm(u), u.real(), u.imag(), c.real(), c.imag(), it});
        }
        return out;
    });

    ExperimentResult result;
    result.z_final = config.plan.record_planes.back();
    result.eta = eta(config.scaling);
    const double z = result.z_final;
    const double scale = std::pow(config.scaling.epsilon, config.source.beta);
    AsymptoticModel model{config.medium, config.source, config.scaling.k0};
    const int n = config.n_realizations;
    const double nan = std::nan("");

    auto push = [&](const ProbeSpec& probe, const std::string& stat, const Estimate& e, double ref) {
        ResultRow row;
        row.probe = probe;
        row.stat = stat;
        row.mc_mean = e.mean.real();
        row.mc_stderr = e.std_error;
        row.asymptotic = ref;
        row.n_realizations = n;
        if (std::isnan(ref))
            row.z_score = nan;
        else if (e.std_error > 0.0)
            row.z_score = (row.mc_mean - ref) / e.std_error;
        else
            row.z_score = std::abs(row.mc_mean - ref) <= 1e-12 * std::max(1.0, std::abs(ref)) ? 0.0
                                                                                             : (row.mc_mean - ref) * INFINITY;
        result.rows.push_back(row);
    };

    int second_total = 0, second_pass = 0;
    for (std::size_t k = 0; k < config.probes.size(); ++k) {
        const ProbeSpec& probe = config.probes[k];
        const auto& p = pix[k];
        Point mid = g.point(p.mid), plus = g.point(p.plus), minus = g.point(p.minus);
        std::vector<double> intensity = column(rows, k * stride);
        cplx mean_field = exact_mean_field(config, z, mid);
        cplx coh = exact_coherence(config, z, plus, minus);
        double ref_i = exact_coherence(config, z, mid, mid).real();

        std::size_t before = result.rows.size();
        push(probe, "intensity", make_estimate(intensity), ref_i);
        push(probe, "mean_field_re", make_estimate(column(rows, k * stride + 1)), mean_field.real());
        push(probe, "mean_field_im", make_estimate(column(rows, k * stride + 2)), mean_field.imag());
        push(probe, "coherence_re", make_estimate(column(rows, k * stride + 3)), coh.real());
        push(probe, "coherence_im", make_estimate(column(rows, k * stride + 4)), coh.imag());
        for (std::size_t j = before; j < result.rows.size(); ++j) {
            ++second_total;
            if (std::abs(result.rows[j].z_score) < 3.0)
                ++second_pass;
        }

        // Limit references for the scintillation rows, at the scaled midpoint.
        KineticScintillation limit{nan, nan, nan};
        if (config.scaling.regime != RegimeKind::custom) {
            LimitRegime regime =
                config.scaling.regime == RegimeKind::kinetic ? LimitRegime::kinetic : LimitRegime::diffusive;
            BetaCase bc = config.source.beta > 1.0 ? BetaCase::beta_gt_1 : BetaCase::beta_eq_1;
            try {
                limit = limit_scintillation(model, regime, bc, z, scale * mid, averaged ? T : config.source.tau_s);
            } catch (const Error&) {
                limit = {nan, nan, nan};
            }
        }
        push(probe, "scint_inst", scintillation_estimate(intensity), limit.instantaneous);
        if (averaged) {
            std::vector<double> it = column(rows, k * stride + 5);
            push(probe, "intensity_T", make_estimate(it), ref_i);
            push(probe, "scint_T", scintillation_estimate(it), limit.time_averaged);
        }
    }
    result.second_moment_pass_fraction = second_total > 0 ? double(second_pass) / second_total : 1.0;
    return result;
}

} // namespace pcb
