#include "validation.hpp"

#include "asymptotics.hpp"
#include "fft.hpp"
#include "montecarlo.hpp"
#include "permanent.hpp"
#include "propagator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pcb {

bool CriterionReport::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.counts || c.pass; });
}

namespace {

class Recorder {
  public:
    Recorder(CriterionReport& report, bool perturb) : report_(report), perturb_(perturb) {}

    void close(const std::string& name, double measured, double expected, double tol, bool counts = true)
    {
        double t = perturb_ ? -1.0 : tol;
        push({name, measured, expected, t, CheckRule::close, std::abs(measured - expected) <= t, counts});
    }
    void relative(const std::string& name, double measured, double expected, double rel)
    {
        close(name, measured, expected, rel * std::abs(expected));
    }
    void at_most(const std::string& name, double measured, double bound)
    {
        push({name, measured, bound, 0.0, CheckRule::at_most, !perturb_ && measured <= bound, true});
    }
    void at_least(const std::string& name, double measured, double bound)
    {
        push({name, measured, bound, 0.0, CheckRule::at_least, !perturb_ && measured >= bound, true});
    }
    void violations(const std::string& name, int count) { close(name, count, 0.0, 0.0); }

  private:
    void push(Check c) { report_.checks.push_back(std::move(c)); }
    CriterionReport& report_;
    bool perturb_;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> log_space(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i)
        v.push_back(a * std::pow(b / a, double(i) / (n - 1)));
    return v;
}

SourceSpec make_source(int dim, CoherenceKind kind, double theta)
{
    SourceSpec s;
    s.dim = dim;
    s.coherence = kind;
    s.r0 = 1.0;
    s.rw = 1.0;
    s.theta = theta;
    s.beta = 1.0;
    s.tau_s = 1.0;
    return s;
}

// ---- criterion 1 ----------------------------------------------------------

// (1/T^2) int int F(t1 - t2)^2 over [0,T]^2, inner range split at the kink.
double f_T_double_integral(const SourceSpec& src, double T)
{
    auto inner = [&](double t1) {
        auto g = [&](double t2) { return std::pow(temporal_kernel(src, t1 - t2), 2); };
        return integrate_adaptive(g, 0.0, t1, 1e-10, 1e-14 * src.tau_s).value +
               integrate_adaptive(g, t1, T, 1e-10, 1e-14 * src.tau_s).value;
    };
    return integrate_adaptive(inner, 0.0, T, 1e-10, 1e-14 * src.tau_s * T).value / (T * T);
}

void detector_factor(Recorder& rec)
{
    SourceSpec src = make_source(1, CoherenceKind::gaussian, 1.0);
    for (double ratio : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        double T = src.tau_s / ratio;
        double closed = f_T_exponential(src.tau_s, T);
        rec.close("F_T tau_s/T=" + fmt("%g", ratio) + " double integral", f_T_double_integral(src, T), closed, 1e-8);
        rec.close("F_T tau_s/T=" + fmt("%g", ratio) + " library", f_T(src, T), closed, 1e-8);
    }
}

// ---- criterion 2 ----------------------------------------------------------

void detector_moments(Recorder& rec)
{
    SourceSpec src = make_source(1, CoherenceKind::gaussian, 1.0);
    for (int p : {2, 3}) {
        rec.close("F_" + std::to_string(p) + " T/tau_s=1e-3", f_p(src, p, 1e-3 * src.tau_s).value,
                  f_p_limit_small_T(p), 1e-3);
        rec.close("F_" + std::to_string(p) + " T/tau_s=1e3", f_p(src, p, 1e3 * src.tau_s).value,
                  f_p_limit_large_T(p), 0.02 * f_p_limit_large_T(p));
    }
}

// ---- criteria 3 and 4 -----------------------------------------------------

AsymptoticModel planar_model(CoherenceKind kind, double theta)
{
    return {make_gaussian_medium(2, 1.0, 1.0), make_source(2, kind, theta), 1.0};
}

void ratio_closed_vs_quadrature(Recorder& rec, CoherenceKind kind, double rel)
{
    const double theta = 0.5;
    AsymptoticModel model = planar_model(kind, theta);
    const double sm2 = isotropic_sigma_m2(hessian_xi(model.medium));
    const Point origin{0.0, 0.0};
    const auto& s = model.source;
    for (double v : log_space(0.1, 100.0, 5)) {
        double z = std::cbrt(v / sm2);
        double mean = mean_intensity_quadrature(model, z, origin);
        double quad = chi_quadrature(model, z, origin) / (mean * mean);
        double closed = kind == CoherenceKind::gaussian ? chi_ratio_gaussian(z, sm2, s.r0, s.rw, s.theta, 2)
                                                        : chi_ratio_bessel(z, sm2, s.r0, s.rw, s.theta);
        rec.relative("ratio sigma_m2 z^3=" + fmt("%.4g", v), closed, quad, rel);
    }
    if (kind == CoherenceKind::gaussian) {
        double z = std::cbrt(1e6 / sm2);
        double tw = s.theta * s.theta * s.rw * s.rw;
        rec.close("ratio sigma_m2 z^3=1e6 vs saturation", chi_ratio_gaussian(z, sm2, s.r0, s.rw, s.theta, 2),
                  tw / (s.r0 * s.r0 + tw), 1e-4);
    }
}

// ---- criterion 5 ----------------------------------------------------------

void scintillation_bounds(Recorder& rec)
{
    const Point origin{0.0, 0.0};
    std::vector<double> ratios = log_space(0.01, 100.0, 10);
    std::vector<double> thetas;
    for (int i = 1; i <= 10; ++i)
        thetas.push_back(0.1 * i);
    std::vector<double> abscissa = log_space(0.1, 1000.0, 5);

    int out_of_range = 0, gt_mismatch = 0, t0_mismatch = 0, not_monotone = 0;
    double worst_saturation = 0.0;
    for (double theta : thetas) {
        AsymptoticModel model = planar_model(CoherenceKind::gaussian, theta);
        const double sm2 = isotropic_sigma_m2(hessian_xi(model.medium));
        for (double ratio : ratios) {
            const double T = model.source.tau_s / ratio;
            const double ft = f_T(model.source, T);
            double previous = -INFINITY;
            for (double v : abscissa) {
                double z = std::cbrt(v / sm2);
                double s = scint_T(model, BetaCase::beta_eq_1, z, origin, T);
                if (!(s >= 0.0 && s <= 3.0))
                    ++out_of_range;
                if (s < previous)
                    ++not_monotone;
                previous = s;
                if (scint_T(model, BetaCase::beta_gt_1, z, origin, T) != 1.0 + 2.0 * ft)
                    ++gt_mismatch;
                if (scint_T(model, BetaCase::theta_to_0, z, origin, T) != ft)
                    ++t0_mismatch;
            }
            double far = scint_T(model, BetaCase::beta_eq_1, std::cbrt(1e8 / sm2), origin, T);
            worst_saturation = std::max(worst_saturation, std::abs(far - scint_T_limit(model, T)));
        }
    }
    rec.violations("S_T outside [0,3]", out_of_range);
    rec.violations("beta>1 differs from 1+2F_T", gt_mismatch);
    rec.violations("theta->0 differs from F_T", t0_mismatch);
    rec.violations("beta=1 decreasing steps in z", not_monotone);
    rec.close("max |S_T(sigma_m2 z^3=1e8) - saturation|", worst_saturation, 0.0, 1e-3);
}

// ---- criterion 6 ----------------------------------------------------------

ExperimentConfig base_experiment(const SourceSpec& source, const MediumSpec& medium, int n, double dx, double z,
                                 int steps, int realizations, const ValidationOptions& opt)
{
    ExperimentConfig c;
    c.medium = medium;
    c.source = source;
    c.scaling.epsilon = 0.05;
    c.scaling.regime = RegimeKind::kinetic;
    c.scaling.k0 = 1.0;
    c.grid = make_centered_grid(1, n, dx);
    c.plan = make_plan(z, steps, {});
    c.n_realizations = realizations;
    c.master_seed = opt.seed;
    c.threads = opt.threads;
    return c;
}

void split_step_physics(Recorder& rec, const ValidationOptions& opt)
{
    SourceSpec coherent = make_source(1, CoherenceKind::fully_coherent, 1.0);
    ExperimentConfig c = base_experiment(coherent, make_gaussian_medium(1, 0.0, 1.0), 1024, 0.25, 1.0, 10, 2, opt);
    c.plan = make_plan(1.0, 10, {0.2, 0.4, 0.6, 0.8, 1.0});
    RandomStream src_stream(opt.seed, 0, StreamPurpose::source), med_stream(opt.seed, 0, StreamPurpose::medium);
    SourceRealization src = sample_source_field(c.source, c.grid, {0.0}, c.scaling.epsilon, src_stream);
    PlaneStack planes = propagate(src, c.medium, c.scaling, c.plan, med_stream);
    for (std::size_t k = 0; k < planes.size(); ++k) {
        const double z = c.plan.record_planes[k];
        double err = 0.0, peak = 0.0;
        const ComplexField& u = planes[k][0];
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            cplx exact = exact_mean_field(c, z, c.grid.point(i));
            err = std::max(err, std::abs(u.values[i] - exact));
            peak = std::max(peak, std::abs(exact));
        }
        rec.close("free Gaussian beam z=" + fmt("%.1f", z), err / peak, 0.0, 1e-10);
    }

    // Norm drift over 1000 steps through a random medium.
    const MediumSpec medium = make_gaussian_medium(1, 1.0, 1.0);
    SplitStepper stepper(medium, c.scaling, c.grid, 0.01);
    ComplexField u = src.fields[0];
    const double n0 = u.squared_norm();
    RandomStream stream(opt.seed, 1, StreamPurpose::medium);
    double drift = 0.0;
    for (int s = 0; s < 1000; ++s) {
        stepper.step(u, stream);
        drift = std::max(drift, std::abs(u.squared_norm() / n0 - 1.0));
    }
    rec.close("max relative norm drift, 1000 steps", drift, 0.0, 1e-12);

    rec.at_least("observed Strang order", strang_order(1024, 0.1, 1.0, 8), 1.8);
}

// ---- criterion 7 ----------------------------------------------------------

ExperimentConfig moment_experiment(CoherenceKind kind, const ValidationOptions& opt)
{
    SourceSpec src = make_source(1, kind, 0.5);
    ExperimentConfig c = base_experiment(src, make_gaussian_medium(1, 1.0, 1.0), 1024, 0.25, 1.0, 1, 2000, opt);
    int steps = int(std::ceil(1.0 / default_step(c.scaling, c.grid, c.medium) - 1e-9));
    c.plan = make_plan(1.0, steps, {});
    for (double r : {0.0, 8.0, 16.0})
        for (double x : {0.0, 8.0})
            c.probes.push_back({{r, 0.0}, {x, 0.0}, 0.0});
    fill_time_sampling(c);
    return c;
}

bool is_second_moment(const std::string& stat)
{
    return stat == "intensity" || stat == "mean_field_re" || stat == "mean_field_im" || stat == "coherence_re" ||
           stat == "coherence_im";
}

void moment_agreement(Recorder& rec, const ValidationOptions& opt)
{
    int total = 0, passed = 0;
    for (CoherenceKind kind : {CoherenceKind::fully_coherent, CoherenceKind::gaussian}) {
        const std::string tag = kind == CoherenceKind::fully_coherent ? "coherent" : "schell";
        ExperimentConfig c = moment_experiment(kind, opt);
        ExperimentResult res = run_experiment(c);
        for (const auto& row : res.rows) {
            if (!is_second_moment(row.stat))
                continue;
            ++total;
            bool ok = std::abs(row.z_score) < 3.0;
            passed += ok ? 1 : 0;
            std::string name = tag + " r=" + fmt("%g", row.probe.r[0]) + " x=" + fmt("%g", row.probe.x[0]) + " " +
                               row.stat;
            rec.close(name, row.mc_mean, row.asymptotic, std::max(3.0 * row.mc_stderr, 1e-12), false);
        }
        if (kind != CoherenceKind::fully_coherent)
            continue;
        // Decay rate of the mean field at the beam centre.
        Estimate re, im;
        for (const auto& row : res.rows) {
            if (row.probe.r[0] != 0.0 || row.probe.x[0] != 0.0)
                continue;
            if (row.stat == "mean_field_re")
                re = {row.mc_mean, row.mc_stderr, row.n_realizations};
            if (row.stat == "mean_field_im")
                im = {row.mc_mean, row.mc_stderr, row.n_realizations};
        }
        ExperimentConfig free = c;
        free.medium = make_gaussian_medium(1, 0.0, 1.0);
        const double z = res.z_final;
        const double a = std::hypot(re.mean.real(), im.mean.real());
        const double a_se = std::hypot(re.mean.real() * re.std_error, im.mean.real() * im.std_error) / a;
        const double a_free = std::abs(exact_mean_field(free, z, {0.0, 0.0}));
        const double rate = -std::log(a / a_free) / z;
        const double rate_exact = -std::log(std::abs(exact_mean_field(c, z, {0.0, 0.0})) / a_free) / z;
        const double rate_se = a_se / (a * z);
        ++total;
        bool ok = std::abs(rate - rate_exact) < 3.0 * rate_se;
        passed += ok ? 1 : 0;
        rec.close("coherent mean field decay rate", rate, rate_exact, 3.0 * rate_se, false);
    }
    rec.at_least("share of probes within 3 standard errors", double(passed) / total, 0.95);
}

// ---- criterion 8 ----------------------------------------------------------

struct ScintSamples {
    std::vector<double> instantaneous;
    std::vector<double> averaged;
};

ScintSamples centre_intensities(const ExperimentConfig& c)
{
    const std::size_t centre = c.grid.nearest({0.0, 0.0});
    auto rows = run_realizations(c, [&](const PlaneStack& planes, const std::vector<double>&) {
        const auto& stack = planes.back();
        std::vector<double> series(stack.size());
        for (std::size_t k = 0; k < stack.size(); ++k)
            series[k] = std::norm(stack[k].values[centre]);
        return std::vector<double>{series[0], time_averaged_intensity(series, c.dt, c.detector_T)};
    });
    ScintSamples out;
    for (const auto& r : rows) {
        out.instantaneous.push_back(r[0]);
        out.averaged.push_back(r[1]);
    }
    return out;
}

ExperimentConfig averaging_experiment(double T, int realizations, const ValidationOptions& opt)
{
    SourceSpec src = make_source(1, CoherenceKind::gaussian, 0.1);
    ExperimentConfig c =
        base_experiment(src, make_gaussian_medium(1, 1.0, 1.0), 1024, 0.25, 1.0, 40, realizations, opt);
    c.detector_T = T;
    c.probes.push_back({});
    fill_time_sampling(c);
    return c;
}

void scintillation_phenomenology(Recorder& rec, const ValidationOptions& opt)
{
    {
        SourceSpec src = make_source(1, CoherenceKind::fully_coherent, 1.0);
        ExperimentConfig c =
            base_experiment(src, make_gaussian_medium(1, 1.0, 1.0), 2048, 0.5, 8.0, 160, 2000, opt);
        c.probes.push_back({});
        fill_time_sampling(c);
        ExperimentResult res = run_experiment(c);
        for (const auto& row : res.rows)
            if (row.stat == "scint_inst") {
                double ratio = row.mc_mean / row.asymptotic;
                rec.close("(a) coherent S_inst / limit at z=8", ratio, 1.0, 0.2);
                rec.close("(a) coherent S_inst", row.mc_mean, row.asymptotic, 3.0 * row.mc_stderr, false);
            }
    }
    {
        ExperimentConfig c = averaging_experiment(20.0, 400, opt);
        ScintSamples s = centre_intensities(c);
        Estimate diff = scintillation_difference(s.instantaneous, s.averaged);
        rec.at_least("(b) theta=0.1 T=20 tau_s: (S_inst - S_T) / stderr", diff.mean.real() / diff.std_error, 3.0);
    }
    {
        ExperimentConfig c = averaging_experiment(0.1, 400, opt);
        ScintSamples s = centre_intensities(c);
        Estimate inst = scintillation_estimate(s.instantaneous);
        Estimate avg = scintillation_estimate(s.averaged);
        double bar = 3.0 * std::hypot(inst.std_error, avg.std_error);
        rec.close("(c) theta=0.1 T=0.1 tau_s: S_T vs S_inst", avg.mean.real(), inst.mean.real(), bar);
    }
}

// ---- criterion 9 ----------------------------------------------------------

void pairing_oracles(Recorder& rec, const ValidationOptions& opt)
{
    RandomStream stream(opt.seed, 9, StreamPurpose::test);
    auto draw = [&](std::size_t n) {
        std::vector<cplx> v(n);
        for (auto& x : v)
            x = stream.complex_normal();
        return v;
    };
    double worst_f = 0.0, worst_g = 0.0, worst_perm = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        for (int p = 1; p <= 3; ++p) {
            for (int q = 1; q <= 3; ++q) {
                auto h = draw(p), hp = draw(q), g = draw(std::size_t(p) * q);
                cplx a = functional_F(h, hp, g), b = functional_F_bruteforce(h, hp, g);
                worst_f = std::max(worst_f, std::abs(a - b) / std::max(1.0, std::abs(b)));
            }
            auto h = draw(std::size_t(p) * p), g = draw(std::size_t(p) * p);
            cplx a = functional_G(h, g, p), b = functional_G_bruteforce(h, g, p);
            worst_g = std::max(worst_g, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
        for (int p = 1; p <= 5; ++p) {
            std::vector<double> m(std::size_t(p) * p);
            for (auto& x : m)
                x = stream.normal();
            double a = permanent(m, p), b = permanent_naive(m, p);
            worst_perm = std::max(worst_perm, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
    }
    rec.close("max |F - enumeration|, p,q <= 3", worst_f, 0.0, 1e-12);
    rec.close("max |G - enumeration|, p <= 3", worst_g, 0.0, 1e-12);
    rec.close("max |Ryser - naive|, p <= 5", worst_perm, 0.0, 1e-12);
}

// ---- criterion 10 ---------------------------------------------------------

void second_intensity_moment(Recorder& rec)
{
    struct Case {
        double z;
        Point r;
        double theta;
    };
    const Case cases[] = {{0.5, {0.0, 0.0}, 0.5},
                          {1.0, {0.3, 0.0}, 0.5},
                          {2.0, {0.0, 0.5}, 0.3},
                          {1.5, {0.2, 0.2}, 0.8},
                          {3.0, {0.5, -0.4}, 1.0}};
    for (const auto& k : cases) {
        AsymptoticModel model = planar_model(CoherenceKind::gaussian, k.theta);
        double m2 = intensity_moment(model, BetaCase::beta_eq_1, k.z, k.r, 2);
        double m1 = mean_intensity(model, LimitRegime::diffusive, BetaCase::beta_eq_1, k.z, k.r);
        double rhs = 2.0 * (m1 * m1 + chi(model, k.z, k.r));
        rec.relative("E[I^2] z=" + fmt("%g", k.z) + " theta=" + fmt("%g", k.theta), m2, rhs, 1e-8);
    }
}

struct CriterionInfo {
    const char* title;
    double budget;
};

CriterionInfo info(int id)
{
    switch (id) {
    case 1:
        return {"detector factor F_T: closed form vs double integral", 1.0};
    case 2:
        return {"detector moments F_p: small and large T limits", 30.0};
    case 3:
        return {"Gaussian coherence ratio: closed form vs quadrature", 60.0};
    case 4:
        return {"Bessel coherence ratio: closed form vs quadrature", 120.0};
    case 5:
        return {"scintillation bounds, branches, monotonicity, saturation", 120.0};
    case 6:
        return {"split-step: free beam, norm, Strang order", 60.0};
    case 7:
        return {"Monte Carlo first and second moments vs exact laws", 600.0};
    case 8:
        return {"Monte Carlo scintillation phenomenology", 1800.0};
    case 9:
        return {"pairing functionals and permanent oracles", 10.0};
    case 10:
        return {"second intensity moment identity", 60.0};
    }
    config_error("criterion id must lie in 1..10");
}

} // namespace

cplx functional_F_bruteforce(const std::vector<cplx>& h, const std::vector<cplx>& h_prime,
                             const std::vector<cplx>& g)
{
    const int p = int(h.size()), q = int(h_prime.size());
    const int edges = p * q;
    cplx total = 0.0;
    for (unsigned mask = 0; mask < (1u << edges); ++mask) {
        std::vector<int> row(p, 0), col(q, 0);
        bool matching = true;
        cplx prod = 1.0;
        for (int e = 0; e < edges && matching; ++e) {
            if (!(mask >> e & 1u))
                continue;
            int j = e / q, l = e % q;
            matching = ++row[j] == 1 && ++col[l] == 1;
            prod *= g[e] - h[j] * h_prime[l];
        }
        if (!matching)
            continue;
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

cplx functional_G_bruteforce(const std::vector<cplx>& h, const std::vector<cplx>& g, int p)
{
    const int edges = p * p;
    cplx total = 0.0;
    for (unsigned mask = 0; mask < (1u << edges); ++mask) {
        std::vector<int> row(p, 0), col(p, 0);
        bool matching = true;
        cplx prod = 1.0;
        for (int e = 0; e < edges && matching; ++e) {
            if (!(mask >> e & 1u))
                continue;
            int j = e / p, l = e % p;
            matching = ++row[j] == 1 && ++col[l] == 1;
            prod *= g[e] - h[e];
        }
        if (!matching)
            continue;
        std::vector<int> rows, cols;
        for (int j = 0; j < p; ++j) {
            if (!row[j])
                rows.push_back(j);
            if (!col[j])
                cols.push_back(j);
        }
        // Permanent of the unpaired block by direct permutation sum.
        cplx perm = 0.0;
        std::vector<int> sigma(cols);
        do {
            cplx term = 1.0;
            for (std::size_t i = 0; i < rows.size(); ++i)
                term *= h[std::size_t(rows[i]) * p + sigma[i]];
            perm += term;
        } while (std::next_permutation(sigma.begin(), sigma.end()));
        total += prod * perm;
    }
    return total;
}

double strang_order(int n, double dx, double z, int coarse_steps)
{
    RegimeScaling scaling;
    scaling.epsilon = 0.05;
    scaling.regime = RegimeKind::kinetic;
    const Grid grid = make_centered_grid(1, n, dx);
    const MediumSpec still = make_gaussian_medium(1, 0.0, 1.0);

    // The potential must be periodic on the box, a jump at the seam costs order.
    ComplexField u0(grid);
    std::vector<double> potential(grid.size());
    const double wave = 2.0 * std::numbers::pi * 3.0 / grid.extent();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid.point(i)[0];
        u0.values[i] = std::exp(-x * x / 4.0);
        potential[i] = 4.0 * std::cos(wave * x);
    }

    auto solve = [&](int steps) {
        const double dz = z / steps;
        SplitStepper stepper(still, scaling, grid, dz);
        std::vector<double> screen(potential);
        for (auto& v : screen)
            v *= dz;
        ComplexField u = u0;
        for (int s = 0; s < steps; ++s) {
            ComplexField spec = forward_spectrum(u);
            stepper.free_spectral(spec.values, 0.5);
            u = inverse_spectrum(spec);
            stepper.apply_screen(u.values, screen);
            spec = forward_spectrum(u);
            stepper.free_spectral(spec.values, 0.5);
            u = inverse_spectrum(spec);
        }
        return u;
    };
    auto distance = [&](const ComplexField& a, const ComplexField& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i)
            s += std::norm(a.values[i] - b.values[i]);
        return std::sqrt(s * grid.dx);
    };

    ComplexField reference = solve(coarse_steps * 256);
    double e1 = distance(solve(coarse_steps), reference);
    double e2 = distance(solve(2 * coarse_steps), reference);
    double e3 = distance(solve(4 * coarse_steps), reference);
    return 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
}

CriterionReport run_criterion(int id, const ValidationOptions& options)
{
    CriterionInfo ci = info(id);
    CriterionReport report;
    report.id = id;
    report.title = ci.title;
    report.budget_seconds = ci.budget;
    Recorder rec(report, options.perturb);
    auto start = std::chrono::steady_clock::now();
    switch (id) {
    case 1:
        detector_factor(rec);
        break;
    case 2:
        detector_moments(rec);
        break;
    case 3:
        ratio_closed_vs_quadrature(rec, CoherenceKind::gaussian, 1e-6);
        break;
    case 4:
        ratio_closed_vs_quadrature(rec, CoherenceKind::bessel, 1e-5);
        break;
    case 5:
        scintillation_bounds(rec);
        break;
    case 6:
        split_step_physics(rec, options);
        break;
    case 7:
        moment_agreement(rec, options);
        break;
    case 8:
        scintillation_phenomenology(rec, options);
        break;
    case 9:
        pairing_oracles(rec, options);
        break;
    case 10:
        second_intensity_moment(rec);
        break;
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.at_most("runtime seconds", report.seconds, report.budget_seconds);
    return report;
}

std::vector<int> suite_criteria(const std::string& suite)
{
    if (suite == "analytic")
        return {1, 2, 3, 4, 5, 9, 10};
    if (suite == "mc")
        return {6, 7, 8};
    if (suite == "all") {
        std::vector<int> all(10);
        std::iota(all.begin(), all.end(), 1);
        return all;
    }
    config_error("validation suite must be 'analytic', 'mc' or 'all'");
}

std::string report_table(const std::vector<CriterionReport>& reports)
{
    std::ostringstream os;
    char line[512];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "criterion %2d  %s  %s  (%.2f s, budget %.0f s)\n", r.id,
                      r.pass() ? "PASS" : "FAIL", r.title.c_str(), r.seconds, r.budget_seconds);
        os << line;
        for (const auto& c : r.checks) {
            const char* rule = c.rule == CheckRule::close ? "+-" : c.rule == CheckRule::at_most ? "<=" : ">=";
            std::snprintf(line, sizeof line, "    %-4s %-52s measured %-13.6g %s %-13.6g", c.pass ? "ok" : "FAIL",
                          c.name.c_str(), c.measured, rule, c.expected);
            os << line;
            if (c.rule == CheckRule::close) {
                std::snprintf(line, sizeof line, " tol %.3g", c.tolerance);
                os << line;
            }
            os << (c.counts ? "" : "  [info]") << '\n';
        }
    }
    int failed = int(std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.pass(); }));
    os << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return os.str();
}

} // namespace pcb
