#include <doctest.h>

#include "montecarlo.hpp"

#include <cmath>
#include <random>

using namespace pcb;

namespace {

ExperimentConfig small_experiment(CoherenceKind kind, double sigma_R2, int realizations)
{
    ExperimentConfig c;
    c.medium = make_gaussian_medium(1, sigma_R2, 1.0);
    c.source.dim = 1;
    c.source.coherence = kind;
    c.source.theta = 0.5;
    c.scaling.epsilon = 0.05;
    c.grid = make_centered_grid(1, 1024, 0.25);
    c.plan = make_plan(0.5, 4, {});
    c.n_realizations = realizations;
    c.master_seed = 7;
    c.threads = 1;
    c.probes = {{{0.0, 0.0}, {0.0, 0.0}, 0.0}, {{2.0, 0.0}, {1.0, 0.0}, 0.0}};
    fill_time_sampling(c);
    return c;
}

const ResultRow& row(const ExperimentResult& r, std::size_t probe_index, const std::string& stat,
                     const ExperimentConfig& c)
{
    const ProbeSpec& p = c.probes[probe_index];
    for (const auto& x : r.rows)
        if (x.stat == stat && x.probe.r == p.r && x.probe.x == p.x)
            return x;
    throw std::runtime_error("missing row " + stat);
}

} // namespace

TEST_SUITE("montecarlo")
{
    TEST_CASE("estimates")
    {
        Estimate e = make_estimate(std::vector<double>{1.0, 2.0, 3.0, 4.0});
        CHECK(e.mean.real() == 2.5);
        CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
        CHECK(e.n_samples == 4);
        Estimate z = make_estimate(std::vector<cplx>{{1.0, 1.0}, {-1.0, -1.0}});
        CHECK(std::abs(z.mean) == 0.0);
        CHECK(z.std_error == doctest::Approx(std::sqrt(4.0 / 1.0 / 2.0)));
        CHECK_THROWS_AS(make_estimate(std::vector<double>{1.0}), Error);
    }

    TEST_CASE("time averaging")
    {
        CHECK(time_averaged_intensity(std::vector<double>(11, 3.0), 0.1, 1.0) == doctest::Approx(3.0));
        CHECK(time_averaged_intensity({1.0, 3.0}, 1.0, 1.0) == doctest::Approx(2.0));
        // a partial last interval interpolates linearly: mean of 1 + 2s on [0, 0.5]
        CHECK(time_averaged_intensity({1.0, 3.0}, 1.0, 0.5) == doctest::Approx(1.5));
        const int n = 2001;
        const double dt = 2.0 * M_PI / (n - 1);
        std::vector<double> s(n);
        for (int i = 0; i < n; ++i)
            s[i] = 1.0 + std::sin(i * dt);
        CHECK(time_averaged_intensity(s, dt, 2.0 * M_PI) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(time_averaged_intensity(s, dt, M_PI) == doctest::Approx(1.0 + 2.0 / M_PI).epsilon(1e-6));
        CHECK_THROWS_AS(time_averaged_intensity(s, dt, 10.0), Error);
        CHECK_THROWS_AS(time_averaged_intensity(s, 0.0, 1.0), Error);
    }

    TEST_CASE("scintillation index")
    {
        CHECK(scintillation_index(std::vector<double>(10, 2.0)) == 0.0);
        std::mt19937_64 rng(11);
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> a(100000), b(100000), prod(100000);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = expo(rng);
            b[i] = expo(rng);
            prod[i] = a[i] * b[i];
        }
        Estimate s = scintillation_estimate(a);
        CHECK(s.mean.real() == doctest::Approx(1.0).epsilon(0.03));
        CHECK(s.std_error > 0.0);
        CHECK(std::abs(s.mean.real() - 1.0) < 4.0 * s.std_error);
        CHECK(scintillation_index(prod) == doctest::Approx(3.0).epsilon(0.1));
        Estimate d = scintillation_difference(prod, a);
        CHECK(d.mean.real() == doctest::Approx(2.0).epsilon(0.1));
        CHECK_THROWS_AS(scintillation_index({0.0, 0.0, 0.0}), Error);
        CHECK_THROWS_AS(scintillation_difference(a, {1.0, 2.0}), Error);
    }

    TEST_CASE("configuration checks")
    {
        ExperimentConfig c = small_experiment(CoherenceKind::gaussian, 1.0, 4);
        CHECK_NOTHROW(validate_experiment(c));
        ExperimentConfig bad = c;
        bad.n_realizations = 0;
        CHECK_THROWS_WITH_AS(validate_experiment(bad), "n_realizations must be at least 2", Error);
        bad = c;
        bad.probes.clear();
        CHECK_THROWS_AS(validate_experiment(bad), Error);
        bad = c;
        bad.detector_T = 1.0;
        bad.n_time_samples = 2;
        bad.dt = 1.0;
        CHECK_THROWS_WITH_AS(validate_experiment(bad), "dt must not exceed tau_s / 4", Error);
    }

    TEST_CASE("time sampling")
    {
        ExperimentConfig c = small_experiment(CoherenceKind::gaussian, 1.0, 4);
        c.detector_T = 1.1;
        c.dt = 0.0;
        c.n_time_samples = 1;
        fill_time_sampling(c);
        CHECK(c.dt <= c.source.tau_s / 4.0);
        CHECK((c.n_time_samples - 1) * c.dt >= 1.1 - 1e-12);
        std::vector<double> t = sample_times(c);
        CHECK(t.front() == 0.0);
        CHECK(t[1] == doctest::Approx(c.dt));
    }

    TEST_CASE("seed determinism")
    {
        ExperimentConfig c = small_experiment(CoherenceKind::gaussian, 1.0, 6);
        ExperimentResult a = run_experiment(c), b = run_experiment(c);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i)
            CHECK(a.rows[i].mc_mean == b.rows[i].mc_mean);
        c.threads = 3;
        ExperimentResult threaded = run_experiment(c);
        for (std::size_t i = 0; i < a.rows.size(); ++i)
            CHECK(threaded.rows[i].mc_mean == a.rows[i].mc_mean);
        c.master_seed = 8;
        ExperimentResult other = run_experiment(c);
        CHECK(other.rows[0].mc_mean != a.rows[0].mc_mean);
    }

    TEST_CASE("homogeneous medium, coherent source")
    {
        ExperimentConfig c = small_experiment(CoherenceKind::fully_coherent, 0.0, 4);
        ExperimentResult r = run_experiment(c);
        const ResultRow& i0 = row(r, 0, "intensity", c);
        CHECK(i0.mc_stderr == 0.0);
        CHECK(i0.mc_mean == doctest::Approx(i0.asymptotic).epsilon(1e-9));
        CHECK(r.second_moment_pass_fraction == 1.0);
    }

    TEST_CASE("moments against exact references")
    {
        ExperimentConfig c = small_experiment(CoherenceKind::gaussian, 1.0, 400);
        ExperimentResult r = run_experiment(c);
        CHECK(r.second_moment_pass_fraction >= 0.9);
        const ResultRow& i0 = row(r, 0, "intensity", c);
        CHECK(std::abs(i0.z_score) < 4.0);
        // a field moment with unbalanced conjugation has zero mean for a
        // random-phase source
        Estimate odd = estimate_field_moment(c, {false, false, true}, {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.0}},
                                             {0.0, 0.0, 0.0});
        CHECK(std::abs(odd.mean) < 4.0 * odd.std_error + 1e-12);
    }
}
