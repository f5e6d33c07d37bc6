#include <doctest.h>

#include "montecarlo.hpp"
#include "propagator.hpp"

#include <cmath>

using namespace pcb;

namespace {

RegimeScaling kinetic(double eps = 0.05)
{
    RegimeScaling s;
    s.epsilon = eps;
    s.regime = RegimeKind::kinetic;
    return s;
}

ComplexField gaussian_beam(const Grid& g, double a)
{
    ComplexField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double x = g.point(i)[0];
        f.values[i] = std::exp(-a * x * x);
    }
    return f;
}

} // namespace

TEST_SUITE("propagator")
{
    TEST_CASE("eta by regime")
    {
        CHECK(eta(kinetic(0.3)) == 1.0);
        RegimeScaling d;
        d.regime = RegimeKind::diffusive;
        d.epsilon = std::exp(-std::exp(2.0));
        CHECK(eta(d) == doctest::Approx(0.5));
        d.epsilon = 0.1;
        CHECK_THROWS_AS(validate_scaling(d), Error);
        RegimeScaling c;
        c.regime = RegimeKind::custom;
        c.eta_custom = 0.3;
        CHECK(eta(c) == 0.3);
    }

    TEST_CASE("free step matches the Gaussian closed form")
    {
        MediumSpec still = make_gaussian_medium(1, 0.0, 1.0);
        RegimeScaling sc = kinetic();
        Grid g = make_centered_grid(1, 1024, 0.25);
        const double a = 0.0025;
        ComplexField u = gaussian_beam(g, a);
        RandomStream rs(1, 0, StreamPurpose::medium);
        const double dz = 0.5;
        ComplexField out = split_step(u, still, sc, dz, rs);
        cplx denom = 1.0 + cplx(0.0, 2.0 * a * dz / sc.epsilon);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = g.point(i)[0];
            err = std::max(err, std::abs(out.values[i] - std::sqrt(1.0 / denom) * std::exp(-a * x * x / denom)));
        }
        CHECK(err < 1e-10);

        // Two half steps equal one full step without a medium.
        ComplexField half = split_step(split_step(u, still, sc, dz / 2, rs), still, sc, dz / 2, rs);
        double diff = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            diff = std::max(diff, std::abs(half.values[i] - out.values[i]));
        CHECK(diff < 1e-12);
    }

    TEST_CASE("steps conserve the norm")
    {
        MediumSpec m = make_gaussian_medium(1, 1.0, 1.0);
        Grid g = make_centered_grid(1, 256, 0.5);
        ComplexField u = gaussian_beam(g, 0.01);
        RandomStream rs(2, 0, StreamPurpose::medium);
        ComplexField v = split_step(u, m, kinetic(), 0.1, rs);
        CHECK(v.squared_norm() == doctest::Approx(u.squared_norm()).epsilon(1e-12));
    }

    TEST_CASE("plans snap record planes")
    {
        PropagationPlan p = make_plan(1.0, 10, {0.33, 1.0, 0.5, 0.5});
        REQUIRE(p.record_planes.size() == 3);
        CHECK(p.record_planes[0] == doctest::Approx(0.3));
        CHECK(p.record_planes[2] == doctest::Approx(1.0));
        CHECK_THROWS_AS(make_plan(1.0, 0, {}), Error);
        CHECK_THROWS_AS(make_plan(1.0, 4, {2.0}), Error);
    }

    TEST_CASE("identical time samples see the same screens")
    {
        SourceSpec s;
        s.coherence = CoherenceKind::fully_coherent;
        Grid g = make_centered_grid(1, 256, 0.5);
        RandomStream src(3, 0, StreamPurpose::source), med(3, 0, StreamPurpose::medium);
        SourceRealization r = sample_source_field(s, g, {0.0, 1.0}, 0.05, src);
        PlaneStack out = propagate(r, make_gaussian_medium(1, 1.0, 1.0), kinetic(), make_plan(1.0, 8, {0.5, 1.0}), med);
        REQUIRE(out.size() == 2);
        for (const auto& plane : out)
            CHECK(plane[0].values == plane[1].values);
    }

    TEST_CASE("mean field decays at the first-moment rate")
    {
        ExperimentConfig c;
        c.medium = make_gaussian_medium(1, 1.0, 1.0);
        c.source.coherence = CoherenceKind::fully_coherent;
        c.scaling = kinetic();
        c.grid = make_centered_grid(1, 512, 0.5);
        c.plan = make_plan(1.0, 8, {});
        c.n_realizations = 2000;
        c.master_seed = 17;
        c.threads = 1;
        c.probes = {{}};
        fill_time_sampling(c);
        Estimate e = estimate_field_moment(c, {false}, {{0.0, 0.0}}, {0.0});
        cplx ref = exact_mean_field(c, 1.0, {0.0, 0.0});
        CHECK(std::abs(e.mean - ref) < 3.0 * e.std_error);
    }
}
