#include <doctest.h>

#include "permanent.hpp"
#include "source.hpp"

#include <cmath>

using namespace pcb;

namespace {

SourceSpec gaussian_source(int dim = 1, double theta = 1.0)
{
    SourceSpec s;
    s.dim = dim;
    s.theta = theta;
    return s;
}

} // namespace

TEST_SUITE("source")
{
    TEST_CASE("mutual coherence values")
    {
        SourceSpec s = gaussian_source();
        // f(0.5) f(-0.5) g(1) = e^{-0.25} e^{-0.25} e^{-0.5}
        CHECK(mutual_coherence(s, {0.5, 0.0}, {-0.5, 0.0}) == doctest::Approx(0.36787944).epsilon(1e-8));
        CHECK(mutual_coherence(s, {0.3, 0.0}, {0.3, 0.0}) == doctest::Approx(std::pow(envelope(s, {0.3, 0.0}), 2)));
        CHECK(mutual_coherence(s, {0.3, 0.0}, {-1.1, 0.0}) == mutual_coherence(s, {-1.1, 0.0}, {0.3, 0.0}));
    }

    TEST_CASE("gamma profile symmetry and relation to J")
    {
        SourceSpec s = gaussian_source(2, 0.4);
        Point r{0.2, -0.1}, sig{0.5, 0.3};
        CHECK(gamma_profile(s, r, sig) == doctest::Approx(gamma_profile(s, r, {-0.5, -0.3})));
        Point x{0.7, 0.1}, y{-0.2, 0.4};
        Point mid = 0.5 * (x + y), sep = (1.0 / s.theta) * (x - y);
        CHECK(mutual_coherence(s, x, y) == doctest::Approx(gamma_profile(s, mid, sep)).epsilon(1e-13));
    }

    TEST_CASE("temporal kernel")
    {
        SourceSpec s = gaussian_source();
        s.tau_s = 2.0;
        CHECK(temporal_kernel(s, 0.0) == 1.0);
        CHECK(temporal_kernel(s, 2.0) == doctest::Approx(std::exp(-1.0)));
        CHECK(temporal_kernel(s, -2.0) == temporal_kernel(s, 2.0));
        CHECK(temporal_kernel(s, 1e4) < 1e-300);
        load_temporal_kernel(s, std::string(PCB_TEST_DATA) + "/exponential_kernel.csv");
        validate_source(s);
        CHECK(temporal_kernel(s, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
        CHECK(temporal_kernel(s, 0.0) == doctest::Approx(1.0));
    }

    TEST_CASE("validation")
    {
        SourceSpec s = gaussian_source();
        s.theta = 1.5;
        CHECK_THROWS_WITH_AS(validate_source(s), "theta must lie in (0,1]", Error);
        s = gaussian_source(1);
        s.coherence = CoherenceKind::bessel;
        CHECK_THROWS_AS(validate_source(s), Error);
        s.dim = 2;
        CHECK_NOTHROW(validate_source(s));
    }

    TEST_CASE("source moments")
    {
        SourceSpec s = gaussian_source(1, 0.6);
        std::vector<Point> xs{{0.1, 0.0}}, ys{{-0.4, 0.0}};
        CHECK(s_p(s, xs, ys, {0.3, 1.0}) ==
              doctest::Approx(temporal_kernel(s, -0.7) * mutual_coherence(s, xs[0], ys[0])));

        std::vector<Point> x2{{0.1, 0.0}, {0.5, 0.0}}, y2{{-0.4, 0.0}, {0.2, 0.0}};
        std::vector<double> t2{0.0, 0.3, 0.9, 0.2};
        auto a = [&](int j, int l) { return temporal_kernel(s, t2[j] - t2[2 + l]) * mutual_coherence(s, x2[j], y2[l]); };
        CHECK(s_p(s, x2, y2, t2) == doctest::Approx(a(0, 0) * a(1, 1) + a(0, 1) * a(1, 0)).epsilon(1e-14));
    }

    TEST_CASE("Ryser permanent matches enumeration up to p = 5")
    {
        RandomStream rs(3, 0, StreamPurpose::test);
        for (int p = 1; p <= 5; ++p) {
            std::vector<double> m(std::size_t(p) * p);
            for (auto& v : m)
                v = rs.normal();
            double ref = permanent_naive(m, p);
            CHECK(std::abs(permanent(m, p) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
        }
    }

    TEST_CASE("coherent realizations are the deterministic envelope")
    {
        SourceSpec s = gaussian_source();
        s.coherence = CoherenceKind::fully_coherent;
        Grid g = make_centered_grid(1, 64, 1.0);
        RandomStream rs(1, 0, StreamPurpose::source);
        SourceRealization r = sample_source_field(s, g, {0.0, 0.5}, 0.1, rs);
        REQUIRE(r.fields.size() == 2);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double e = envelope(s, 0.1 * g.point(i));
            CHECK(std::abs(r.fields[0].values[i] - cplx(e)) < 1e-15);
            CHECK(r.fields[1].values[i] == r.fields[0].values[i]);
        }
    }

    TEST_CASE("sample covariance and pseudo-covariance")
    {
        SourceSpec s = gaussian_source(1, 0.5);
        Grid g = make_centered_grid(1, 128, 0.5);
        const double eps = 0.1;
        const std::size_t i = g.nearest({0.0, 0.0}), j = g.nearest({3.0, 0.0});
        const int n = 10000;
        std::vector<double> var(n), cross(n);
        cplx pseudo = 0.0;
        double pseudo_sq = 0.0;
        double sum_v = 0.0, sum_v2 = 0.0;
        for (int k = 0; k < n; ++k) {
            RandomStream rs(11, k, StreamPurpose::source);
            SourceRealization r = sample_source_field(s, g, {0.0}, eps, rs);
            cplx a = r.fields[0].values[i], b = r.fields[0].values[j];
            sum_v += std::norm(a);
            sum_v2 += std::norm(a) * std::norm(a);
            pseudo += a * b;
            pseudo_sq += std::norm(a * b);
        }
        double mean = sum_v / n;
        double se = std::sqrt((sum_v2 / n - mean * mean) / n);
        double ref = mutual_coherence(s, eps * g.point(i), eps * g.point(i));
        CHECK(std::abs(mean - ref) < 3.0 * se);
        pseudo /= double(n);
        CHECK(std::abs(pseudo) < 3.0 * std::sqrt(pseudo_sq / n / n));
    }

    TEST_CASE("temporal correlation of source samples")
    {
        SourceSpec s = gaussian_source();
        Grid g = make_centered_grid(1, 64, 0.25);
        const std::size_t c = g.nearest({0.0, 0.0});
        const int n = 10000;
        cplx corr = 0.0;
        double sq = 0.0;
        for (int k = 0; k < n; ++k) {
            RandomStream rs(5, k, StreamPurpose::source);
            SourceRealization r = sample_source_field(s, g, {0.0, 0.25, 0.5, 0.75, 1.0}, 1.0, rs);
            cplx v = r.fields[4].values[c] * std::conj(r.fields[0].values[c]);
            corr += v;
            sq += std::norm(v);
        }
        corr /= double(n);
        double se = std::sqrt(sq / n / n);
        CHECK(std::abs(corr.real() - std::exp(-1.0)) < 3.0 * se);
    }
}
