#include <doctest.h>

#include "asymptotics.hpp"
#include "validation.hpp"

#include <gsl/gsl_sf_bessel.h>

#include <cmath>

using namespace pcb;

namespace {

AsymptoticModel model(int dim, CoherenceKind kind = CoherenceKind::gaussian, double theta = 0.5)
{
    AsymptoticModel m;
    m.medium = make_gaussian_medium(dim, 1.0, 1.0);
    m.source.dim = dim;
    m.source.coherence = kind;
    m.source.theta = theta;
    return m;
}

MomentQuery pair_query(LimitRegime regime, BetaCase bc, double z, Point r, Point x, Point y, double t = 0.0,
                       double tp = 0.0)
{
    MomentQuery q = coincident_query(regime, bc, z, r, 1);
    q.xs = {x};
    q.ys = {y};
    q.times = {t, tp};
    return q;
}

} // namespace

TEST_SUITE("asymptotics")
{
    TEST_CASE("kinetic second moment, beta > 1")
    {
        AsymptoticModel m = model(1);
        Point r{0.2, 0.0};
        double g0 = gamma_profile(m.source, r, {0.0, 0.0});
        CHECK(m11_kinetic(m, pair_query(LimitRegime::kinetic, BetaCase::beta_gt_1, 1.3, r, {}, {})).real() ==
              doctest::Approx(g0));
        cplx far = m11_kinetic(m, pair_query(LimitRegime::kinetic, BetaCase::beta_gt_1, 1.3, r, {0.0, 0.0}, {40.0, 0.0}));
        CHECK(far.real() == doctest::Approx(g0 * std::exp(-1.3 / 4.0)));
    }

    TEST_CASE("second moments at z = 0 reduce to the source")
    {
        AsymptoticModel m = model(1);
        Point r{0.1, 0.0}, x{0.3, 0.0}, y{-0.2, 0.0};
        cplx v = m11_kinetic(m, pair_query(LimitRegime::kinetic, BetaCase::beta_gt_1, 0.0, r, x, y, 0.0, 0.5));
        CHECK(v.real() == doctest::Approx(temporal_kernel(m.source, -0.5) * gamma_profile(m.source, r, {0.0, 0.0})));
    }

    TEST_CASE("diffusive second moment")
    {
        AsymptoticModel m = model(2);
        Point r{0.1, 0.2};
        double g0 = gamma_profile(m.source, r, {0.0, 0.0});
        CHECK(m11_diffusive(m, pair_query(LimitRegime::diffusive, BetaCase::beta_gt_1, 2.0, r, {}, {})).real() ==
              doctest::Approx(g0));
        // decay rate in |y - x|^2 is k0^2 z sigma_R2 / (8 ell_m^2)
        cplx v = m11_diffusive(m, pair_query(LimitRegime::diffusive, BetaCase::beta_gt_1, 2.0, r, {}, {0.5, 0.0}));
        CHECK(v.real() == doctest::Approx(g0 * std::exp(-2.0 * 0.25 / 8.0)));
        MomentQuery q = pair_query(LimitRegime::diffusive, BetaCase::beta_eq_1, 1.4, r, {0.2, 0.0}, {-0.1, 0.3});
        cplx closed = m11_diffusive(m, q), quad = m11_diffusive_quadrature(m, q);
        CHECK(std::abs(closed - quad) <= 1e-8 * std::abs(closed));
    }

    TEST_CASE("mean intensity")
    {
        AsymptoticModel m = model(1);
        Point r{0.4, 0.0};
        double g0 = gamma_profile(m.source, r, {0.0, 0.0});
        CHECK(mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_eq_1, 0.0, r) == doctest::Approx(g0));
        CHECK(mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_eq_1, 1e-4, r) == doctest::Approx(g0).epsilon(1e-6));
        CHECK(mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_gt_1, 3.0, r) == doctest::Approx(g0));
        double closed = mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_eq_1, 1.5, r);
        CHECK(std::abs(closed - mean_intensity_quadrature(m, 1.5, r)) <= 1e-10 * closed);
    }

    TEST_CASE("detector factor")
    {
        SourceSpec s;
        CHECK(f_T(s, 1.0) == doctest::Approx(0.56766764).epsilon(1e-8));
        CHECK(f_T_exponential(1.0, 1.0) == doctest::Approx(0.56766764).epsilon(1e-8));
        CHECK(f_T_exponential(1.0, 1e-6) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(f_T_exponential(1.0, 1e6) < 3e-6);
    }

    TEST_CASE("detector moments")
    {
        SourceSpec s;
        for (double T : {0.1, 1.0, 7.0})
            CHECK(f_p(s, 2, T).value == doctest::Approx(1.0 + f_T(s, T)).epsilon(1e-8));
        CHECK(f_p(s, 1, 3.0).value == 1.0);
        CHECK(f_p(s, 2, 1e-3).value == doctest::Approx(2.0).epsilon(1e-3));
        // F_3 approaches 1 with a correction linear in tau_s / T
        double d100 = f_p(s, 3, 100.0).value - 1.0, d1000 = f_p(s, 3, 1000.0).value - 1.0;
        CHECK(d100 > 0.0);
        CHECK(d1000 == doctest::Approx(d100 / 10.0).epsilon(0.05));
        QuadResult four = f_p(s, 4, 1e3);
        CHECK(std::abs(four.value - 1.0) < 0.02);
        CHECK(f_p_limit_small_T(4) == 24.0);
        CHECK(f_p_limit_large_T(3) == 1.0);
    }

    TEST_CASE("chi and its ratios")
    {
        AsymptoticModel m = model(2);
        Point origin{0.0, 0.0};
        double closed = chi(m, 1.0, origin), quad = chi_quadrature(m, 1.0, origin);
        CHECK(std::abs(closed - quad) <= 1e-6 * closed);
        for (double z : {0.3, 1.0, 4.0}) {
            double mean = mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_eq_1, z, {0.3, 0.1});
            CHECK(chi(m, z, {0.3, 0.1}) <= mean * mean);
        }
        AsymptoticModel narrow = model(2, CoherenceKind::gaussian, 1e-3);
        double mean = mean_intensity(narrow, LimitRegime::diffusive, BetaCase::beta_eq_1, 1.0, origin);
        CHECK(chi(narrow, 1.0, origin) / (mean * mean) < 1e-5);

        CHECK(chi_ratio_gaussian(0.0, 2.0, 1.0, 1.0, 0.5, 2) == 1.0);
        CHECK(chi_ratio_gaussian(1e8, 1.0, 1.0, 2.0, 0.5, 2) == doctest::Approx(0.5).epsilon(1e-6));
        // r0 -> infinity
        double sz = 2.5;
        CHECK(chi_ratio_gaussian(std::cbrt(sz), 1.0, 1e9, 1.0, 0.5, 2) ==
              doctest::Approx(1.0 / (1.0 + sz / (3.0 * 0.25))).epsilon(1e-9));
        CHECK(chi_ratio_bessel(0.0, 1.0, 1.0, 1.0, 0.5) == 1.0);
        double x = 1.0 / (2.0 * 0.25);
        CHECK(chi_ratio_bessel(1e8, 1.0, 1.0, 1.0, 0.5) == doctest::Approx(gsl_sf_bessel_I0_scaled(x)).epsilon(1e-6));
        // large argument of I0(x) e^{-x}
        double big = gsl_sf_bessel_I0_scaled(50.0);
        CHECK(std::abs(big / (1.0 / std::sqrt(2.0 * M_PI * 50.0)) - 1.0) < 0.005);
    }

    TEST_CASE("scintillation branches")
    {
        AsymptoticModel m = model(2);
        Point origin{0.0, 0.0};
        CHECK(scint_T(m, BetaCase::beta_gt_1, 1.0, origin, 1e-9) == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(scint_T(m, BetaCase::theta_to_0, 1.0, origin, 1e6) < 3e-6);
        double mean = mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_eq_1, 1.0, origin);
        CHECK(scint_T(m, BetaCase::beta_eq_1, 1.0, origin, 1e-9) ==
              doctest::Approx(1.0 + 2.0 * chi(m, 1.0, origin) / (mean * mean)).epsilon(1e-8));
        CHECK(scint_T_limit(m, 1.0) ==
              doctest::Approx(f_T(m.source, 1.0) + saturation_ratio(m.source) * (1.0 + f_T(m.source, 1.0))).epsilon(1e-12));
        CHECK(saturation_ratio(m.source) > 0.0);
        CHECK(saturation_ratio(m.source) < 1.0);
    }

    TEST_CASE("pairing functionals")
    {
        std::vector<cplx> h{cplx(0.3, 0.1)}, hp{cplx(-0.2, 0.5)}, g{cplx(1.1, -0.4)};
        CHECK(std::abs(functional_F(h, hp, g) - g[0]) < 1e-15);
        std::vector<cplx> h2{cplx(0.3, 0.1), cplx(1.2, -0.7)}, hp2{cplx(-0.2, 0.5), cplx(0.4, 0.4)};
        std::vector<cplx> fact(4);
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                fact[j * 2 + l] = h2[j] * hp2[l];
        CHECK(std::abs(functional_F(h2, hp2, fact) - h2[0] * h2[1] * hp2[0] * hp2[1]) < 1e-14);
        std::vector<cplx> g2{cplx(0.5, 0.2), cplx(-1.0, 0.3), cplx(0.7, 0.7), cplx(0.1, -0.9)};
        CHECK(std::abs(functional_F(h2, hp2, g2) - functional_F_bruteforce(h2, hp2, g2)) < 1e-12);
        CHECK(partial_pairings(2, 2).size() == 7);

        CHECK(std::abs(functional_G(g, {cplx(2.0, 1.0)}, 1) - cplx(2.0, 1.0)) < 1e-15);
        std::vector<cplx> hm{cplx(0.5, 0.2), cplx(-1.0, 0.3), cplx(0.7, 0.7), cplx(0.1, -0.9)};
        CHECK(std::abs(functional_G(hm, hm, 2) - permanent_complex(hm, 2)) < 1e-14);
        CHECK(std::abs(functional_G(hm, g2, 2) - functional_G_bruteforce(hm, g2, 2)) < 1e-12);
    }

    TEST_CASE("higher moments")
    {
        AsymptoticModel m = model(1);
        Point r{0.2, 0.0};
        double mean = mean_intensity(m, LimitRegime::diffusive, BetaCase::beta_eq_1, 1.0, r);
        double g0 = gamma_profile(m.source, r, {0.0, 0.0});
        MomentQuery q = coincident_query(LimitRegime::diffusive, BetaCase::theta_to_0, 1.0, r, 2);
        CHECK(mpp_limit(m, q).real() == doctest::Approx(2.0 * mean * mean).epsilon(1e-8));
        q.beta_case = BetaCase::beta_gt_1;
        CHECK(mpp_limit(m, q).real() == doctest::Approx(4.0 * g0 * g0).epsilon(1e-12));
        MomentQuery q1 = pair_query(LimitRegime::diffusive, BetaCase::beta_eq_1, 1.0, r, {0.1, 0.0}, {-0.2, 0.0});
        CHECK(std::abs(mpp_limit(m, q1) - m11_diffusive(m, q1)) < 1e-12);
        MomentQuery k1 = pair_query(LimitRegime::kinetic, BetaCase::beta_eq_1, 1.0, r, {0.1, 0.0}, {-0.2, 0.0});
        CHECK(std::abs(mpp_limit(m, k1) - m11_kinetic(m, k1)) < 1e-12);

        for (BetaCase bc : {BetaCase::beta_gt_1, BetaCase::beta_eq_1, BetaCase::theta_to_0})
            CHECK(intensity_moment(m, bc, 1.0, r, 1) ==
                  doctest::Approx(mean_intensity(m, LimitRegime::diffusive, bc, 1.0, r)).epsilon(1e-8));
        CHECK(intensity_moment(m, BetaCase::theta_to_0, 1.0, r, 3) == doctest::Approx(6.0 * std::pow(mean, 3)));
        double i2 = intensity_moment(m, BetaCase::beta_eq_1, 1.0, r, 2);
        CHECK(i2 == doctest::Approx(2.0 * (mean * mean + chi(m, 1.0, r))).epsilon(1e-8));

        CHECK(time_avg_intensity_moment(m, BetaCase::beta_eq_1, 1.0, r, 2, 1e-4) == doctest::Approx(i2).epsilon(1e-4));
        CHECK(time_avg_intensity_moment(m, BetaCase::beta_eq_1, 1.0, r, 2, 1e5) == doctest::Approx(i2 / 2.0).epsilon(1e-4));
        CHECK(time_avg_intensity_moment(m, BetaCase::beta_eq_1, 1.0, r, 1, 3.0) == doctest::Approx(mean).epsilon(1e-8));
        CHECK_THROWS_AS(intensity_moment(m, BetaCase::beta_eq_1, 1.0, r, 5), Error);
    }

    TEST_CASE("kinetic limit scintillation at z = 0 is the source value")
    {
        AsymptoticModel m = model(1, CoherenceKind::fully_coherent);
        KineticScintillation k = kinetic_scintillation(m, 1e-9, {0.0, 0.0}, 1.0);
        CHECK(k.instantaneous == doctest::Approx(0.0).epsilon(1e-6));
        AsymptoticModel g = model(1, CoherenceKind::gaussian, 0.5);
        KineticScintillation s = kinetic_scintillation(g, 1e-9, {0.0, 0.0}, 1.0);
        CHECK(s.instantaneous == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(s.time_averaged == doctest::Approx(f_T(g.source, 1.0)).epsilon(1e-6));
    }
}
