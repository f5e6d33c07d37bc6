#include <doctest.h>

#include "medium.hpp"

#include <cmath>
#include <fstream>

using namespace pcb;

TEST_SUITE("medium")
{
    TEST_CASE("gaussian covariance values")
    {
        MediumSpec m = make_gaussian_medium(1, 1.0, 1.0);
        CHECK(covariance_r(m, {0.0, 0.0}) == doctest::Approx(1.0));
        CHECK(covariance_r(m, {1.0, 0.0}) == doctest::Approx(0.60653066).epsilon(1e-8));
        CHECK(covariance_r(m, {50.0, 0.0}) < 1e-300);
        CHECK(covariance_r(m, {-0.7, 0.0}) == covariance_r(m, {0.7, 0.0}));
        CHECK(q_potential(m, {0.0, 0.0}) == 0.0);
        CHECK(q_potential(m, {1.0, 0.0}) == doctest::Approx(-0.39346934).epsilon(1e-8));
        CHECK(q_potential(m, {50.0, 0.0}) == doctest::Approx(-1.0));
    }

    TEST_CASE("spectrum is nonnegative and transforms back to R")
    {
        MediumSpec m = make_gaussian_medium(1, 2.0, 0.7);
        double sum = 0.0;
        const double dk = 0.01;
        for (int i = -4000; i <= 4000; ++i) {
            double s = medium_spectrum(m, std::abs(i * dk));
            CHECK(s >= 0.0);
            sum += s * std::cos(i * dk * 0.5) * dk;
        }
        CHECK(sum / (2.0 * M_PI) == doctest::Approx(covariance_r(m, {0.5, 0.0})).epsilon(1e-8));
    }

    TEST_CASE("hessian of R at the origin")
    {
        HessianXi a = hessian_xi(make_gaussian_medium(1, 4.0, 1.0));
        CHECK(a.matrix(0, 0) == doctest::Approx(-4.0));
        HessianXi b = hessian_xi(make_gaussian_medium(2, 1.0, 2.0));
        CHECK(b.matrix(0, 0) == doctest::Approx(-0.25));
        CHECK(b.matrix(1, 1) == doctest::Approx(-0.25));
        CHECK(std::abs(b.matrix(0, 1)) < 1e-15);
        CHECK(isotropic_sigma_m2(b) == doctest::Approx(0.25));
    }

    TEST_CASE("cal_q special cases and quadrature")
    {
        MediumSpec m = make_gaussian_medium(1, 1.0, 1.0);
        CHECK(cal_q(m, {0.0, 0.0}, {0.0, 0.0}, 2.0, 1.0, 1.0) == doctest::Approx(1.0));
        double z = 1.7, eta = 0.8, k0 = 1.3;
        Point tau{0.9, 0.0};
        CHECK(cal_q(m, tau, {0.0, 0.0}, z, eta, k0) ==
              doctest::Approx(std::exp(k0 * k0 * z * q_potential(m, tau) / (4 * eta * eta))).epsilon(1e-12));
        Point tp{0.6, 0.0};
        CHECK(log_cal_q(m, {1.0, 0.0}, tp, z, eta, k0) ==
              doctest::Approx(log_cal_q_quadrature(m, {1.0, 0.0}, tp, z, eta, k0)).epsilon(1e-10));
    }

    TEST_CASE("phase screen statistics")
    {
        MediumSpec m = make_gaussian_medium(1, 1.0, 1.0);
        Grid g = make_centered_grid(1, 64, 0.25);
        const double dz = 0.1;
        PhaseScreenSampler sampler(m, g, dz);
        const int n = 10000;
        const std::size_t at = 32, lag = 36; // lag of 4 * 0.25 = ell_m
        double mean = 0.0, var = 0.0, cov = 0.0, var2 = 0.0, cov2 = 0.0;
        std::vector<double> s;
        for (int i = 0; i < n; ++i) {
            RandomStream stream(7, i, StreamPurpose::test);
            sampler.sample(stream, s);
            mean += s[at];
            var += s[at] * s[at];
            var2 += s[at] * s[at] * s[at] * s[at];
            cov += s[at] * s[lag];
            cov2 += s[at] * s[lag] * s[at] * s[lag];
        }
        mean /= n;
        var /= n;
        cov /= n;
        double se_var = std::sqrt((var2 / n - var * var) / n);
        double se_cov = std::sqrt((cov2 / n - cov * cov) / n);
        CHECK(std::abs(mean) < 3.0 * std::sqrt(var / n));
        CHECK(std::abs(var - dz * 1.0) < 3.0 * se_var);
        CHECK(std::abs(cov - dz * covariance_r(m, {1.0, 0.0})) < 3.0 * se_cov);
    }

    TEST_CASE("tabulated spectrum round trip")
    {
        // Tabulate the Gaussian spectrum and compare the synthesized covariance.
        MediumSpec ref = make_gaussian_medium(1, 1.0, 1.0);
        std::vector<double> k, s;
        for (int i = 0; i <= 2000; ++i) {
            k.push_back(0.005 * i);
            s.push_back(medium_spectrum(ref, 0.005 * i));
        }
        MediumSpec tab = make_tabulated_medium(1, k, s);
        CHECK(tab.sigma_R2 == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(covariance_r(tab, {1.0, 0.0}) == doctest::Approx(covariance_r(ref, {1.0, 0.0})).epsilon(1e-4));
        CHECK_THROWS_AS(make_tabulated_medium(1, {0.0, 1.0}, {1.0, -1.0}), Error);
    }

    TEST_CASE("tabulated spectrum from CSV")
    {
        std::string path = std::string(PCB_TEST_DATA) + "/gaussian_spectrum.csv";
        MediumSpec m = load_tabulated_medium(1, path);
        CHECK(m.kind == MediumKind::tabulated);
        CHECK(m.sigma_R2 == doctest::Approx(1.0).epsilon(1e-3));
        CHECK_THROWS_AS(load_tabulated_medium(1, "/nonexistent.csv"), Error);
    }
}
