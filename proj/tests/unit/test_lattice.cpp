#include <doctest.h>

#include "lattice.hpp"

#include <cmath>
#include <numbers>

using namespace pcb;

TEST_SUITE("lattice")
{
    TEST_CASE("uniform coordinates and wavenumbers")
    {
        Grid g = make_grid(1, 8, 0.5, {0.0});
        auto x = g.coordinates();
        REQUIRE(x.size() == 8);
        for (int i = 0; i < 8; ++i)
            CHECK(x[i] == doctest::Approx(0.5 * i));
        auto k = g.wavenumbers_sorted();
        for (int m = -4; m < 4; ++m)
            CHECK(k[m + 4] == doctest::Approx(2.0 * std::numbers::pi * m / 4.0));
    }

    TEST_CASE("point count in two dimensions")
    {
        CHECK(make_grid(2, 8, 1.0, {0.0, 0.0}).size() == 64);
    }

    TEST_CASE("grid validation")
    {
        CHECK_THROWS_AS(make_grid(3, 8, 1.0, {}), Error);
        CHECK_THROWS_AS(make_grid(1, 12, 1.0, {}), Error);
        CHECK_THROWS_AS(make_grid(1, 8, 0.0, {}), Error);
        Grid g = make_centered_grid(1, 8, 1.0);
        CHECK_THROWS_AS(g.nearest({10.0, 0.0}), Error);
        CHECK(g.nearest({0.0, 0.0}) == 4);
    }

    TEST_CASE("spectrum of a constant sits at zero wavenumber")
    {
        Grid g = make_grid(1, 8, 1.0, {0.0});
        ComplexField f(g);
        for (auto& v : f.values)
            v = 1.0;
        ComplexField s = forward_spectrum(f);
        CHECK(std::abs(s.values[0] - cplx(8.0)) < 1e-14);
        for (std::size_t j = 1; j < 8; ++j)
            CHECK(std::abs(s.values[j]) < 1e-14);
    }

    TEST_CASE("a pure mode lands in one bin")
    {
        Grid g = make_grid(1, 16, 0.25, {0.0});
        ComplexField f(g);
        for (std::size_t i = 0; i < g.size(); ++i)
            f.values[i] = std::exp(cplx(0.0, 2.0 * std::numbers::pi * g.point(i)[0] / g.extent()));
        ComplexField s = forward_spectrum(f);
        int nonzero = 0;
        for (const auto& v : s.values)
            nonzero += std::abs(v) > 1e-10;
        CHECK(nonzero == 1);
        CHECK(std::abs(s.values[1]) == doctest::Approx(16.0));
    }

    TEST_CASE("inverse undoes forward and Parseval holds")
    {
        Grid g = make_grid(2, 16, 0.3, {-2.0, -2.0});
        ComplexField f(g);
        for (std::size_t i = 0; i < g.size(); ++i)
            f.values[i] = cplx(std::sin(0.37 * i), std::cos(1.3 * i * i));
        ComplexField s = forward_spectrum(f);
        ComplexField back = inverse_spectrum(s);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            err = std::max(err, std::abs(back.values[i] - f.values[i]));
        CHECK(err < 1e-12);
        CHECK(spectral_squared_norm(s) == doctest::Approx(f.squared_norm()).epsilon(1e-12));
    }

    TEST_CASE("squared norm is dx^d times the sum")
    {
        Grid g = make_grid(2, 8, 0.5, {0.0, 0.0});
        ComplexField f(g);
        for (auto& v : f.values)
            v = cplx(1.0, 1.0);
        CHECK(f.squared_norm() == doctest::Approx(0.25 * 64 * 2.0));
    }

    TEST_CASE("boundary fraction")
    {
        Grid g = make_centered_grid(1, 64, 0.5);
        ComplexField f(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = g.point(i)[0];
            f.values[i] = std::exp(-x * x);
        }
        CHECK(boundary_fraction(f) < 1e-100);
        for (auto& v : f.values)
            v = 1.0;
        CHECK(boundary_fraction(f) == doctest::Approx(1.0));
    }
}
