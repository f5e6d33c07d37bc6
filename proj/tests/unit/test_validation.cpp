#include <doctest.h>

#include "validation.hpp"

using namespace pcb;

TEST_SUITE("validation")
{
    TEST_CASE("suites")
    {
        CHECK(suite_criteria("analytic") == std::vector<int>{1, 2, 3, 4, 5, 9, 10});
        CHECK(suite_criteria("mc") == std::vector<int>{6, 7, 8});
        CHECK(suite_criteria("all").size() == 10);
        CHECK_THROWS_AS(suite_criteria("some"), Error);
    }

    TEST_CASE("brute-force oracles on tiny cases")
    {
        // p = q = 1: the empty pairing contributes h h' and the single pairing g
        std::vector<cplx> h{cplx(2.0, 0.0)}, hp{cplx(3.0, 0.0)}, g{cplx(5.0, 0.0)};
        CHECK(std::abs(functional_F_bruteforce(h, hp, g) - cplx(5.0, 0.0)) < 1e-15);
        // permanent of [[1, 2], [3, 4]] is 10
        std::vector<cplx> m{1.0, 2.0, 3.0, 4.0};
        CHECK(std::abs(functional_G_bruteforce(m, m, 2) - cplx(10.0, 0.0)) < 1e-14);
    }

    TEST_CASE("perturbed tolerances fail every check")
    {
        ValidationOptions opt;
        opt.perturb = true;
        CriterionReport r = run_criterion(1, opt);
        CHECK_FALSE(r.pass());
        for (const auto& c : r.checks)
            CHECK_FALSE(c.pass);
    }

    TEST_CASE("criterion 1 passes and reports")
    {
        CriterionReport r = run_criterion(1, {});
        CHECK(r.pass());
        CHECK(r.seconds <= r.budget_seconds);
        std::string table = report_table({r});
        CHECK(table.find("criterion  1  PASS") != std::string::npos);
        CHECK_THROWS_AS(run_criterion(11, {}), Error);
    }

    TEST_CASE("split-step order")
    {
        CHECK(strang_order(256, 0.1, 0.5, 8) == doctest::Approx(2.0).epsilon(0.1));
    }
}
