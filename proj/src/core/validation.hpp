#pragma once

#include "common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcb {

enum class CheckRule { close, at_most, at_least };

// close: |measured - expected| <= tolerance. at_most / at_least compare
// measured with expected and ignore the tolerance. Boolean outcomes are
// recorded as a violation count against expected = 0.
struct Check {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    CheckRule rule = CheckRule::close;
    bool pass = false;
    bool counts = true; // informational rows do not decide the criterion
};

struct CriterionReport {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    bool pass() const;
};

struct ValidationOptions {
    // Test mode: every tolerance is replaced by a negative one so each check
    // must fail.
    bool perturb = false;
    int threads = 0;
    std::uint64_t seed = 20240611;
};

// Criteria 1..10. Each runs its own fixed parameter set and times itself
// against its runtime budget.
CriterionReport run_criterion(int id, const ValidationOptions& options);

// "analytic": 1-5, 9, 10; "mc": 6-8; "all": 1-10.
std::vector<int> suite_criteria(const std::string& suite);

std::string report_table(const std::vector<CriterionReport>& reports);

// Subset enumerations used as oracles for the pairing functionals.
cplx functional_F_bruteforce(const std::vector<cplx>& h, const std::vector<cplx>& h_prime,
                             const std::vector<cplx>& g);
cplx functional_G_bruteforce(const std::vector<cplx>& h, const std::vector<cplx>& g, int p);

// Observed order of the split-step scheme on a deterministic smooth potential,
// from errors at dz, dz/2, dz/4 against a fine reference. d = 1.
double strang_order(int n, double dx, double z, int coarse_steps);

} // namespace pcb
