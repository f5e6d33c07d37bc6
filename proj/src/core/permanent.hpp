#pragma once

#include <vector>

namespace pcb {

// Permanent of a row-major p x p matrix by Ryser's formula with Gray-code
// updates. p <= 10.
double permanent(const std::vector<double>& a, int p);

// Reference enumeration over all p! permutations.
double permanent_naive(const std::vector<double>& a, int p);

} // namespace pcb
