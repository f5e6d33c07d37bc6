#include "permanent.hpp"

#include "common.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace pcb {

double permanent(const std::vector<double>& a, int p)
{
    if (p < 1 || p > 10)
        range_error("permanent size must lie in 1..10");
    if (a.size() != std::size_t(p) * p)
        numeric_error("permanent: matrix has the wrong size");
    if (p == 1)
        return a[0];
    if (p == 2)
        return a[0] * a[3] + a[1] * a[2];
    // Ryser: perm = (-1)^p sum_S (-1)^|S| prod_i sum_{j in S} a_ij
    std::vector<double> row_sums(p, 0.0);
    double total = 0.0;
    unsigned gray = 0;
    const unsigned count = 1u << p;
    for (unsigned k = 1; k < count; ++k) {
        unsigned next = k ^ (k >> 1);
        unsigned changed = next ^ gray;
        int col = std::countr_zero(changed);
        double sign = (next & changed) ? 1.0 : -1.0;
        for (int i = 0; i < p; ++i)
            row_sums[i] += sign * a[std::size_t(i) * p + col];
        gray = next;
        double prod = 1.0;
        for (int i = 0; i < p; ++i)
            prod *= row_sums[i];
        int size = std::popcount(gray);
        total += ((p - size) % 2 == 0) ? prod : -prod;
    }
    return total;
}

double permanent_naive(const std::vector<double>& a, int p)
{
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    do {
        double prod = 1.0;
        for (int i = 0; i < p; ++i)
            prod *= a[std::size_t(i) * p + perm[i]];
        total += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

} // namespace pcb
