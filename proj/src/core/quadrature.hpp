#pragma once

#include "common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace pcb {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre rule on [a, b] with panels that shrink geometrically
// towards both ends, starting at width `scale`. Resolves boundary layers of
// width ~scale inside long intervals.
Rule graded_rule(double a, double b, double scale, int nodes_per_panel);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b]. Converged when the error estimate is below
// max(rel_tol*|value|, abs_tol); otherwise throws a numeric error.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_tol);

// int_{R^n} exp(-x^T A x / 2 + b^T x + c) dx for real symmetric positive
// definite A and complex b, c.
cplx gaussian_integral(const Eigen::MatrixXd& A, const Eigen::VectorXcd& b, cplx c);

// Calls f(point, weight) on every node of the tensor product of `rules`
// (one rule per axis).
void tensor_for_each(const std::vector<Rule>& rules,
                     const std::function<void(const std::vector<double>&, double)>& f);

// Randomly shifted Sobol rule for the mean of f over [0,1]^dim. The error is
// the standard error across independent shifts.
QuadResult qmc_integrate(int dim, const std::function<double(const std::vector<double>&)>& f,
                         int points_per_shift, int shifts, std::uint64_t seed);

// Pairwise sum, independent of how the values were produced.
double pairwise_sum(const double* v, std::size_t n);
cplx pairwise_sum(const cplx* v, std::size_t n);

} // namespace pcb
