#pragma once

#include <functional>
#include <span>
#include <vector>

namespace irmarl {

// Solve A x = b for a dense symmetric positive definite A (row-major n x n)
// via Cholesky. Throws std::runtime_error on a non-positive pivot.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, int n);

// Conjugate gradient for symmetric positive definite operators; used as the
// matrix-free fallback when the normal-equation system is large.
std::vector<double> conjugate_gradient(
    const std::function<void(std::span<const double>, std::span<double>)>& apply,
    std::span<const double> b, double tol, int max_iters);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::span<const double> v);

}  // namespace irmarl
