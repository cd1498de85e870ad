#include "irmarl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "irmarl/common.hpp"

namespace irmarl {

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, int n) {
  require(static_cast<int>(a.size()) == n * n, "solve_spd: matrix size mismatch");
  require(static_cast<int>(b.size()) == n, "solve_spd: rhs size mismatch");
  // In-place Cholesky A = L L^T, lower triangle.
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (d <= 0.0) {
      throw std::runtime_error(
          "solve_spd: matrix not positive definite (rank-deficient normal equations; "
          "use ridge > 0)");
    }
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // Forward then backward substitution.
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * y[k];
    y[i] = s / a[i * n + i];
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

std::vector<double> conjugate_gradient(
    const std::function<void(std::span<const double>, std::span<double>)>& apply,
    std::span<const double> b, double tol, int max_iters) {
  const int n = static_cast<int>(b.size());
  std::vector<double> x(n, 0.0), r(b.begin(), b.end()), p(r), ap(n);
  double rs = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
  const double stop = tol * tol * std::max(rs, 1e-300);
  for (int it = 0; it < max_iters && rs > stop; ++it) {
    apply(p, ap);
    const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (pap <= 0.0) break;
    const double alpha = rs / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rs_new = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    const double beta = rs_new / rs;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs = rs_new;
  }
  return x;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, "loglog_slope: need >= 2 points");
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(std::max(ys[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

}  // namespace irmarl
