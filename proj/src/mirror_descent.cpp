#include "irmarl/mirror_descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "irmarl/common.hpp"

namespace irmarl {

void UpdateParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("UpdateParams: lambda must be finite and >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("UpdateParams: eta must be finite and > 0");
  if (!(gain_bound > 0.0)) throw std::invalid_argument("UpdateParams: gain bound must be > 0");
}

double chi_square(std::span<const double> p, std::span<const double> nu) {
  require(p.size() == nu.size(), "chi_square: size mismatch");
  double total = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (nu[a] <= 0.0) {
      if (p[a] > 0.0) throw std::domain_error("chi_square: p has mass outside support(nu)");
      continue;
    }
    const double d = p[a] / nu[a] - 1.0;
    total += nu[a] * d * d;
  }
  return total;
}

double bregman(std::span<const double> p, std::span<const double> q,
               std::span<const double> nu) {
  require(p.size() == q.size() && p.size() == nu.size(), "bregman: size mismatch");
  double total = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double d = p[a] - q[a];
    if (nu[a] <= 0.0) {
      if (d != 0.0) throw std::domain_error("bregman: zero nu entry with differing mass");
      continue;
    }
    total += d * d / nu[a];
  }
  return total;
}

std::vector<double> regularized_update(std::span<const double> gains,
                                       std::span<const double> pi_t,
                                       std::span<const double> nu, const UpdateParams& params) {
  params.validate();
  const int n = static_cast<int>(nu.size());
  require(static_cast<int>(gains.size()) == n && static_cast<int>(pi_t.size()) == n,
          "regularized_update: size mismatch");
  for (int a = 0; a < n; ++a) {
    if (nu[a] <= 0.0) throw std::domain_error("regularized_update: nu must be strictly positive");
    if (!std::isfinite(gains[a])) throw std::invalid_argument("regularized_update: gains not finite");
  }

  // Stationarity on the support:
  //   p_a = nu_a (g_a + 2 lambda - tau) / (2 alpha) + pi_a / (eta alpha)
  // with alpha = lambda + 1/eta; tau is pinned by sum p = 1 per active set.
  const double alpha = params.lambda + 1.0 / params.eta;
  std::vector<double> base(n), slope(n);
  for (int a = 0; a < n; ++a) {
    base[a] = nu[a] * (gains[a] + 2.0 * params.lambda) / (2.0 * alpha) +
              pi_t[a] / (params.eta * alpha);
    slope[a] = nu[a] / (2.0 * alpha);
  }

  std::vector<bool> active(n, true);
  std::vector<double> p(n, 0.0);
  for (int round = 0; round < n; ++round) {
    double sum_base = 0.0, sum_slope = 0.0;
    for (int a = 0; a < n; ++a) {
      if (!active[a]) continue;
      sum_base += base[a];
      sum_slope += slope[a];
    }
    const double tau = (sum_base - 1.0) / sum_slope;
    bool clipped = false;
    for (int a = 0; a < n; ++a) {
      if (!active[a]) {
        p[a] = 0.0;
        continue;
      }
      p[a] = base[a] - slope[a] * tau;
      if (p[a] < 0.0) {
        active[a] = false;
        clipped = true;
      }
    }
    if (!clipped) break;
  }
  for (int a = 0; a < n; ++a) p[a] = std::max(p[a], 0.0);
  return p;
}

double update_certificate_slack(std::span<const double> p_next, std::span<const double> gains,
                                std::span<const double> pi_t, std::span<const double> nu,
                                const UpdateParams& params) {
  const int n = static_cast<int>(nu.size());
  std::vector<double> v(n);
  for (int a = 0; a < n; ++a) {
    const double grad_next = 2.0 * (p_next[a] - nu[a]) / nu[a];
    const double grad_prev = 2.0 * (pi_t[a] - nu[a]) / nu[a];
    v[a] = -params.eta * gains[a] + (1.0 + params.eta * params.lambda) * grad_next - grad_prev;
  }
  double inner = 0.0;
  for (int a = 0; a < n; ++a) inner += v[a] * p_next[a];
  double slack = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) slack = std::min(slack, v[a] - inner);
  return slack;
}

RegretAudit regret_audit(const std::vector<std::vector<double>>& gains,
                         std::span<const double> nu, const UpdateParams& params,
                         std::span<const double> mu) {
  params.validate();
  const int n = static_cast<int>(nu.size());
  const int t_max = static_cast<int>(gains.size());
  for (const auto& g : gains) {
    require(static_cast<int>(g.size()) == n, "regret_audit: gain size mismatch");
    for (double v : g)
      require(v >= -1e-12 && v <= params.gain_bound + 1e-12,
              "regret_audit: gains must lie in [0, B]");
  }

  std::vector<double> p(nu.begin(), nu.end());
  RegretAudit audit;
  double drift_sum = chi_square(p, nu);  // t = 1 term (zero)
  for (int t = 0; t < t_max; ++t) {
    for (int a = 0; a < n; ++a) audit.lhs += gains[t][a] * (mu[a] - p[a]);
    auto next = regularized_update(gains[t], p, nu, params);
    p = std::move(next);
    drift_sum += chi_square(p, nu);
  }
  audit.lhs += params.lambda * drift_sum;
  audit.rhs = (t_max * params.lambda + 1.0 / params.eta) * chi_square(mu, nu) +
              params.eta * t_max * params.gain_bound * params.gain_bound / 4.0;
  return audit;
}

}  // namespace irmarl
