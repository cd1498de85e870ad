#pragma once

#include <span>
#include <vector>

namespace irmarl {

// Parameters of the regularized update: chi-square weight, proximal step
// size, and the width of the gain range (used only by the regret bound).
struct UpdateParams {
  double lambda = 0.0;
  double eta = 1.0;
  double gain_bound = 1.0;  // B

  void validate() const;
};

// chi^2(p, nu) = sum_a nu_a (p_a/nu_a - 1)^2. Throws std::domain_error when p
// puts mass where nu has none.
double chi_square(std::span<const double> p, std::span<const double> nu);

// Bregman divergence of chi^2: sum_a (p_a - q_a)^2 / nu_a.
double bregman(std::span<const double> p, std::span<const double> q,
               std::span<const double> nu);

// Exact minimizer over the simplex of
//   -<gains, p> + lambda chi^2(p, nu) + (1/eta) bregman(p, pi_t, nu),
// solved by finite active-set elimination (the objective is a strictly convex
// diagonal quadratic, so the equality-constrained solution is affine in the
// simplex multiplier).
std::vector<double> regularized_update(std::span<const double> gains,
                                       std::span<const double> pi_t,
                                       std::span<const double> nu, const UpdateParams& params);

// First-order optimality slack of a proposed update: the minimum over simplex
// vertices of <-eta g + (1+eta lambda) grad chi2(p_next) - grad chi2(pi_t),
// e_a - p_next>. Nonnegative (within tolerance) iff p_next is the minimizer.
double update_certificate_slack(std::span<const double> p_next, std::span<const double> gains,
                                std::span<const double> pi_t, std::span<const double> nu,
                                const UpdateParams& params);

// Runs T regularized updates from p^1 = nu against the given gain sequence
// and evaluates both sides of the no-regret bound
//   sum_t <l^t, mu - p^t> + lambda sum_{t<=T+1} chi2(p^t, nu)
//     <= (T lambda + 1/eta) chi2(mu, nu) + eta T B^2 / 4.
struct RegretAudit {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs + 1e-9; }
};
RegretAudit regret_audit(const std::vector<std::vector<double>>& gains,
                         std::span<const double> nu, const UpdateParams& params,
                         std::span<const double> mu);

}  // namespace irmarl
