#pragma once

#include <span>
#include <string>
#include <vector>

#include "irmarl/game.hpp"

namespace irmarl {

// One agent's best deviation: a deterministic local policy, per step a flat
// (c, s) -> action table, plus its exact value.
struct BestResponse {
  std::vector<std::vector<int>> action;  // [h], flat (c,s)
  double value = 0.0;

  ProductPolicy as_product_policy(const GameShape& shape, const ProductPolicy& base,
                                  int agent) const;
};

// Exact best response of `agent` against the mixture: others' visitations are
// component-averaged into a single-agent reward (the decoupled transitions
// make the reduction exact), then solved by backward dynamic programming.
BestResponse best_response(const DecoupledMarkovGame& game, const MixturePolicy& policy,
                           int agent);

struct GapReport {
  std::vector<double> best_response_value;  // per agent
  std::vector<double> policy_value;         // per agent
  std::vector<double> gap;                  // per agent
  double max_gap = 0.0;
  int argmax_agent = 0;
  BestResponse argmax_deviation;
  // Deviations are evaluated against the component average of the mixture.
  std::string mixture_convention = "component-average";
};

GapReport evaluate_gap(const DecoupledMarkovGame& game, const MixturePolicy& policy);

// Equilibrium gap of a deterministic action profile in the continuous
// pairwise-product game: max_i max_{a in [-1,1]} a (a + sum_{j != i} pi_j)
//   - pi_i sum_j pi_j, with the inner max attained at a = +-1.
double quadratic_gap(std::span<const double> actions);

}  // namespace irmarl
