#pragma once

#include <cstdint>
#include <vector>

#include "irmarl/ir_function.hpp"
#include "irmarl/offline_data.hpp"

namespace irmarl {

// The reward function class to fit: all sub-function tables over slot subsets
// of size < rank (or an explicit subset list), linear in their entries.
struct IrClassSpec {
  int rank = 2;
  std::vector<SubsetKey> subsets;  // empty: all subsets of size < rank
  double ridge = 1e-8;

  void validate() const;
  std::vector<SubsetKey> expand_subsets(int num_slots) const;
};

struct RewardFitDiagnostics {
  double train_mse = 0.0;
  int parameter_count = 0;
  bool used_conjugate_gradient = false;
};

struct TransitionFitDiagnostics {
  double log_likelihood = 0.0;
  std::vector<int> unseen_rows;  // flat (c,s,a) rows that fell back to uniform
};

// Least squares over the IR-constrained linear class for (agent, step); one
// parameter per occupied sub-function coordinate. The result is standardized
// against the smoothed empirical behavior distribution.
IrFunction fit_reward_lsr(const OfflineDataset& dataset, const IrClassSpec& spec, int agent,
                          int h, RewardFitDiagnostics* diagnostics = nullptr);

// Tabular MLE = empirical conditional frequencies with add-alpha smoothing;
// unseen (c,s,a) rows fall back to uniform and are flagged.
std::vector<double> fit_transition_mle(const OfflineDataset& dataset, int agent, int h,
                                       double alpha,
                                       TransitionFitDiagnostics* diagnostics = nullptr);

// The empirical behavior distribution over agent `agent`'s reward inputs at
// step h, mixed with a uniform floor so conditionals stay strictly positive.
BaseDistribution empirical_base_distribution(const OfflineDataset& dataset, int agent, int h,
                                             double uniform_mix = 1e-6);

// Fitted rewards and transitions for every (agent, step), plus everything the
// actor-critic loop needs that a dataset can provide.
struct LearnedModel {
  GameShape shape;
  std::vector<double> context_dist;                           // empirical rho
  std::vector<std::vector<IrFunction>> rewards;               // [agent][h]
  std::vector<std::vector<std::vector<double>>> transitions;  // [agent][h], flat (c,s,a,s')
  std::vector<std::vector<RewardFitDiagnostics>> reward_diagnostics;
  std::vector<std::vector<TransitionFitDiagnostics>> transition_diagnostics;
  double reward_lo = 0.0, reward_hi = 1.0;  // exact range of the fitted rewards

  void validate() const;
};

LearnedModel fit_model(const OfflineDataset& dataset, const IrClassSpec& spec,
                       double transition_alpha = 0.1);

// The error-free model holding the game's own tables; isolates actor-critic
// dynamics from estimation noise in tests and diagnostics.
LearnedModel exact_model(const DecoupledMarkovGame& game);

// Training distribution over agent `agent`'s reward inputs at step h induced
// by the true (rho, sigma, nu); the base both error metrics and the alignment
// diagnostics standardize against.
BaseDistribution behavior_base_distribution(const DecoupledMarkovGame& game,
                                            const BehaviorPolicy& behavior, int agent, int h);

// Exact population MSE of a fitted reward against the true one under the
// behavior data distribution (rho, sigma, nu).
double population_reward_mse(const DecoupledMarkovGame& game, const BehaviorPolicy& behavior,
                             const IrFunction& fitted, int agent, int h);

// Exact E_{(c,s,a) ~ behavior}[ ||P_hat - P_true||_1^2 ] for one agent/step.
double population_transition_l1sq(const DecoupledMarkovGame& game,
                                  const BehaviorPolicy& behavior,
                                  const std::vector<double>& fitted, int agent, int h);

// Scaling diagnostics: mean population error against dataset size. Returned
// as (M, mean error) rows; pair with loglog_slope to check the 1/M decay.
struct RatePoint {
  int sample_count = 0;
  double mean_error = 0.0;
};
std::vector<RatePoint> rate_audit_lsr(const DecoupledMarkovGame& game,
                                      const BehaviorPolicy& behavior, const IrClassSpec& spec,
                                      const std::vector<int>& m_grid, int trials,
                                      std::uint64_t seed);
std::vector<RatePoint> rate_audit_mle(const DecoupledMarkovGame& game,
                                      const BehaviorPolicy& behavior,
                                      const std::vector<int>& m_grid, int trials,
                                      std::uint64_t seed);

}  // namespace irmarl
