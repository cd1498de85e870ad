#pragma once

#include <cstdint>
#include <vector>

#include "irmarl/mirror_descent.hpp"
#include "irmarl/model_learning.hpp"

namespace irmarl {

enum class CriticMode { ExactDp, MonteCarlo };

struct DracParams {
  int iterations = 1;  // T
  double lambda = 0.1;
  double eta = 0.1;
  CriticMode critic = CriticMode::ExactDp;
  int mc_rollouts = 1000;  // per (agent, step) per iteration in Monte-Carlo mode
  std::uint64_t seed = 0;

  void validate() const;
};

// Q tables for one agent: q[h] flat over (c, s, a).
struct CriticSlice {
  std::vector<std::vector<double>> q;
};

// Exact single-agent critic in the learned model: backward recursion
//   Q_{i,h}(c,s,a) = E_{z_j ~ d_j,h(.|c), j != i}[r_{i,h}] + E_{s' ~ P_{i,h}}[V_{i,h+1}(c,s')]
// with V the `policies[agent]`-average of Q. Other agents enter only through
// their marginal state-action visitations in the model.
CriticSlice critic_exact(const LearnedModel& model, const ProductPolicy& policies, int agent);

// Monte-Carlo critic for one (agent, step): rolls the joint policy in the
// learned model, resets the agent's state from sigma, mixes its action from
// (nu + current policy)/2, and averages returns per (c,s,a) cell. Unvisited
// cells hold 0 and are flagged.
struct MonteCarloCritic {
  std::vector<double> q;       // flat (c,s,a)
  std::vector<int> visits;     // per cell
};
MonteCarloCritic critic_monte_carlo(const LearnedModel& model, const ProductPolicy& policies,
                                    int agent, int h, const BehaviorPolicy& behavior,
                                    int rollouts, std::uint64_t seed);

struct DracTraceRow {
  int iteration = 0;  // 1-based
  int agent = 0;
  int h = 0;
  double max_chi2 = 0.0;  // max over (c,s) cells of chi^2(pi^t, nu)
  double mean_q = 0.0;
  int cell_count = 0;
};

struct DracResult {
  MixturePolicy mixture;
  std::vector<DracTraceRow> trace;
  double gain_bound = 0.0;  // B passed to every actor update
};

// Offline actor-critic: initialize at nu; per iteration evaluate every
// agent's critic, then run the regularized update at every (agent, h, c, s)
// cell; return the uniform mixture of the T iterates.
DracResult run_drac(const LearnedModel& model, const BehaviorPolicy& behavior,
                    const DracParams& params);

// The H = 1 stateless update loop (critic is the expected reward under the
// other agents' current policies). Identical to run_drac on a one-step,
// single-state model; kept as an independent code path for that reduction.
DracResult run_contextual_pg(const LearnedModel& model, const BehaviorPolicy& behavior,
                             const DracParams& params);

enum class ScheduleSetting { ContextualGame, MarkovGame };

struct HyperParams {
  int iterations = 1;
  double eta = 0.0;
  double lambda = 0.0;
};

// Closed-form (T, eta, lambda) schedules; `epsilon` is the reward-fit error
// for the contextual setting and the combined reward/transition error rate
// for the Markov setting. c_s is ignored for the contextual setting.
HyperParams theoretical_hyperparams(ScheduleSetting setting, int rank, int num_agents,
                                    int horizon, double epsilon, double c_s = 1.0);

}  // namespace irmarl
