#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irmarl/ir_function.hpp"
#include "irmarl/rng.hpp"

namespace irmarl {

// Reward-observation noise. Bernoulli keeps observations in {0,1} with the
// right mean (for games whose rewards live in [0,1]); additive uniform is
// mean-preserving on unbounded ranges.
struct NoiseSpec {
  enum class Kind { None, AdditiveUniform, Bernoulli };
  Kind kind = Kind::None;
  double width = 0.0;  // half-width of the additive uniform noise

  double sample(double mean, Rng& rng) const;
};

// Shape of a game, without any of its tables. Carried by datasets and learned
// models so fitting never needs the true game.
struct GameShape {
  int num_agents = 1;
  int horizon = 1;
  int context_count = 1;
  std::vector<int> state_counts;
  std::vector<int> action_counts;
  std::vector<int> init_states;

  int x_size(int agent) const {
    return context_count * state_counts[agent] * action_counts[agent];
  }
  int x_index(int agent, int c, int s, int a) const {
    return (c * state_counts[agent] + s) * action_counts[agent] + a;
  }
  int z_size(int agent) const { return state_counts[agent] * action_counts[agent]; }
  int z_index(int agent, int s, int a) const { return s * action_counts[agent] + a; }
  // Slot position of agent `other` within agent `self`'s reward function
  // (others are ordered by increasing agent index, skipping self).
  int slot_of(int self, int other) const { return other < self ? other : other - 1; }
  int agent_of_slot(int self, int slot) const { return slot < self ? slot : slot + 1; }
  std::vector<SlotDomain> reward_slots(int agent) const;

  bool operator==(const GameShape&) const = default;
  void validate() const;
};

// Per-agent local policy tables pi[i][h]: row-major (c, s) -> distribution
// over actions. Contexts/states the game never reaches still carry rows.
struct ProductPolicy {
  std::vector<std::vector<std::vector<double>>> tables;  // [agent][h], flat (c,s,a)

  static ProductPolicy uniform(const GameShape& shape);
  std::span<const double> row(const GameShape& shape, int agent, int h, int c, int s) const;
  std::span<double> row_mut(const GameShape& shape, int agent, int h, int c, int s);
  void validate(const GameShape& shape) const;
};

struct MixturePolicy {
  std::vector<ProductPolicy> components;  // uniform weights, size >= 1

  static MixturePolicy single(ProductPolicy p) { return MixturePolicy{{std::move(p)}}; }
  void validate(const GameShape& shape) const;
};

// Finite Markov game with decoupled per-agent transitions: each agent's local
// state evolves from (context, own state, own action) alone; rewards couple
// agents through per-agent interaction-rank functions over
// x = (c, s_i, a_i) and slots z_j = (s_j, a_j) for j != i.
struct DecoupledMarkovGame {
  GameShape shape;
  std::vector<double> context_dist;                          // rho
  std::vector<std::vector<std::vector<double>>> transitions; // [agent][h], flat (c,s,a,s')
  std::vector<std::vector<IrFunction>> rewards;              // [agent][h]
  NoiseSpec noise;
  double reward_min = 0.0, reward_max = 1.0;  // declared range of mean rewards

  void validate() const;
  double reward_range_width() const { return reward_max - reward_min; }
  std::span<const double> transition_row(int agent, int h, int c, int s, int a) const;
  // Mean reward of `agent` at step h for a joint (s, a) profile.
  double reward_mean(int agent, int h, int c, std::span<const int> s,
                     std::span<const int> a) const;
};

// One-step stateless game with a public context; the H = 1, |S_i| = 1 special
// case of the Markov game. Reward x slot is (c, a_i), slots are other agents'
// actions.
struct ContextualGame {
  int num_agents = 1;
  int context_count = 1;
  std::vector<double> context_dist;
  std::vector<int> action_counts;
  std::vector<IrFunction> rewards;  // per agent
  NoiseSpec noise;
  double reward_min = 0.0, reward_max = 1.0;

  DecoupledMarkovGame to_markov_game() const;
};

struct Episode {
  int context = 0;
  std::vector<std::vector<int>> states;    // [h][agent]
  std::vector<std::vector<int>> actions;   // [h][agent]
  std::vector<std::vector<double>> rewards;  // [h][agent], observed (noisy)
};

Episode sample_episode(const DecoupledMarkovGame& game, const ProductPolicy& policy, Rng& rng);

// Local state(-action) visitation of one agent under its own policy slice and
// a fixed context; forward recursion from the fixed initial state.
struct LocalVisitation {
  std::vector<std::vector<double>> state;         // [h], flat (s)
  std::vector<std::vector<double>> state_action;  // [h], flat (s,a)
};

// `transitions` is the per-step table for this agent, flat (c,s,a,s'); pass
// either the true game's or a learned model's.
LocalVisitation local_visitation(const GameShape& shape, int agent, int context,
                                 const std::vector<std::vector<double>>& transitions,
                                 const std::vector<std::vector<double>>& policy_tables);

LocalVisitation local_visitation(const DecoupledMarkovGame& game, const ProductPolicy& policy,
                                 int agent, int context);

// r_tilde(c, s_i, a_i) = E_{z_j ~ d_j(.|c) for j != i}[r_i(c, s, a)] as a flat
// vector over x. `other_sa_by_agent[j]` is agent j's state-action distribution
// at the step in question, flat (c, z_j); the entry for `agent` is unused.
std::vector<double> expected_reward_over_others(
    const GameShape& shape, int agent, const IrFunction& reward,
    const std::vector<std::vector<double>>& other_sa_by_agent);

// Exact per-agent values E_rho[V_{i,1}] via the decoupling: expectations of
// reward sub-functions factor across the involved agents' local visitations.
std::vector<double> exact_value_factored(const DecoupledMarkovGame& game,
                                         const ProductPolicy& policy,
                                         const std::vector<std::vector<IrFunction>>& rewards);
std::vector<double> exact_value_factored(const DecoupledMarkovGame& game,
                                         const ProductPolicy& policy);
std::vector<double> exact_value_factored(const DecoupledMarkovGame& game,
                                         const MixturePolicy& policy);

// Test oracle: exact expectation by joint-space dynamic programming over all
// context/state/action profiles. Throws when the joint space exceeds
// ~10^7 entries. Accepts mixtures (component average).
std::vector<double> exact_value_bruteforce(const DecoupledMarkovGame& game,
                                           const MixturePolicy& policy,
                                           const std::vector<std::vector<IrFunction>>& rewards);
std::vector<double> exact_value_bruteforce(const DecoupledMarkovGame& game,
                                           const MixturePolicy& policy);

}  // namespace irmarl
