#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace irmarl {

// The continuous pairwise-product benchmark: N agents with actions in
// [-1,1], true mean reward r_i(a) = sum_j a_i a_j / sqrt(N) plus uniform
// observation noise; data collected by the uniform policy.

enum class CriticArm { Joint, PairwiseIr, SingleIr };

std::string arm_name(CriticArm arm);
CriticArm arm_from_name(const std::string& name);

struct QuadraticConfig {
  int num_agents = 8;
  double noise_width = 1.0;      // sigma
  double sample_coupling = 0.1;  // sigma * N / M; used when sample_count == 0
  int sample_count = 0;
  int actor_steps = 500;
  double actor_lr = 0.02;
  double bc_weight = 0.1;  // L2 pull toward the behavior mean
  double init_spread = 0.01;
  double ridge = 1e-8;

  void validate() const;
  int effective_sample_count() const;
};

struct QuadraticDataset {
  int num_agents = 0;
  std::vector<std::vector<double>> actions;  // [sample][agent]
  std::vector<std::vector<double>> rewards;  // [sample][agent]

  std::vector<double> mean_actions() const;
};

QuadraticDataset generate_quadratic_dataset(int num_agents, int samples, double noise_width,
                                            std::uint64_t seed);

// A fitted critic for one agent; exact linear least squares on the arm's
// feature basis (constant, own-action terms, and per-arm cross terms).
struct QuadraticCritic {
  CriticArm arm = CriticArm::PairwiseIr;
  int num_agents = 0;
  int agent = 0;
  std::vector<double> coef;

  double value(std::span<const double> actions) const;
  double own_gradient(std::span<const double> actions) const;
  // Fitted coefficient of the a_i * a_j product (identically 0 for the
  // single-agent arm).
  double pair_coefficient(int other) const;
};

QuadraticCritic fit_quadratic_critic(const QuadraticDataset& data, CriticArm arm, int agent,
                                     double ridge);

struct QuadraticRun {
  std::vector<double> gap_trace;  // equilibrium gap per actor step (step 0 first)
  std::vector<double> final_actions;
};

// Deterministic-policy ascent on the fitted critics with a behavior-cloning
// pull, all agents updated simultaneously, actions clamped to [-1,1].
QuadraticRun run_quadratic_arm(const QuadraticDataset& data, CriticArm arm,
                               const QuadraticConfig& config, std::uint64_t seed);

}  // namespace irmarl
