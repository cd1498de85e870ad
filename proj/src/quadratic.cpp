#include "irmarl/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "irmarl/common.hpp"
#include "irmarl/gap_eval.hpp"
#include "irmarl/linalg.hpp"
#include "irmarl/rng.hpp"

namespace irmarl {

std::string arm_name(CriticArm arm) {
  switch (arm) {
    case CriticArm::Joint:
      return "joint";
    case CriticArm::PairwiseIr:
      return "2ir";
    case CriticArm::SingleIr:
      return "1ir";
  }
  return "?";
}

CriticArm arm_from_name(const std::string& name) {
  if (name == "joint") return CriticArm::Joint;
  if (name == "2ir") return CriticArm::PairwiseIr;
  if (name == "1ir") return CriticArm::SingleIr;
  throw std::invalid_argument("unknown critic arm '" + name + "' (joint|2ir|1ir)");
}

void QuadraticConfig::validate() const {
  require(num_agents >= 2, "QuadraticConfig: need at least two agents");
  require(noise_width >= 0.0, "QuadraticConfig: noise width must be >= 0");
  require(sample_count > 0 || sample_coupling > 0.0,
          "QuadraticConfig: need a sample count or coupling");
  require(actor_steps >= 1, "QuadraticConfig: actor steps must be >= 1");
  require(actor_lr > 0.0, "QuadraticConfig: actor learning rate must be > 0");
  require(bc_weight >= 0.0, "QuadraticConfig: BC weight must be >= 0");
}

int QuadraticConfig::effective_sample_count() const {
  if (sample_count > 0) return sample_count;
  return std::max(8, static_cast<int>(std::lround(noise_width * num_agents / sample_coupling)));
}

std::vector<double> QuadraticDataset::mean_actions() const {
  std::vector<double> mean(num_agents, 0.0);
  for (const auto& row : actions)
    for (int i = 0; i < num_agents; ++i) mean[i] += row[i];
  for (auto& v : mean) v /= static_cast<double>(actions.size());
  return mean;
}

QuadraticDataset generate_quadratic_dataset(int num_agents, int samples, double noise_width,
                                            std::uint64_t seed) {
  require(num_agents >= 1 && samples >= 1, "generate_quadratic_dataset: bad sizes");
  QuadraticDataset data;
  data.num_agents = num_agents;
  data.actions.resize(samples);
  data.rewards.resize(samples);
  const double scale = 1.0 / std::sqrt(static_cast<double>(num_agents));
  for (int m = 0; m < samples; ++m) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(m)));
    auto& a = data.actions[m];
    a.resize(num_agents);
    for (auto& v : a) v = rng.uniform(-1.0, 1.0);
    double sum = 0.0;
    for (double v : a) sum += v;
    auto& r = data.rewards[m];
    r.resize(num_agents);
    for (int i = 0; i < num_agents; ++i)
      r[i] = a[i] * sum * scale + rng.uniform(-noise_width, noise_width);
  }
  return data;
}

namespace {

// Feature bases (agent i fixed):
//   1ir   : [1, a_i, a_i^2]
//   2ir   : [1, a_i, a_i^2] + per j != i ascending: [a_j, a_i a_j]
//   joint : [1] + [a_j for all j] + [a_j a_k for j <= k]
int feature_count(CriticArm arm, int n) {
  switch (arm) {
    case CriticArm::SingleIr:
      return 3;
    case CriticArm::PairwiseIr:
      return 3 + 2 * (n - 1);
    case CriticArm::Joint:
      return 1 + n + n * (n + 1) / 2;
  }
  return 0;
}

void fill_features(CriticArm arm, int n, int agent, std::span<const double> a,
                   std::vector<double>& f) {
  f.clear();
  switch (arm) {
    case CriticArm::SingleIr:
      f = {1.0, a[agent], a[agent] * a[agent]};
      break;
    case CriticArm::PairwiseIr:
      f = {1.0, a[agent], a[agent] * a[agent]};
      for (int j = 0; j < n; ++j) {
        if (j == agent) continue;
        f.push_back(a[j]);
        f.push_back(a[agent] * a[j]);
      }
      break;
    case CriticArm::Joint:
      f.push_back(1.0);
      for (int j = 0; j < n; ++j) f.push_back(a[j]);
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) f.push_back(a[j] * a[k]);
      break;
  }
}

int joint_pair_index(int n, int j, int k) {  // j <= k
  // offset of the (j,k) product within the joint quadratic block
  return j * n - j * (j - 1) / 2 + (k - j);
}

}  // namespace

double QuadraticCritic::value(std::span<const double> actions) const {
  std::vector<double> f;
  fill_features(arm, num_agents, agent, actions, f);
  double v = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) v += coef[i] * f[i];
  return v;
}

double QuadraticCritic::own_gradient(std::span<const double> actions) const {
  const int n = num_agents;
  const double ai = actions[agent];
  switch (arm) {
    case CriticArm::SingleIr:
      return coef[1] + 2.0 * coef[2] * ai;
    case CriticArm::PairwiseIr: {
      double g = coef[1] + 2.0 * coef[2] * ai;
      int idx = 3;
      for (int j = 0; j < n; ++j) {
        if (j == agent) continue;
        g += coef[idx + 1] * actions[j];
        idx += 2;
      }
      return g;
    }
    case CriticArm::Joint: {
      double g = coef[1 + agent];
      const int quad = 1 + n;
      for (int j = 0; j < n; ++j) {
        const int lo = std::min(j, agent), hi = std::max(j, agent);
        const double c = coef[quad + joint_pair_index(n, lo, hi)];
        g += (j == agent) ? 2.0 * c * ai : c * actions[j];
      }
      return g;
    }
  }
  return 0.0;
}

double QuadraticCritic::pair_coefficient(int other) const {
  if (other == agent) throw std::invalid_argument("pair_coefficient: other == agent");
  switch (arm) {
    case CriticArm::SingleIr:
      return 0.0;
    case CriticArm::PairwiseIr: {
      const int pos = other < agent ? other : other - 1;
      return coef[3 + 2 * pos + 1];
    }
    case CriticArm::Joint: {
      const int lo = std::min(agent, other), hi = std::max(agent, other);
      return coef[1 + num_agents + joint_pair_index(num_agents, lo, hi)];
    }
  }
  return 0.0;
}

QuadraticCritic fit_quadratic_critic(const QuadraticDataset& data, CriticArm arm, int agent,
                                     double ridge) {
  const int n = data.num_agents;
  require(agent >= 0 && agent < n, "fit_quadratic_critic: agent out of range");
  const int p = feature_count(arm, n);
  std::vector<double> normal(static_cast<std::size_t>(p) * p, 0.0), rhs(p, 0.0), f;
  for (std::size_t m = 0; m < data.actions.size(); ++m) {
    fill_features(arm, n, agent, data.actions[m], f);
    const double y = data.rewards[m][agent];
    for (int i = 0; i < p; ++i) {
      rhs[i] += f[i] * y;
      for (int j = 0; j < p; ++j) normal[static_cast<std::size_t>(i) * p + j] += f[i] * f[j];
    }
  }
  for (int d = 0; d < p; ++d) normal[static_cast<std::size_t>(d) * p + d] += ridge;
  QuadraticCritic critic;
  critic.arm = arm;
  critic.num_agents = n;
  critic.agent = agent;
  critic.coef = solve_spd(std::move(normal), rhs, p);
  return critic;
}

QuadraticRun run_quadratic_arm(const QuadraticDataset& data, CriticArm arm,
                               const QuadraticConfig& config, std::uint64_t seed) {
  config.validate();
  const int n = data.num_agents;
  std::vector<QuadraticCritic> critics;
  critics.reserve(n);
  for (int i = 0; i < n; ++i) critics.push_back(fit_quadratic_critic(data, arm, i, config.ridge));

  const auto mean = data.mean_actions();
  Rng rng(mix_seed(seed, 0xAC7ull));
  std::vector<double> pi(n);
  for (int i = 0; i < n; ++i)
    pi[i] = std::clamp(mean[i] + rng.uniform(-config.init_spread, config.init_spread), -1.0, 1.0);

  QuadraticRun run;
  run.gap_trace.reserve(config.actor_steps + 1);
  std::vector<double> grad(n);
  for (int step = 0; step < config.actor_steps; ++step) {
    run.gap_trace.push_back(quadratic_gap(pi));
    for (int i = 0; i < n; ++i)
      grad[i] = critics[i].own_gradient(pi) - 2.0 * config.bc_weight * (pi[i] - mean[i]);
    for (int i = 0; i < n; ++i) pi[i] = std::clamp(pi[i] + config.actor_lr * grad[i], -1.0, 1.0);
  }
  run.gap_trace.push_back(quadratic_gap(pi));
  run.final_actions = std::move(pi);
  return run;
}

}  // namespace irmarl
