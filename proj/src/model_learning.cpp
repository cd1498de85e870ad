#include "irmarl/model_learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "irmarl/common.hpp"
#include "irmarl/linalg.hpp"
#include "irmarl/rng.hpp"

namespace irmarl {

namespace {

constexpr int kDirectSolveLimit = 3000;  // above this, normal equations go matrix-free

// Flat coordinate of a record within the sub-function table for `key`.
int table_coordinate(const GameShape& shape, int agent, const SubsetKey& key,
                     const DatasetRecord& rec) {
  int flat = shape.x_index(agent, rec.context, rec.state[agent], rec.action[agent]);
  for (int slot : key.indices) {
    const int j = shape.agent_of_slot(agent, slot);
    flat = flat * shape.z_size(j) + shape.z_index(j, rec.state[j], rec.action[j]);
  }
  return flat;
}

}  // namespace

void IrClassSpec::validate() const {
  require(rank >= 1, "IrClassSpec: rank must be >= 1");
  require(ridge >= 0.0, "IrClassSpec: ridge must be >= 0");
  for (const auto& key : subsets) {
    require(key.size() < rank, "IrClassSpec: subset size must be < rank");
    require(std::is_sorted(key.indices.begin(), key.indices.end()),
            "IrClassSpec: subset indices must be increasing");
  }
}

std::vector<SubsetKey> IrClassSpec::expand_subsets(int num_slots) const {
  validate();
  if (!subsets.empty()) {
    for (const auto& key : subsets)
      for (int j : key.indices)
        require(j >= 0 && j < num_slots, "IrClassSpec: subset slot out of range");
    return subsets;
  }
  require(num_slots <= 24, "IrClassSpec: too many slots to expand implicitly");
  std::vector<SubsetKey> out;
  for (int mask = 0; mask < (1 << num_slots); ++mask) {
    if (std::popcount(static_cast<unsigned>(mask)) >= rank) continue;
    SubsetKey key;
    for (int j = 0; j < num_slots; ++j)
      if (mask & (1 << j)) key.indices.push_back(j);
    out.push_back(std::move(key));
  }
  std::sort(out.begin(), out.end());
  return out;
}

BaseDistribution empirical_base_distribution(const OfflineDataset& dataset, int agent, int h,
                                             double uniform_mix) {
  const auto& shape = dataset.shape;
  const auto& records = dataset.steps.at(h);
  const int x_size = shape.x_size(agent);
  BaseDistribution base;
  base.x_dist.assign(x_size, 0.0);
  for (int j = 0; j < shape.num_agents; ++j)
    if (j != agent) base.y_cond.push_back(std::vector<double>(x_size * shape.z_size(j), 0.0));

  std::vector<double> x_counts(x_size, 0.0);
  for (const auto& rec : records) {
    const int x = shape.x_index(agent, rec.context, rec.state[agent], rec.action[agent]);
    x_counts[x] += 1.0;
    int slot = 0;
    for (int j = 0; j < shape.num_agents; ++j) {
      if (j == agent) continue;
      base.y_cond[slot][x * shape.z_size(j) + shape.z_index(j, rec.state[j], rec.action[j])] +=
          1.0;
      ++slot;
    }
  }
  const double m = static_cast<double>(records.size());
  for (int x = 0; x < x_size; ++x) base.x_dist[x] = x_counts[x] / m;
  int slot = 0;
  for (int j = 0; j < shape.num_agents; ++j) {
    if (j == agent) continue;
    const int zj = shape.z_size(j);
    for (int x = 0; x < x_size; ++x) {
      for (int z = 0; z < zj; ++z) {
        double emp = x_counts[x] > 0.0 ? base.y_cond[slot][x * zj + z] / x_counts[x] : 1.0 / zj;
        base.y_cond[slot][x * zj + z] = (1.0 - uniform_mix) * emp + uniform_mix / zj;
      }
    }
    ++slot;
  }
  return base;
}

IrFunction fit_reward_lsr(const OfflineDataset& dataset, const IrClassSpec& spec, int agent,
                          int h, RewardFitDiagnostics* diagnostics) {
  dataset.validate();
  const auto& shape = dataset.shape;
  require(agent >= 0 && agent < shape.num_agents, "fit_reward_lsr: agent out of range");
  require(h >= 0 && h < shape.horizon, "fit_reward_lsr: step out of range");
  const auto& records = dataset.steps[h];
  require(!records.empty(), "fit_reward_lsr: no records at this step");

  const int num_slots = shape.num_agents - 1;
  const auto subsets = spec.expand_subsets(num_slots);
  require(!subsets.empty(), "fit_reward_lsr: empty function class");

  // Parameter layout: one dense block per subset.
  std::vector<int> offsets(subsets.size() + 1, 0);
  IrFunction result(shape.x_size(agent), shape.reward_slots(agent), spec.rank);
  for (std::size_t s = 0; s < subsets.size(); ++s)
    offsets[s + 1] = offsets[s] + result.table_size(subsets[s]);
  const int p = offsets.back();

  // Per-record parameter indices (each record activates one entry per subset).
  std::vector<int> feat(subsets.size());
  std::vector<double> rhs(p, 0.0);
  auto record_features = [&](const DatasetRecord& rec) {
    for (std::size_t s = 0; s < subsets.size(); ++s)
      feat[s] = offsets[s] + table_coordinate(shape, agent, subsets[s], rec);
  };

  std::vector<double> theta;
  bool used_cg = false;
  if (p <= kDirectSolveLimit) {
    std::vector<double> normal(static_cast<std::size_t>(p) * p, 0.0);
    for (const auto& rec : records) {
      record_features(rec);
      const double y = rec.reward[agent];
      for (std::size_t s1 = 0; s1 < subsets.size(); ++s1) {
        rhs[feat[s1]] += y;
        for (std::size_t s2 = 0; s2 < subsets.size(); ++s2)
          normal[static_cast<std::size_t>(feat[s1]) * p + feat[s2]] += 1.0;
      }
    }
    for (int d = 0; d < p; ++d) normal[static_cast<std::size_t>(d) * p + d] += spec.ridge;
    theta = solve_spd(std::move(normal), rhs, p);
  } else {
    used_cg = true;
    require(spec.ridge > 0.0, "fit_reward_lsr: matrix-free solve requires ridge > 0");
    for (const auto& rec : records) {
      record_features(rec);
      for (int f : feat) rhs[f] += rec.reward[agent];
    }
    auto apply = [&](std::span<const double> v, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (const auto& rec : records) {
        record_features(rec);
        double u = 0.0;
        for (int f : feat) u += v[f];
        for (int f : feat) out[f] += u;
      }
      for (int d = 0; d < p; ++d) out[d] += spec.ridge * v[d];
    };
    theta = conjugate_gradient(apply, rhs, 1e-12, 5 * p);
  }

  for (std::size_t s = 0; s < subsets.size(); ++s)
    result.set_table(subsets[s],
                     std::vector<double>(theta.begin() + offsets[s], theta.begin() + offsets[s + 1]));

  if (diagnostics) {
    double sse = 0.0;
    for (const auto& rec : records) {
      record_features(rec);
      double pred = 0.0;
      for (int f : feat) pred += theta[f];
      const double d = pred - rec.reward[agent];
      sse += d * d;
    }
    diagnostics->train_mse = sse / static_cast<double>(records.size());
    diagnostics->parameter_count = p;
    diagnostics->used_conjugate_gradient = used_cg;
  }

  return standardize(result, empirical_base_distribution(dataset, agent, h));
}

std::vector<double> fit_transition_mle(const OfflineDataset& dataset, int agent, int h,
                                       double alpha, TransitionFitDiagnostics* diagnostics) {
  const auto& shape = dataset.shape;
  require(agent >= 0 && agent < shape.num_agents, "fit_transition_mle: agent out of range");
  require(h >= 0 && h < shape.horizon, "fit_transition_mle: step out of range");
  require(alpha >= 0.0, "fit_transition_mle: smoothing must be >= 0");
  const auto& records = dataset.steps.at(h);
  require(!records.empty(), "fit_transition_mle: no records at this step");

  const int sn = shape.state_counts[agent];
  const int rows = shape.context_count * sn * shape.action_counts[agent];
  std::vector<double> counts(static_cast<std::size_t>(rows) * sn, 0.0);
  for (const auto& rec : records) {
    const int row = shape.x_index(agent, rec.context, rec.state[agent], rec.action[agent]);
    counts[static_cast<std::size_t>(row) * sn + rec.next_state[agent]] += 1.0;
  }

  std::vector<double> table(static_cast<std::size_t>(rows) * sn, 0.0);
  double loglik = 0.0;
  std::vector<int> unseen;
  for (int row = 0; row < rows; ++row) {
    double n = 0.0;
    for (int sp = 0; sp < sn; ++sp) n += counts[static_cast<std::size_t>(row) * sn + sp];
    if (n == 0.0) {
      unseen.push_back(row);
      for (int sp = 0; sp < sn; ++sp)
        table[static_cast<std::size_t>(row) * sn + sp] = 1.0 / sn;
      continue;
    }
    for (int sp = 0; sp < sn; ++sp) {
      table[static_cast<std::size_t>(row) * sn + sp] =
          (counts[static_cast<std::size_t>(row) * sn + sp] + alpha) / (n + alpha * sn);
    }
  }
  for (const auto& rec : records) {
    const int row = shape.x_index(agent, rec.context, rec.state[agent], rec.action[agent]);
    loglik += std::log(
        std::max(table[static_cast<std::size_t>(row) * sn + rec.next_state[agent]], 1e-300));
  }
  if (diagnostics) {
    diagnostics->log_likelihood = loglik;
    diagnostics->unseen_rows = std::move(unseen);
  }
  return table;
}

void LearnedModel::validate() const {
  shape.validate();
  require(static_cast<int>(context_dist.size()) == shape.context_count,
          "LearnedModel: context_dist size");
  require(is_probability_vector(context_dist, 1e-9), "LearnedModel: context_dist not normalized");
  require(static_cast<int>(rewards.size()) == shape.num_agents, "LearnedModel: rewards per agent");
  require(static_cast<int>(transitions.size()) == shape.num_agents,
          "LearnedModel: transitions per agent");
  require(reward_hi >= reward_lo, "LearnedModel: empty reward range");
}

namespace {

// Exact extrema of an IR function over its full input product space, used to
// bound the critic gains. Falls back to the per-table sum bound when the
// involved product space is too large to enumerate.
std::pair<double, double> ir_function_range(const IrFunction& f) {
  std::vector<int> involved;
  for (const auto& [key, values] : f.tables())
    for (int j : key.indices)
      if (std::find(involved.begin(), involved.end(), j) == involved.end())
        involved.push_back(j);
  std::sort(involved.begin(), involved.end());
  long long space = f.x_size();
  for (int j : involved) space *= f.y_domains()[j].size;
  if (space > 1'000'000) {
    double lo = 0.0, hi = 0.0;
    for (const auto& [key, values] : f.tables()) {
      lo += *std::min_element(values.begin(), values.end());
      hi += *std::max_element(values.begin(), values.end());
    }
    return {lo, hi};
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<int> y(f.num_slots(), 0);
  for (int x = 0; x < f.x_size(); ++x) {
    std::fill(y.begin(), y.end(), 0);
    while (true) {
      const double v = f.evaluate(x, y);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      int i = static_cast<int>(involved.size()) - 1;
      for (; i >= 0; --i) {
        if (++y[involved[i]] < f.y_domains()[involved[i]].size) break;
        y[involved[i]] = 0;
      }
      if (i < 0) break;
    }
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  return {lo, hi};
}

}  // namespace

LearnedModel fit_model(const OfflineDataset& dataset, const IrClassSpec& spec,
                       double transition_alpha) {
  dataset.validate();
  LearnedModel model;
  model.shape = dataset.shape;
  const auto& shape = model.shape;

  model.context_dist.assign(shape.context_count, 0.0);
  long long total = 0;
  for (const auto& step : dataset.steps) {
    for (const auto& rec : step) {
      model.context_dist[rec.context] += 1.0;
      ++total;
    }
  }
  for (auto& v : model.context_dist) v /= static_cast<double>(total);

  model.rewards.resize(shape.num_agents);
  model.transitions.resize(shape.num_agents);
  model.reward_diagnostics.resize(shape.num_agents);
  model.transition_diagnostics.resize(shape.num_agents);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < shape.num_agents; ++i) {
    model.rewards[i].reserve(shape.horizon);
    model.reward_diagnostics[i].resize(shape.horizon);
    model.transition_diagnostics[i].resize(shape.horizon);
    for (int h = 0; h < shape.horizon; ++h) {
      model.rewards[i].push_back(
          fit_reward_lsr(dataset, spec, i, h, &model.reward_diagnostics[i][h]));
      model.transitions[i].push_back(
          fit_transition_mle(dataset, i, h, transition_alpha, &model.transition_diagnostics[i][h]));
      const auto [rlo, rhi] = ir_function_range(model.rewards[i].back());
      lo = std::min(lo, rlo);
      hi = std::max(hi, rhi);
    }
  }
  model.reward_lo = lo;
  model.reward_hi = std::max(hi, lo);
  model.validate();
  return model;
}

LearnedModel exact_model(const DecoupledMarkovGame& game) {
  game.validate();
  LearnedModel model;
  model.shape = game.shape;
  model.context_dist = game.context_dist;
  model.rewards = game.rewards;
  model.transitions = game.transitions;
  model.reward_diagnostics.assign(game.shape.num_agents,
                                  std::vector<RewardFitDiagnostics>(game.shape.horizon));
  model.transition_diagnostics.assign(game.shape.num_agents,
                                      std::vector<TransitionFitDiagnostics>(game.shape.horizon));
  model.reward_lo = game.reward_min;
  model.reward_hi = game.reward_max;
  return model;
}

namespace {

// Training distribution over agent `agent`'s reward inputs at step h induced
// by (rho, sigma, nu).
BaseDistribution behavior_base(const DecoupledMarkovGame& game, const BehaviorPolicy& behavior,
                               const std::vector<std::vector<std::vector<double>>>& sigma,
                               int agent, int h) {
  const auto& shape = game.shape;
  BaseDistribution base;
  base.x_dist.assign(shape.x_size(agent), 0.0);
  for (int c = 0; c < shape.context_count; ++c) {
    for (int s = 0; s < shape.state_counts[agent]; ++s) {
      const double ps = sigma[agent][h][c * shape.state_counts[agent] + s];
      const auto nu_row = behavior.policy.row(shape, agent, h, c, s);
      for (int a = 0; a < shape.action_counts[agent]; ++a)
        base.x_dist[shape.x_index(agent, c, s, a)] = game.context_dist[c] * ps * nu_row[a];
    }
  }
  for (int j = 0; j < shape.num_agents; ++j) {
    if (j == agent) continue;
    std::vector<double> cond(static_cast<std::size_t>(shape.x_size(agent)) * shape.z_size(j));
    for (int x = 0; x < shape.x_size(agent); ++x) {
      const int c = x / (shape.state_counts[agent] * shape.action_counts[agent]);
      for (int s = 0; s < shape.state_counts[j]; ++s) {
        const double ps = sigma[j][h][c * shape.state_counts[j] + s];
        const auto nu_row = behavior.policy.row(shape, j, h, c, s);
        for (int a = 0; a < shape.action_counts[j]; ++a)
          cond[static_cast<std::size_t>(x) * shape.z_size(j) + shape.z_index(j, s, a)] =
              ps * nu_row[a];
      }
    }
    base.y_cond.push_back(std::move(cond));
  }
  return base;
}

}  // namespace

BaseDistribution behavior_base_distribution(const DecoupledMarkovGame& game,
                                            const BehaviorPolicy& behavior, int agent, int h) {
  const auto sigma = behavior.effective_state_dists(game);
  return behavior_base(game, behavior, sigma, agent, h);
}

double population_reward_mse(const DecoupledMarkovGame& game, const BehaviorPolicy& behavior,
                             const IrFunction& fitted, int agent, int h) {
  return shifted_mse(game.rewards[agent][h], fitted,
                     behavior_base_distribution(game, behavior, agent, h));
}

double population_transition_l1sq(const DecoupledMarkovGame& game,
                                  const BehaviorPolicy& behavior,
                                  const std::vector<double>& fitted, int agent, int h) {
  const auto& shape = game.shape;
  const auto sigma = behavior.effective_state_dists(game);
  const int sn = shape.state_counts[agent];
  double total = 0.0;
  for (int c = 0; c < shape.context_count; ++c) {
    for (int s = 0; s < sn; ++s) {
      const double ps = game.context_dist[c] * sigma[agent][h][c * sn + s];
      if (ps == 0.0) continue;
      const auto nu_row = behavior.policy.row(shape, agent, h, c, s);
      for (int a = 0; a < shape.action_counts[agent]; ++a) {
        const double w = ps * nu_row[a];
        if (w == 0.0) continue;
        const auto true_row = game.transition_row(agent, h, c, s, a);
        const int row = shape.x_index(agent, c, s, a);
        double l1 = 0.0;
        for (int sp = 0; sp < sn; ++sp)
          l1 += std::abs(fitted[static_cast<std::size_t>(row) * sn + sp] - true_row[sp]);
        total += w * l1 * l1;
      }
    }
  }
  return total;
}

std::vector<RatePoint> rate_audit_lsr(const DecoupledMarkovGame& game,
                                      const BehaviorPolicy& behavior, const IrClassSpec& spec,
                                      const std::vector<int>& m_grid, int trials,
                                      std::uint64_t seed) {
  std::vector<RatePoint> out;
  for (int m : m_grid) {
    double total = 0.0;
    int count = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const auto ds = generate_dataset(game, behavior, m,
                                       mix_seed(seed, static_cast<std::uint64_t>(m),
                                                static_cast<std::uint64_t>(trial)));
      for (int i = 0; i < game.shape.num_agents; ++i) {
        for (int h = 0; h < game.shape.horizon; ++h) {
          const auto fit = fit_reward_lsr(ds, spec, i, h);
          total += population_reward_mse(game, behavior, fit, i, h);
          ++count;
        }
      }
    }
    out.push_back({m, total / count});
  }
  return out;
}

std::vector<RatePoint> rate_audit_mle(const DecoupledMarkovGame& game,
                                      const BehaviorPolicy& behavior,
                                      const std::vector<int>& m_grid, int trials,
                                      std::uint64_t seed) {
  std::vector<RatePoint> out;
  for (int m : m_grid) {
    double total = 0.0;
    int count = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const auto ds = generate_dataset(game, behavior, m,
                                       mix_seed(seed, static_cast<std::uint64_t>(m),
                                                static_cast<std::uint64_t>(trial), 17ull));
      for (int i = 0; i < game.shape.num_agents; ++i) {
        for (int h = 0; h < game.shape.horizon; ++h) {
          const auto fit = fit_transition_mle(ds, i, h, 0.0);
          total += population_transition_l1sq(game, behavior, fit, i, h);
          ++count;
        }
      }
    }
    out.push_back({m, total / count});
  }
  return out;
}

}  // namespace irmarl
