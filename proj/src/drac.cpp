#include "irmarl/drac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "irmarl/common.hpp"
#include "irmarl/rng.hpp"

namespace irmarl {

void DracParams::validate() const {
  require(iterations >= 1, "DracParams: iterations must be >= 1");
  require(lambda >= 0.0, "DracParams: lambda must be >= 0");
  require(eta > 0.0, "DracParams: eta must be > 0");
  if (critic == CriticMode::MonteCarlo)
    require(mc_rollouts >= 1, "DracParams: Monte-Carlo mode needs rollouts >= 1");
}

namespace {

// State-action visitations of every agent under `policies` in the learned
// model, expanded to the (c, z) layout used by the factored expectation.
std::vector<std::vector<std::vector<double>>> model_visitations(const LearnedModel& model,
                                                                const ProductPolicy& policies) {
  const auto& shape = model.shape;
  std::vector<std::vector<std::vector<double>>> sa(
      shape.num_agents, std::vector<std::vector<double>>(shape.horizon));
  for (int j = 0; j < shape.num_agents; ++j) {
    for (int h = 0; h < shape.horizon; ++h)
      sa[j][h].assign(shape.context_count * shape.z_size(j), 0.0);
    for (int c = 0; c < shape.context_count; ++c) {
      const auto vis =
          local_visitation(shape, j, c, model.transitions[j], policies.tables[j]);
      for (int h = 0; h < shape.horizon; ++h)
        std::copy(vis.state_action[h].begin(), vis.state_action[h].end(),
                  sa[j][h].begin() + c * shape.z_size(j));
    }
  }
  return sa;  // [agent][h], flat (c, z)
}

}  // namespace

CriticSlice critic_exact(const LearnedModel& model, const ProductPolicy& policies, int agent) {
  const auto& shape = model.shape;
  policies.validate(shape);
  require(agent >= 0 && agent < shape.num_agents, "critic_exact: agent out of range");

  const auto sa = model_visitations(model, policies);

  const int sn = shape.state_counts[agent];
  const int an = shape.action_counts[agent];
  CriticSlice critic;
  critic.q.assign(shape.horizon, std::vector<double>(shape.x_size(agent), 0.0));
  // V at h+1, flat (c, s).
  std::vector<double> value(shape.context_count * sn, 0.0);
  for (int h = shape.horizon - 1; h >= 0; --h) {
    std::vector<std::vector<double>> step_sa(shape.num_agents);
    for (int j = 0; j < shape.num_agents; ++j)
      if (j != agent) step_sa[j] = sa[j][h];
    auto& q = critic.q[h];
    q = expected_reward_over_others(shape, agent, model.rewards[agent][h], step_sa);
    if (h + 1 < shape.horizon) {
      for (int c = 0; c < shape.context_count; ++c) {
        for (int s = 0; s < sn; ++s) {
          for (int a = 0; a < an; ++a) {
            const double* row =
                model.transitions[agent][h].data() + ((c * sn + s) * an + a) * sn;
            double cont = 0.0;
            for (int sp = 0; sp < sn; ++sp) cont += row[sp] * value[c * sn + sp];
            q[shape.x_index(agent, c, s, a)] += cont;
          }
        }
      }
    }
    std::vector<double> new_value(shape.context_count * sn, 0.0);
    for (int c = 0; c < shape.context_count; ++c) {
      for (int s = 0; s < sn; ++s) {
        const auto pi_row = policies.row(shape, agent, h, c, s);
        double v = 0.0;
        for (int a = 0; a < an; ++a) v += pi_row[a] * q[shape.x_index(agent, c, s, a)];
        new_value[c * sn + s] = v;
      }
    }
    value = std::move(new_value);
  }
  return critic;
}

MonteCarloCritic critic_monte_carlo(const LearnedModel& model, const ProductPolicy& policies,
                                    int agent, int h, const BehaviorPolicy& behavior,
                                    int rollouts, std::uint64_t seed) {
  const auto& shape = model.shape;
  policies.validate(shape);
  require(rollouts >= 1, "critic_monte_carlo: rollouts must be >= 1");
  require(h >= 0 && h < shape.horizon, "critic_monte_carlo: step out of range");

  // sigma for the state reset; the visitation default is computed in the
  // learned model since that is all the offline learner has.
  std::vector<std::vector<std::vector<double>>> sigma;
  if (behavior.has_state_dists()) {
    sigma = behavior.state_dists;
  } else {
    sigma.assign(shape.num_agents, std::vector<std::vector<double>>(shape.horizon));
    for (int i = 0; i < shape.num_agents; ++i) {
      for (int hh = 0; hh < shape.horizon; ++hh)
        sigma[i][hh].assign(shape.context_count * shape.state_counts[i], 0.0);
      for (int c = 0; c < shape.context_count; ++c) {
        const auto vis =
            local_visitation(shape, i, c, model.transitions[i], behavior.policy.tables[i]);
        for (int hh = 0; hh < shape.horizon; ++hh)
          std::copy(vis.state[hh].begin(), vis.state[hh].end(),
                    sigma[i][hh].begin() + c * shape.state_counts[i]);
      }
    }
  }

  const int sn = shape.state_counts[agent];
  const int an = shape.action_counts[agent];
  MonteCarloCritic mc;
  mc.q.assign(shape.x_size(agent), 0.0);
  mc.visits.assign(shape.x_size(agent), 0);

  std::vector<int> state(shape.num_agents), action(shape.num_agents);
  std::vector<double> mixed(an);
  for (int m = 0; m < rollouts; ++m) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(m)));
    const int c = rng.categorical(model.context_dist);
    state = shape.init_states;
    // Roll the joint policy to step h.
    for (int hh = 0; hh < h; ++hh) {
      for (int j = 0; j < shape.num_agents; ++j) {
        const int a = rng.categorical(policies.row(shape, j, hh, c, state[j]));
        const int sj = shape.state_counts[j];
        const double* row = model.transitions[j][hh].data() +
                            ((c * sj + state[j]) * shape.action_counts[j] + a) * sj;
        state[j] = rng.categorical({row, static_cast<std::size_t>(sj)});
      }
    }
    // Reset the agent's state from sigma and mix its action with nu.
    state[agent] = rng.categorical(
        {sigma[agent][h].data() + c * sn, static_cast<std::size_t>(sn)});
    {
      const auto nu_row = behavior.policy.row(shape, agent, h, c, state[agent]);
      const auto pi_row = policies.row(shape, agent, h, c, state[agent]);
      for (int a = 0; a < an; ++a) mixed[a] = 0.5 * nu_row[a] + 0.5 * pi_row[a];
    }
    const int cell_s = state[agent];
    const int cell_a = rng.categorical(mixed);

    double ret = 0.0;
    for (int hh = h; hh < shape.horizon; ++hh) {
      for (int j = 0; j < shape.num_agents; ++j) {
        if (j == agent && hh == h)
          action[j] = cell_a;
        else
          action[j] = rng.categorical(policies.row(shape, j, hh, c, state[j]));
      }
      std::vector<int> y;
      for (int j = 0; j < shape.num_agents; ++j)
        if (j != agent) y.push_back(shape.z_index(j, state[j], action[j]));
      ret += model.rewards[agent][hh].evaluate(
          shape.x_index(agent, c, state[agent], action[agent]), y);
      for (int j = 0; j < shape.num_agents; ++j) {
        const int sj = shape.state_counts[j];
        const double* row = model.transitions[j][hh].data() +
                            ((c * sj + state[j]) * shape.action_counts[j] + action[j]) * sj;
        state[j] = rng.categorical({row, static_cast<std::size_t>(sj)});
      }
    }
    const int cell = shape.x_index(agent, c, cell_s, cell_a);
    mc.q[cell] += ret;
    mc.visits[cell] += 1;
  }
  for (int cell = 0; cell < shape.x_size(agent); ++cell)
    if (mc.visits[cell] > 0) mc.q[cell] /= mc.visits[cell];
  return mc;
}

namespace {

DracResult run_actor_critic(const LearnedModel& model, const BehaviorPolicy& behavior,
                            const DracParams& params, bool contextual_path) {
  params.validate();
  model.validate();
  const auto& shape = model.shape;
  behavior.validate(shape);
  if (contextual_path) {
    require(shape.horizon == 1, "run_contextual_pg: horizon must be 1");
    for (int i = 0; i < shape.num_agents; ++i)
      require(shape.state_counts[i] == 1, "run_contextual_pg: stateless agents required");
  }

  DracResult result;
  // Gains lie in [H lo, H hi]; Monte-Carlo mode additionally produces exact
  // zeros for unvisited cells, so its interval must cover 0 as well.
  double gain_lo = shape.horizon * model.reward_lo;
  double gain_hi = shape.horizon * model.reward_hi;
  if (params.critic == CriticMode::MonteCarlo && !contextual_path) {
    gain_lo = std::min(gain_lo, 0.0);
    gain_hi = std::max(gain_hi, 0.0);
  }
  result.gain_bound = std::max(gain_hi - gain_lo, 1e-12);
  const UpdateParams update{params.lambda, params.eta, result.gain_bound};

  ProductPolicy pi = behavior.policy;  // pi^1 = nu
  for (int t = 1; t <= params.iterations; ++t) {
    result.mixture.components.push_back(pi);

    // Critics for every agent under pi^t.
    std::vector<CriticSlice> critics(shape.num_agents);
    if (contextual_path) {
      // One-step critic: the expected reward under the other agents' current
      // policies, directly from the policy tables.
      std::vector<std::vector<double>> sa(shape.num_agents);
      for (int j = 0; j < shape.num_agents; ++j) sa[j] = pi.tables[j][0];
      for (int i = 0; i < shape.num_agents; ++i) {
        critics[i].q.resize(1);
        std::vector<std::vector<double>> others(shape.num_agents);
        for (int j = 0; j < shape.num_agents; ++j)
          if (j != i) others[j] = sa[j];
        critics[i].q[0] = expected_reward_over_others(shape, i, model.rewards[i][0], others);
      }
    } else if (params.critic == CriticMode::ExactDp) {
      for (int i = 0; i < shape.num_agents; ++i) critics[i] = critic_exact(model, pi, i);
    } else {
      for (int i = 0; i < shape.num_agents; ++i) {
        critics[i].q.resize(shape.horizon);
        for (int h = 0; h < shape.horizon; ++h) {
          const auto mc = critic_monte_carlo(
              model, pi, i, h, behavior, params.mc_rollouts,
              mix_seed(params.seed, static_cast<std::uint64_t>(t),
                       static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(h)));
          critics[i].q[h] = mc.q;
        }
      }
    }

    // Trace before updating: chi^2 drift of pi^t and critic summary.
    for (int i = 0; i < shape.num_agents; ++i) {
      for (int h = 0; h < shape.horizon; ++h) {
        DracTraceRow row;
        row.iteration = t;
        row.agent = i;
        row.h = h;
        const int cells = shape.context_count * shape.state_counts[i];
        row.cell_count = cells;
        for (int c = 0; c < shape.context_count; ++c) {
          for (int s = 0; s < shape.state_counts[i]; ++s) {
            row.max_chi2 = std::max(
                row.max_chi2, chi_square(pi.row(shape, i, h, c, s),
                                         behavior.policy.row(shape, i, h, c, s)));
          }
        }
        double qsum = 0.0;
        for (double v : critics[i].q[h]) qsum += v;
        row.mean_q = qsum / static_cast<double>(critics[i].q[h].size());
        result.trace.push_back(row);
      }
    }

    if (t == params.iterations) break;  // pi^{T+1} is never used

    ProductPolicy next = pi;
    for (int i = 0; i < shape.num_agents; ++i) {
      const int an = shape.action_counts[i];
      for (int h = 0; h < shape.horizon; ++h) {
        for (int c = 0; c < shape.context_count; ++c) {
          for (int s = 0; s < shape.state_counts[i]; ++s) {
            std::span<const double> gains(
                critics[i].q[h].data() + shape.x_index(i, c, s, 0), an);
            try {
              const auto updated =
                  regularized_update(gains, pi.row(shape, i, h, c, s),
                                     behavior.policy.row(shape, i, h, c, s), update);
              std::copy(updated.begin(), updated.end(), next.row_mut(shape, i, h, c, s).begin());
            } catch (const std::exception& e) {
              throw std::runtime_error("actor update failed at (agent=" + std::to_string(i) +
                                       ", h=" + std::to_string(h) + ", c=" + std::to_string(c) +
                                       ", s=" + std::to_string(s) + "): " + e.what());
            }
          }
        }
      }
    }
    pi = std::move(next);
  }
  return result;
}

}  // namespace

DracResult run_drac(const LearnedModel& model, const BehaviorPolicy& behavior,
                    const DracParams& params) {
  return run_actor_critic(model, behavior, params, /*contextual_path=*/false);
}

DracResult run_contextual_pg(const LearnedModel& model, const BehaviorPolicy& behavior,
                             const DracParams& params) {
  return run_actor_critic(model, behavior, params, /*contextual_path=*/true);
}

HyperParams theoretical_hyperparams(ScheduleSetting setting, int rank, int num_agents,
                                    int horizon, double epsilon, double c_s) {
  if (rank < 1 || num_agents < 1 || horizon < 1 || !(epsilon > 0.0) || !(c_s > 0.0))
    throw std::domain_error("theoretical_hyperparams: inputs must be positive");
  const double k = static_cast<double>(rank);
  const double two_n2 = 2.0 * num_agents * num_agents;
  // ceil with a headroom for the floating-point closed forms (1/eps^0.2 etc.)
  auto round_up = [](double t) {
    return std::max(1, static_cast<int>(std::ceil(t * (1.0 - 1e-12))));
  };
  HyperParams hp;
  if (setting == ScheduleSetting::ContextualGame) {
    const double denom = 3.0 * k - 1.0;
    hp.iterations =
        round_up(std::pow(two_n2, -(2.0 * k - 2.0) / denom) * std::pow(epsilon, -2.0 / denom));
    hp.lambda = std::pow(two_n2, (k - 1.0) / denom) * std::pow(epsilon, 1.0 / denom);
    hp.eta = hp.lambda;
  } else {
    const double denom = 3.0 * k + 2.0;
    const double hh = static_cast<double>(horizon);
    hp.lambda = std::pow(c_s, k / denom) * std::pow(hh, 3.0 * k / denom) *
                std::pow(two_n2, (k - 1.0) / denom) * std::pow(epsilon, 1.0 / denom);
    hp.eta = hp.lambda / (hh * hh);
    hp.iterations = round_up(hh * hh / (hp.lambda * hp.lambda));
  }
  return hp;
}

}  // namespace irmarl
