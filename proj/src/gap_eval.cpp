#include "irmarl/gap_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "irmarl/common.hpp"

namespace irmarl {

ProductPolicy BestResponse::as_product_policy(const GameShape& shape, const ProductPolicy& base,
                                              int agent) const {
  ProductPolicy out = base;
  for (int h = 0; h < shape.horizon; ++h) {
    std::fill(out.tables[agent][h].begin(), out.tables[agent][h].end(), 0.0);
    for (int c = 0; c < shape.context_count; ++c)
      for (int s = 0; s < shape.state_counts[agent]; ++s)
        out.row_mut(shape, agent, h, c, s)[action[h][c * shape.state_counts[agent] + s]] = 1.0;
  }
  return out;
}

BestResponse best_response(const DecoupledMarkovGame& game, const MixturePolicy& policy,
                           int agent) {
  game.validate();
  policy.validate(game.shape);
  const auto& shape = game.shape;
  require(agent >= 0 && agent < shape.num_agents, "best_response: agent out of range");
  const int sn = shape.state_counts[agent];
  const int an = shape.action_counts[agent];

  // Component-averaged single-agent reward:
  //   r_tilde_{h}(c,s,a) = (1/T) sum_t E_{z_j ~ d^{pi^t_j}_h(.|c), j != i}[r_{i,h}].
  std::vector<std::vector<double>> rtilde(shape.horizon,
                                          std::vector<double>(shape.x_size(agent), 0.0));
  for (const auto& comp : policy.components) {
    std::vector<std::vector<std::vector<double>>> sa(
        shape.num_agents, std::vector<std::vector<double>>(shape.horizon));
    for (int j = 0; j < shape.num_agents; ++j) {
      if (j == agent) continue;
      for (int h = 0; h < shape.horizon; ++h)
        sa[j][h].assign(shape.context_count * shape.z_size(j), 0.0);
      for (int c = 0; c < shape.context_count; ++c) {
        const auto vis = local_visitation(game, comp, j, c);
        for (int h = 0; h < shape.horizon; ++h)
          std::copy(vis.state_action[h].begin(), vis.state_action[h].end(),
                    sa[j][h].begin() + c * shape.z_size(j));
      }
    }
    for (int h = 0; h < shape.horizon; ++h) {
      std::vector<std::vector<double>> step_sa(shape.num_agents);
      for (int j = 0; j < shape.num_agents; ++j)
        if (j != agent) step_sa[j] = sa[j][h];
      const auto r = expected_reward_over_others(shape, agent, game.rewards[agent][h], step_sa);
      for (std::size_t x = 0; x < r.size(); ++x) rtilde[h][x] += r[x];
    }
  }
  const double inv_t = 1.0 / static_cast<double>(policy.components.size());
  for (auto& step : rtilde)
    for (auto& v : step) v *= inv_t;

  // Backward DP on the agent's local model; deterministic argmax deviation.
  BestResponse br;
  br.action.assign(shape.horizon, std::vector<int>(shape.context_count * sn, 0));
  std::vector<double> value(shape.context_count * sn, 0.0);
  for (int h = shape.horizon - 1; h >= 0; --h) {
    std::vector<double> new_value(shape.context_count * sn, 0.0);
    for (int c = 0; c < shape.context_count; ++c) {
      for (int s = 0; s < sn; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < an; ++a) {
          double q = rtilde[h][shape.x_index(agent, c, s, a)];
          if (h + 1 < shape.horizon) {
            const auto row = game.transition_row(agent, h, c, s, a);
            for (int sp = 0; sp < sn; ++sp) q += row[sp] * value[c * sn + sp];
          }
          if (q > best) {
            best = q;
            best_a = a;
          }
        }
        new_value[c * sn + s] = best;
        br.action[h][c * sn + s] = best_a;
      }
    }
    value = std::move(new_value);
  }
  br.value = 0.0;
  for (int c = 0; c < shape.context_count; ++c)
    br.value += game.context_dist[c] * value[c * sn + shape.init_states[agent]];
  return br;
}

GapReport evaluate_gap(const DecoupledMarkovGame& game, const MixturePolicy& policy) {
  GapReport report;
  report.policy_value = exact_value_factored(game, policy);
  const int n = game.shape.num_agents;
  report.best_response_value.resize(n);
  report.gap.resize(n);
  report.max_gap = -std::numeric_limits<double>::infinity();
  std::vector<BestResponse> responses(n);
  for (int i = 0; i < n; ++i) {
    responses[i] = best_response(game, policy, i);
    report.best_response_value[i] = responses[i].value;
    report.gap[i] = responses[i].value - report.policy_value[i];
    // The best response can never fall below the policy's own value.
    require(report.gap[i] >= -1e-9, "evaluate_gap: negative gap, internal inconsistency");
    if (report.gap[i] > report.max_gap) {
      report.max_gap = report.gap[i];
      report.argmax_agent = i;
    }
  }
  report.argmax_deviation = responses[report.argmax_agent];
  return report;
}

double quadratic_gap(std::span<const double> actions) {
  const int n = static_cast<int>(actions.size());
  require(n >= 1, "quadratic_gap: empty action profile");
  double sum = 0.0;
  for (double a : actions) {
    if (a < -1.0 - 1e-12 || a > 1.0 + 1e-12)
      throw std::domain_error("quadratic_gap: actions must lie in [-1,1]");
    sum += a;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double others = sum - actions[i];
    // Quadratic in a with positive leading coefficient: max at an endpoint.
    const double dev = std::max(1.0 + others, 1.0 - others);
    worst = std::max(worst, dev - actions[i] * sum);
  }
  return worst;
}

}  // namespace irmarl
