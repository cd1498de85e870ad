#include "irmarl/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "irmarl/common.hpp"

namespace irmarl {

double NoiseSpec::sample(double mean, Rng& rng) const {
  switch (kind) {
    case Kind::None:
      return mean;
    case Kind::AdditiveUniform:
      return mean + rng.uniform(-width, width);
    case Kind::Bernoulli:
      if (mean < -1e-12 || mean > 1.0 + 1e-12)
        throw std::domain_error("NoiseSpec: bernoulli noise requires mean in [0,1]");
      return rng.bernoulli(std::clamp(mean, 0.0, 1.0)) ? 1.0 : 0.0;
  }
  return mean;
}

void GameShape::validate() const {
  require(num_agents >= 1, "GameShape: num_agents must be >= 1");
  require(horizon >= 1, "GameShape: horizon must be >= 1");
  require(context_count >= 1, "GameShape: context_count must be >= 1");
  require(static_cast<int>(state_counts.size()) == num_agents, "GameShape: state_counts size");
  require(static_cast<int>(action_counts.size()) == num_agents, "GameShape: action_counts size");
  require(static_cast<int>(init_states.size()) == num_agents, "GameShape: init_states size");
  for (int i = 0; i < num_agents; ++i) {
    require(state_counts[i] >= 1 && action_counts[i] >= 1, "GameShape: sizes must be >= 1");
    require(init_states[i] >= 0 && init_states[i] < state_counts[i],
            "GameShape: init state out of range");
  }
}

std::vector<SlotDomain> GameShape::reward_slots(int agent) const {
  std::vector<SlotDomain> slots;
  for (int j = 0; j < num_agents; ++j)
    if (j != agent) slots.push_back(SlotDomain{z_size(j)});
  return slots;
}

ProductPolicy ProductPolicy::uniform(const GameShape& shape) {
  ProductPolicy p;
  p.tables.resize(shape.num_agents);
  for (int i = 0; i < shape.num_agents; ++i) {
    p.tables[i].assign(shape.horizon,
                       std::vector<double>(shape.context_count * shape.state_counts[i] *
                                               shape.action_counts[i],
                                           1.0 / shape.action_counts[i]));
  }
  return p;
}

std::span<const double> ProductPolicy::row(const GameShape& shape, int agent, int h, int c,
                                           int s) const {
  const int a = shape.action_counts[agent];
  return {tables[agent][h].data() + (c * shape.state_counts[agent] + s) * a,
          static_cast<std::size_t>(a)};
}

std::span<double> ProductPolicy::row_mut(const GameShape& shape, int agent, int h, int c, int s) {
  const int a = shape.action_counts[agent];
  return {tables[agent][h].data() + (c * shape.state_counts[agent] + s) * a,
          static_cast<std::size_t>(a)};
}

void ProductPolicy::validate(const GameShape& shape) const {
  require(static_cast<int>(tables.size()) == shape.num_agents, "ProductPolicy: agent count");
  for (int i = 0; i < shape.num_agents; ++i) {
    require(static_cast<int>(tables[i].size()) == shape.horizon, "ProductPolicy: horizon");
    const int rows = shape.context_count * shape.state_counts[i];
    for (int h = 0; h < shape.horizon; ++h) {
      require(static_cast<int>(tables[i][h].size()) == rows * shape.action_counts[i],
              "ProductPolicy: table size mismatch");
      for (int r = 0; r < rows; ++r) {
        std::span<const double> row(tables[i][h].data() + r * shape.action_counts[i],
                                    shape.action_counts[i]);
        require(is_probability_vector(row), "ProductPolicy: row is not a probability vector");
      }
    }
  }
}

void MixturePolicy::validate(const GameShape& shape) const {
  require(!components.empty(), "MixturePolicy: needs at least one component");
  for (const auto& c : components) c.validate(shape);
}

void DecoupledMarkovGame::validate() const {
  shape.validate();
  require(static_cast<int>(context_dist.size()) == shape.context_count,
          "Game: context_dist size mismatch");
  require(is_probability_vector(context_dist), "Game: context_dist is not a probability vector");
  require(static_cast<int>(transitions.size()) == shape.num_agents, "Game: transitions per agent");
  require(static_cast<int>(rewards.size()) == shape.num_agents, "Game: rewards per agent");
  require(reward_max >= reward_min, "Game: empty declared reward range");
  for (int i = 0; i < shape.num_agents; ++i) {
    require(static_cast<int>(transitions[i].size()) == shape.horizon, "Game: transitions per step");
    require(static_cast<int>(rewards[i].size()) == shape.horizon, "Game: rewards per step");
    const int rows = shape.context_count * shape.state_counts[i] * shape.action_counts[i];
    for (int h = 0; h < shape.horizon; ++h) {
      require(static_cast<int>(transitions[i][h].size()) == rows * shape.state_counts[i],
              "Game: transition table size mismatch");
      for (int r = 0; r < rows; ++r) {
        std::span<const double> row(transitions[i][h].data() + r * shape.state_counts[i],
                                    shape.state_counts[i]);
        require(is_probability_vector(row), "Game: transition row does not sum to 1");
      }
      const auto& f = rewards[i][h];
      require(f.x_size() == shape.x_size(i), "Game: reward x domain mismatch");
      const auto slots = shape.reward_slots(i);
      require(f.num_slots() == static_cast<int>(slots.size()), "Game: reward slot count mismatch");
      for (std::size_t w = 0; w < slots.size(); ++w)
        require(f.y_domains()[w].size == slots[w].size, "Game: reward slot size mismatch");
    }
  }
}

std::span<const double> DecoupledMarkovGame::transition_row(int agent, int h, int c, int s,
                                                            int a) const {
  const int sn = shape.state_counts[agent];
  const int row = (c * sn + s) * shape.action_counts[agent] + a;
  return {transitions[agent][h].data() + row * sn, static_cast<std::size_t>(sn)};
}

double DecoupledMarkovGame::reward_mean(int agent, int h, int c, std::span<const int> s,
                                        std::span<const int> a) const {
  std::vector<int> y;
  y.reserve(shape.num_agents - 1);
  for (int j = 0; j < shape.num_agents; ++j)
    if (j != agent) y.push_back(shape.z_index(j, s[j], a[j]));
  return rewards[agent][h].evaluate(shape.x_index(agent, c, s[agent], a[agent]), y);
}

DecoupledMarkovGame ContextualGame::to_markov_game() const {
  DecoupledMarkovGame g;
  g.shape.num_agents = num_agents;
  g.shape.horizon = 1;
  g.shape.context_count = context_count;
  g.shape.state_counts.assign(num_agents, 1);
  g.shape.action_counts = action_counts;
  g.shape.init_states.assign(num_agents, 0);
  g.context_dist = context_dist;
  g.transitions.resize(num_agents);
  for (int i = 0; i < num_agents; ++i)
    g.transitions[i] = {std::vector<double>(context_count * action_counts[i], 1.0)};
  g.rewards.resize(num_agents);
  for (int i = 0; i < num_agents; ++i) g.rewards[i] = {rewards[i]};
  g.noise = noise;
  g.reward_min = reward_min;
  g.reward_max = reward_max;
  g.validate();
  return g;
}

Episode sample_episode(const DecoupledMarkovGame& game, const ProductPolicy& policy, Rng& rng) {
  policy.validate(game.shape);
  const auto& shape = game.shape;
  Episode ep;
  ep.context = rng.categorical(game.context_dist);
  std::vector<int> state = shape.init_states;
  for (int h = 0; h < shape.horizon; ++h) {
    std::vector<int> action(shape.num_agents);
    for (int i = 0; i < shape.num_agents; ++i)
      action[i] = rng.categorical(policy.row(shape, i, h, ep.context, state[i]));
    std::vector<double> obs(shape.num_agents);
    for (int i = 0; i < shape.num_agents; ++i)
      obs[i] = game.noise.sample(game.reward_mean(i, h, ep.context, state, action), rng);
    ep.states.push_back(state);
    ep.actions.push_back(action);
    ep.rewards.push_back(std::move(obs));
    for (int i = 0; i < shape.num_agents; ++i)
      state[i] = rng.categorical(game.transition_row(i, h, ep.context, state[i], action[i]));
  }
  return ep;
}

LocalVisitation local_visitation(const GameShape& shape, int agent, int context,
                                 const std::vector<std::vector<double>>& transitions,
                                 const std::vector<std::vector<double>>& policy_tables) {
  require(agent >= 0 && agent < shape.num_agents, "local_visitation: agent index out of range");
  require(context >= 0 && context < shape.context_count, "local_visitation: context out of range");
  const int sn = shape.state_counts[agent];
  const int an = shape.action_counts[agent];
  LocalVisitation vis;
  std::vector<double> d(sn, 0.0);
  d[shape.init_states[agent]] = 1.0;
  for (int h = 0; h < shape.horizon; ++h) {
    std::vector<double> sa(sn * an, 0.0);
    for (int s = 0; s < sn; ++s) {
      const double* pi_row = policy_tables[h].data() + (context * sn + s) * an;
      for (int a = 0; a < an; ++a) sa[s * an + a] = d[s] * pi_row[a];
    }
    std::vector<double> next(sn, 0.0);
    for (int s = 0; s < sn; ++s) {
      for (int a = 0; a < an; ++a) {
        const double w = sa[s * an + a];
        if (w == 0.0) continue;
        const double* p_row = transitions[h].data() + ((context * sn + s) * an + a) * sn;
        for (int sp = 0; sp < sn; ++sp) next[sp] += w * p_row[sp];
      }
    }
    vis.state.push_back(d);
    vis.state_action.push_back(std::move(sa));
    d = std::move(next);
  }
  return vis;
}

LocalVisitation local_visitation(const DecoupledMarkovGame& game, const ProductPolicy& policy,
                                 int agent, int context) {
  return local_visitation(game.shape, agent, context, game.transitions[agent],
                          policy.tables[agent]);
}

std::vector<double> expected_reward_over_others(
    const GameShape& shape, int agent, const IrFunction& reward,
    const std::vector<std::vector<double>>& other_sa_by_agent) {
  // Factored expectation: each sub-function needs only the marginal
  // state-action distributions of the agents it touches.
  const int own = shape.state_counts[agent] * shape.action_counts[agent];
  std::vector<double> acc(reward.x_size(), 0.0);
  std::vector<int> coords;
  for (const auto& [key, table] : reward.tables()) {
    std::vector<int> slot_sizes;
    std::vector<const std::vector<double>*> dists;
    for (int idx : key.indices) {
      const int j = shape.agent_of_slot(agent, idx);
      slot_sizes.push_back(shape.z_size(j));
      dists.push_back(&other_sa_by_agent[j]);
    }
    int table_len = reward.x_size();
    for (int s : slot_sizes) table_len *= s;
    coords.assign(slot_sizes.size(), 0);
    for (int flat = 0; flat < table_len; ++flat) {
      int rem = flat;
      for (int i = static_cast<int>(slot_sizes.size()) - 1; i >= 0; --i) {
        coords[i] = rem % slot_sizes[i];
        rem /= slot_sizes[i];
      }
      const int x = rem;
      const int c = x / own;
      double w = 1.0;
      for (std::size_t i = 0; i < slot_sizes.size(); ++i)
        w *= (*dists[i])[c * slot_sizes[i] + coords[i]];
      acc[x] += w * table[flat];
    }
  }
  return acc;
}

std::vector<double> exact_value_factored(const DecoupledMarkovGame& game,
                                         const ProductPolicy& policy,
                                         const std::vector<std::vector<IrFunction>>& rewards) {
  policy.validate(game.shape);
  const auto& shape = game.shape;
  require(static_cast<int>(rewards.size()) == shape.num_agents,
          "exact_value_factored: rewards per agent");
  std::vector<double> values(shape.num_agents, 0.0);
  for (int c = 0; c < shape.context_count; ++c) {
    if (game.context_dist[c] == 0.0) continue;
    std::vector<LocalVisitation> vis;
    vis.reserve(shape.num_agents);
    for (int j = 0; j < shape.num_agents; ++j)
      vis.push_back(local_visitation(game, policy, j, c));
    for (int h = 0; h < shape.horizon; ++h) {
      std::vector<std::vector<double>> sa_dists(shape.num_agents);
      for (int j = 0; j < shape.num_agents; ++j) {
        // Expand to the (c, z) layout the factored expectation expects.
        sa_dists[j].assign(shape.context_count * shape.z_size(j), 0.0);
        std::copy(vis[j].state_action[h].begin(), vis[j].state_action[h].end(),
                  sa_dists[j].begin() + c * shape.z_size(j));
      }
      for (int i = 0; i < shape.num_agents; ++i) {
        const auto rtilde = expected_reward_over_others(shape, i, rewards[i][h], sa_dists);
        const auto& own = vis[i].state_action[h];
        double step_value = 0.0;
        for (int s = 0; s < shape.state_counts[i]; ++s)
          for (int a = 0; a < shape.action_counts[i]; ++a)
            step_value += own[s * shape.action_counts[i] + a] *
                          rtilde[shape.x_index(i, c, s, a)];
        values[i] += game.context_dist[c] * step_value;
      }
    }
  }
  return values;
}

std::vector<double> exact_value_factored(const DecoupledMarkovGame& game,
                                         const ProductPolicy& policy) {
  return exact_value_factored(game, policy, game.rewards);
}

std::vector<double> exact_value_factored(const DecoupledMarkovGame& game,
                                         const MixturePolicy& policy) {
  policy.validate(game.shape);
  std::vector<double> values(game.shape.num_agents, 0.0);
  for (const auto& comp : policy.components) {
    const auto v = exact_value_factored(game, comp);
    for (int i = 0; i < game.shape.num_agents; ++i) values[i] += v[i];
  }
  for (auto& v : values) v /= static_cast<double>(policy.components.size());
  return values;
}

namespace {

// Joint-space forward DP for one product-policy component.
std::vector<double> bruteforce_component(const DecoupledMarkovGame& game,
                                         const ProductPolicy& policy,
                                         const std::vector<std::vector<IrFunction>>& rewards) {
  const auto& shape = game.shape;
  long long joint_states = 1, joint_actions = 1;
  for (int i = 0; i < shape.num_agents; ++i) {
    joint_states *= shape.state_counts[i];
    joint_actions *= shape.action_counts[i];
  }
  const long long work =
      static_cast<long long>(shape.context_count) * shape.horizon * joint_states * joint_actions *
      joint_states;
  if (work > 10'000'000)
    throw std::invalid_argument("exact_value_bruteforce: instance too large to enumerate");

  auto decode = [&](long long flat, const std::vector<int>& sizes, std::vector<int>& out) {
    for (int i = shape.num_agents - 1; i >= 0; --i) {
      out[i] = static_cast<int>(flat % sizes[i]);
      flat /= sizes[i];
    }
  };

  std::vector<double> values(shape.num_agents, 0.0);
  std::vector<int> s(shape.num_agents), a(shape.num_agents), sp(shape.num_agents);
  for (int c = 0; c < shape.context_count; ++c) {
    if (game.context_dist[c] == 0.0) continue;
    std::vector<double> dist(joint_states, 0.0);
    long long init = 0;
    for (int i = 0; i < shape.num_agents; ++i)
      init = init * shape.state_counts[i] + shape.init_states[i];
    dist[init] = 1.0;
    for (int h = 0; h < shape.horizon; ++h) {
      std::vector<double> next(joint_states, 0.0);
      for (long long js = 0; js < joint_states; ++js) {
        if (dist[js] == 0.0) continue;
        decode(js, shape.state_counts, s);
        for (long long ja = 0; ja < joint_actions; ++ja) {
          decode(ja, shape.action_counts, a);
          double pa = dist[js];
          for (int i = 0; i < shape.num_agents; ++i)
            pa *= policy.row(shape, i, h, c, s[i])[a[i]];
          if (pa == 0.0) continue;
          for (int i = 0; i < shape.num_agents; ++i) {
            std::vector<int> y;
            for (int j = 0; j < shape.num_agents; ++j)
              if (j != i) y.push_back(shape.z_index(j, s[j], a[j]));
            values[i] += game.context_dist[c] * pa *
                         rewards[i][h].evaluate(shape.x_index(i, c, s[i], a[i]), y);
          }
          for (long long jsp = 0; jsp < joint_states; ++jsp) {
            decode(jsp, shape.state_counts, sp);
            double pt = pa;
            for (int i = 0; i < shape.num_agents && pt != 0.0; ++i)
              pt *= game.transition_row(i, h, c, s[i], a[i])[sp[i]];
            next[jsp] += pt;
          }
        }
      }
      dist = std::move(next);
    }
  }
  return values;
}

}  // namespace

std::vector<double> exact_value_bruteforce(const DecoupledMarkovGame& game,
                                           const MixturePolicy& policy,
                                           const std::vector<std::vector<IrFunction>>& rewards) {
  policy.validate(game.shape);
  std::vector<double> values(game.shape.num_agents, 0.0);
  for (const auto& comp : policy.components) {
    const auto v = bruteforce_component(game, comp, rewards);
    for (int i = 0; i < game.shape.num_agents; ++i) values[i] += v[i];
  }
  for (auto& v : values) v /= static_cast<double>(policy.components.size());
  return values;
}

std::vector<double> exact_value_bruteforce(const DecoupledMarkovGame& game,
                                           const MixturePolicy& policy) {
  return exact_value_bruteforce(game, policy, game.rewards);
}

}  // namespace irmarl
