#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irmarl/game.hpp"
#include "irmarl/rng.hpp"
#include "irmarl/verify.hpp"

using namespace irmarl;

namespace {

// Two agents, one context, two actions, H = 1; agent 0 scores 1 when the
// actions match, agent 1 always scores 0.
DecoupledMarkovGame matching_game() {
  DecoupledMarkovGame g;
  g.shape.num_agents = 2;
  g.shape.horizon = 1;
  g.shape.context_count = 1;
  g.shape.state_counts = {1, 1};
  g.shape.action_counts = {2, 2};
  g.shape.init_states = {0, 0};
  g.context_dist = {1.0};
  g.transitions = {{std::vector<double>(2, 1.0)}, {std::vector<double>(2, 1.0)}};
  IrFunction r0(2, {SlotDomain{2}}, 2);
  r0.set_table(SubsetKey{{0}}, {1.0, 0.0, 0.0, 1.0});
  IrFunction r1(2, {SlotDomain{2}}, 2);
  r1.set_table(SubsetKey{}, {0.0, 0.0});
  g.rewards = {{r0}, {r1}};
  g.noise.kind = NoiseSpec::Kind::None;
  g.validate();
  return g;
}

DecoupledMarkovGame deterministic_chain_game() {
  // One agent, two states, deterministic s0 -> s1 under every action, H = 2.
  DecoupledMarkovGame g;
  g.shape.num_agents = 1;
  g.shape.horizon = 2;
  g.shape.context_count = 1;
  g.shape.state_counts = {2};
  g.shape.action_counts = {2};
  g.shape.init_states = {0};
  g.context_dist = {1.0};
  std::vector<double> step(2 * 2 * 2, 0.0);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) step[(s * 2 + a) * 2 + 1] = 1.0;  // always to s1
  g.transitions = {{step, step}};
  IrFunction r(4, {}, 1);
  r.set_table(SubsetKey{}, {0.25, 0.5, 0.75, 1.0});  // value = x index scaled
  g.rewards = {{r, r}};
  g.noise.kind = NoiseSpec::Kind::None;
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("deterministic game yields the unique trajectory") {
  auto g = deterministic_chain_game();
  ProductPolicy pi = ProductPolicy::uniform(g.shape);
  // Make the policy deterministic: always action 1.
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s) {
      auto row = pi.row_mut(g.shape, 0, h, 0, s);
      row[0] = 0.0;
      row[1] = 1.0;
    }
  Rng rng(42);
  const auto ep = sample_episode(g, pi, rng);
  CHECK(ep.context == 0);
  CHECK(ep.states[0][0] == 0);
  CHECK(ep.states[1][0] == 1);
  CHECK(ep.actions[0][0] == 1);
  CHECK(ep.actions[1][0] == 1);
  // (s=0,a=1) -> x=1 -> 0.5; (s=1,a=1) -> x=3 -> 1.0
  CHECK(ep.rewards[0][0] == doctest::Approx(0.5));
  CHECK(ep.rewards[1][0] == doctest::Approx(1.0));
}

TEST_CASE("H=1 episode is just (context, actions, rewards)") {
  auto g = matching_game();
  ProductPolicy pi = ProductPolicy::uniform(g.shape);
  Rng rng(1);
  const auto ep = sample_episode(g, pi, rng);
  CHECK(ep.states.size() == 1);
  CHECK(ep.actions.size() == 1);
  CHECK(ep.states[0] == std::vector<int>{0, 0});
}

TEST_CASE("episode mean reward concentrates around the exact value") {
  Rng game_rng(33);
  auto g = random_game(game_rng, 2, 2, 2, 2, 2, 2);
  g.noise.kind = NoiseSpec::Kind::Bernoulli;
  const auto pi = random_policy(game_rng, g.shape, 0.3);
  const auto exact = exact_value_factored(g, pi);

  const int n = 100000;
  std::vector<double> sums(g.shape.num_agents, 0.0), sq(g.shape.num_agents, 0.0);
  Rng rng(77);
  for (int e = 0; e < n; ++e) {
    const auto ep = sample_episode(g, pi, rng);
    for (int i = 0; i < g.shape.num_agents; ++i) {
      double ret = 0.0;
      for (int h = 0; h < g.shape.horizon; ++h) ret += ep.rewards[h][i];
      sums[i] += ret;
      sq[i] += ret * ret;
    }
  }
  for (int i = 0; i < g.shape.num_agents; ++i) {
    const double mean = sums[i] / n;
    const double var = sq[i] / n - mean * mean;
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - exact[i]) <= 5.0 * se + 1e-12);
  }
}

TEST_CASE("local visitation base cases") {
  auto g = matching_game();
  const auto pi = ProductPolicy::uniform(g.shape);
  const auto vis = local_visitation(g, pi, 0, 0);
  CHECK(vis.state_action[0][0] == doctest::Approx(0.5));
  CHECK(vis.state_action[0][1] == doctest::Approx(0.5));

  auto chain = deterministic_chain_game();
  const auto cvis = local_visitation(chain, ProductPolicy::uniform(chain.shape), 0, 0);
  CHECK(cvis.state[0][0] == doctest::Approx(1.0));
  CHECK(cvis.state[1][1] == doctest::Approx(1.0));  // d_2(s1) = 1

  // Uniform two-state transition: d_2 = (0.5, 0.5).
  auto u = deterministic_chain_game();
  u.transitions[0][0].assign(8, 0.5);
  u.transitions[0][1].assign(8, 0.5);
  const auto uvis = local_visitation(u, ProductPolicy::uniform(u.shape), 0, 0);
  CHECK(uvis.state[1][0] == doctest::Approx(0.5));
  CHECK(uvis.state[1][1] == doctest::Approx(0.5));
  // Mass conservation at every step.
  for (const auto& d : uvis.state_action) {
    double sum = 0.0;
    for (double v : d) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("matching game under uniform play is worth one half") {
  auto g = matching_game();
  const auto pi = ProductPolicy::uniform(g.shape);
  const auto v = exact_value_factored(g, pi);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == doctest::Approx(0.0));
}

TEST_CASE("zero rewards value to zero") {
  auto g = matching_game();
  IrFunction zero(2, {SlotDomain{2}}, 2);
  std::vector<std::vector<IrFunction>> rewards = {{zero}, {zero}};
  const auto v = exact_value_factored(g, ProductPolicy::uniform(g.shape), rewards);
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(0.0));
}

TEST_CASE("factored and brute-force values agree on random instances") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = random_game(rng, 2 + rng.uniform_int(2), 1 + rng.uniform_int(3),
                               1 + rng.uniform_int(2), 3, 3, 2);
    MixturePolicy mix;
    const int comps = 1 + rng.uniform_int(2);
    for (int t = 0; t < comps; ++t) mix.components.push_back(random_policy(rng, g.shape, 0.2));
    const auto fact = exact_value_factored(g, mix);
    const auto brute = exact_value_bruteforce(g, mix);
    for (int i = 0; i < g.shape.num_agents; ++i)
      CHECK(fact[i] == doctest::Approx(brute[i]).epsilon(1e-9));
  }
}

TEST_CASE("mixture of identical components equals the single policy") {
  Rng rng(55);
  const auto g = random_game(rng, 2, 2, 1, 2, 2, 2);
  const auto pi = random_policy(rng, g.shape, 0.2);
  MixturePolicy twice{{pi, pi}};
  const auto once = exact_value_bruteforce(g, MixturePolicy::single(pi));
  const auto two = exact_value_bruteforce(g, twice);
  for (int i = 0; i < 2; ++i) CHECK(once[i] == doctest::Approx(two[i]));
}

TEST_CASE("deterministic everything reduces to a single-path reward sum") {
  auto g = deterministic_chain_game();
  ProductPolicy pi = ProductPolicy::uniform(g.shape);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s) {
      auto row = pi.row_mut(g.shape, 0, h, 0, s);
      row[0] = 1.0;
      row[1] = 0.0;
    }
  const auto v = exact_value_bruteforce(g, MixturePolicy::single(pi));
  // Path: (s0,a0) -> 0.25, then (s1,a0) -> 0.75.
  CHECK(v[0] == doctest::Approx(1.0));
}

TEST_CASE("relabeling the agents permutes the values") {
  Rng rng(7);
  const auto g = random_game(rng, 2, 2, 2, 2, 2, 2);
  const auto pi = random_policy(rng, g.shape, 0.2);
  const auto v = exact_value_factored(g, pi);

  // Swap the two agents everywhere.
  DecoupledMarkovGame swapped = g;
  std::swap(swapped.shape.state_counts[0], swapped.shape.state_counts[1]);
  std::swap(swapped.shape.action_counts[0], swapped.shape.action_counts[1]);
  std::swap(swapped.shape.init_states[0], swapped.shape.init_states[1]);
  std::swap(swapped.transitions[0], swapped.transitions[1]);
  std::swap(swapped.rewards[0], swapped.rewards[1]);
  swapped.validate();
  ProductPolicy spi = pi;
  std::swap(spi.tables[0], spi.tables[1]);
  const auto sv = exact_value_factored(swapped, spi);
  CHECK(sv[0] == doctest::Approx(v[1]).epsilon(1e-12));
  CHECK(sv[1] == doctest::Approx(v[0]).epsilon(1e-12));
}

TEST_CASE("brute force rejects oversized instances") {
  Rng rng(1);
  DecoupledMarkovGame g = random_game(rng, 3, 1, 1, 1, 2, 2);
  g.shape.context_count = 1;
  // Inflate the action spaces without building real tables: expect the guard
  // to fire before any table access.
  DecoupledMarkovGame big = g;
  for (int i = 0; i < 3; ++i) big.shape.state_counts[i] = 60;
  ProductPolicy pi = ProductPolicy::uniform(big.shape);
  CHECK_THROWS_AS(exact_value_bruteforce(big, MixturePolicy::single(pi)),
                  std::invalid_argument);
}

TEST_CASE("contextual game embeds as a one-step Markov game") {
  ContextualGame cg;
  cg.num_agents = 2;
  cg.context_count = 2;
  cg.context_dist = {0.25, 0.75};
  cg.action_counts = {2, 2};
  IrFunction r0(4, {SlotDomain{2}}, 2);
  r0.set_table(SubsetKey{{0}}, {1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.0, 0.0});
  IrFunction r1(4, {SlotDomain{2}}, 2);
  r1.set_table(SubsetKey{}, {0.1, 0.2, 0.3, 0.4});
  cg.rewards = {r0, r1};
  const auto g = cg.to_markov_game();
  CHECK(g.shape.horizon == 1);
  CHECK(g.shape.state_counts == std::vector<int>{1, 1});
  const auto v = exact_value_factored(g, ProductPolicy::uniform(g.shape));
  // Agent 1: E_c[mean of row] = 0.25*0.15 + 0.75*0.35
  CHECK(v[1] == doctest::Approx(0.25 * 0.15 + 0.75 * 0.35));
}
