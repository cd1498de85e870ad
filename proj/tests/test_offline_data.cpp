#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "irmarl/offline_data.hpp"
#include "irmarl/verify.hpp"

using namespace irmarl;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("offline_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

DecoupledMarkovGame point_mass_game() {
  DecoupledMarkovGame g;
  g.shape.num_agents = 1;
  g.shape.horizon = 1;
  g.shape.context_count = 1;
  g.shape.state_counts = {1};
  g.shape.action_counts = {2};
  g.shape.init_states = {0};
  g.context_dist = {1.0};
  g.transitions = {{std::vector<double>(2, 1.0)}};
  IrFunction r(2, {}, 1);
  r.set_table(SubsetKey{}, {0.25, 0.75});
  g.rewards = {{r}};
  g.noise.kind = NoiseSpec::Kind::None;
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("deterministic game with zero noise gives identical records") {
  auto g = point_mass_game();
  BehaviorPolicy behavior = BehaviorPolicy::uniform(g.shape);
  // Deterministic behavior: always action 1.
  behavior.policy.tables[0][0] = {0.0, 1.0};
  const auto ds = generate_dataset(g, behavior, 3, 99);
  CHECK(ds.records_per_step() == 3);
  for (const auto& rec : ds.steps[0]) {
    CHECK(rec.context == 0);
    CHECK(rec.action[0] == 1);
    CHECK(rec.reward[0] == doctest::Approx(0.75));
  }
}

TEST_CASE("empirical transition frequencies approach the true rows") {
  Rng rng(3);
  auto g = random_game(rng, 2, 1, 1, 3, 2, 2);
  const auto behavior = BehaviorPolicy::uniform(g.shape);
  const int m = 30000;
  const auto ds = generate_dataset(g, behavior, m, 4242);
  const auto& shape = g.shape;
  for (int i = 0; i < shape.num_agents; ++i) {
    const int sn = shape.state_counts[i];
    std::vector<double> counts(shape.x_size(i) * sn, 0.0), row_counts(shape.x_size(i), 0.0);
    for (const auto& rec : ds.steps[0]) {
      const int row = shape.x_index(i, rec.context, rec.state[i], rec.action[i]);
      counts[row * sn + rec.next_state[i]] += 1.0;
      row_counts[row] += 1.0;
    }
    for (int c = 0; c < shape.context_count; ++c) {
      for (int s = 0; s < sn; ++s) {
        for (int a = 0; a < shape.action_counts[i]; ++a) {
          const int row = shape.x_index(i, c, s, a);
          if (row_counts[row] < 100) continue;
          const auto truth = g.transition_row(i, 0, c, s, a);
          for (int sp = 0; sp < sn; ++sp) {
            const double freq = counts[row * sn + sp] / row_counts[row];
            CHECK(std::abs(freq - truth[sp]) <= 5.0 / std::sqrt(row_counts[row]));
          }
        }
      }
    }
  }
}

TEST_CASE("default state sampling matches the behavior visitation") {
  Rng rng(8);
  auto g = random_game(rng, 1, 3, 1, 3, 2, 1);
  const auto behavior = BehaviorPolicy::uniform(g.shape);
  const int m = 40000;
  const auto ds = generate_dataset(g, behavior, m, 17);
  for (int h = 0; h < g.shape.horizon; ++h) {
    const auto vis = local_visitation(g, behavior.policy, 0, 0);
    std::vector<double> freq(g.shape.state_counts[0], 0.0);
    for (const auto& rec : ds.steps[h]) freq[rec.state[0]] += 1.0 / m;
    for (int s = 0; s < g.shape.state_counts[0]; ++s)
      CHECK(std::abs(freq[s] - vis.state[h][s]) <= 5.0 / std::sqrt(static_cast<double>(m)));
  }
}

TEST_CASE("reward observations are unbiased per visited cell") {
  Rng rng(12);
  auto g = random_game(rng, 2, 1, 1, 1, 2, 2);
  g.noise.kind = NoiseSpec::Kind::Bernoulli;
  const auto behavior = BehaviorPolicy::uniform(g.shape);
  const int m = 20000;
  const auto ds = generate_dataset(g, behavior, m, 5);
  // Cell = full joint profile; all agents stateless here.
  std::vector<double> sums(16, 0.0), hits(16, 0.0);
  for (const auto& rec : ds.steps[0]) {
    const int cell = rec.action[0] * 2 + rec.action[1];
    sums[cell] += rec.reward[0];
    hits[cell] += 1.0;
  }
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a1 = 0; a1 < 2; ++a1) {
      const int cell = a0 * 2 + a1;
      if (hits[cell] < 1000) continue;
      std::vector<int> s = {0, 0}, a = {a0, a1};
      const double mean = g.reward_mean(0, 0, 0, s, a);
      // Bernoulli spread is at most 1/2.
      CHECK(std::abs(sums[cell] / hits[cell] - mean) <= 5.0 * 0.5 / std::sqrt(hits[cell]));
    }
  }
}

TEST_CASE("bernoulli noise rejects means outside the unit interval") {
  auto g = point_mass_game();
  g.rewards[0][0].set_table(SubsetKey{}, {0.25, 1.75});
  g.noise.kind = NoiseSpec::Kind::Bernoulli;
  BehaviorPolicy behavior = BehaviorPolicy::uniform(g.shape);
  CHECK_THROWS_AS(generate_dataset(g, behavior, 10, 1), std::domain_error);
}

TEST_CASE("dataset round-trips through the JSONL file byte-faithfully") {
  Rng rng(21);
  auto g = random_game(rng, 2, 2, 2, 2, 2, 2);
  g.noise.kind = NoiseSpec::Kind::AdditiveUniform;
  g.noise.width = 0.37;
  g.reward_min = -1.0;
  g.reward_max = 2.0;
  const auto behavior = BehaviorPolicy::uniform(g.shape);
  const auto ds = generate_dataset(g, behavior, 50, 31337);

  TempFile file("roundtrip.jsonl");
  save_dataset(ds, file.path);
  const auto loaded = load_dataset(file.path);
  CHECK(loaded.shape == ds.shape);
  CHECK(loaded.seed == ds.seed);
  CHECK(loaded.game_hash == ds.game_hash);
  CHECK(loaded.behavior_hash == ds.behavior_hash);
  REQUIRE(loaded.steps.size() == ds.steps.size());
  for (std::size_t h = 0; h < ds.steps.size(); ++h) {
    REQUIRE(loaded.steps[h].size() == ds.steps[h].size());
    for (std::size_t m = 0; m < ds.steps[h].size(); ++m) {
      CHECK(loaded.steps[h][m].context == ds.steps[h][m].context);
      CHECK(loaded.steps[h][m].state == ds.steps[h][m].state);
      CHECK(loaded.steps[h][m].action == ds.steps[h][m].action);
      CHECK(loaded.steps[h][m].next_state == ds.steps[h][m].next_state);
      for (int i = 0; i < 2; ++i)
        CHECK(loaded.steps[h][m].reward[i] == ds.steps[h][m].reward[i]);  // exact
    }
  }
}

TEST_CASE("truncated files report the offending line") {
  Rng rng(22);
  const auto g = random_game(rng, 2, 1, 1, 1, 2, 2);
  const auto ds = generate_dataset(g, BehaviorPolicy::uniform(g.shape), 5, 7);
  TempFile file("truncated.jsonl");
  save_dataset(ds, file.path);
  std::string contents;
  {
    std::ifstream in(file.path);
    std::string line;
    int n = 0;
    while (std::getline(in, line) && n < 4) {
      contents += line + "\n";
      ++n;
    }
  }
  contents += "{\"h\":0,\"c\":0,\"s\":[0,0],\"a\":[0";  // cut mid-record
  {
    std::ofstream out(file.path);
    out << contents;
  }
  try {
    load_dataset(file.path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
}

TEST_CASE("empty datasets are rejected") {
  Rng rng(23);
  const auto g = random_game(rng, 1, 1, 1, 1, 2, 1);
  CHECK_THROWS_AS(generate_dataset(g, BehaviorPolicy::uniform(g.shape), 0, 1),
                  std::invalid_argument);
  OfflineDataset empty;
  empty.shape = g.shape;
  empty.steps.resize(1);
  TempFile file("empty.jsonl");
  CHECK_THROWS_AS(save_dataset(empty, file.path), std::invalid_argument);
}

TEST_CASE("generation is deterministic in the seed") {
  Rng rng(29);
  const auto g = random_game(rng, 2, 2, 2, 2, 2, 2);
  const auto behavior = BehaviorPolicy::uniform(g.shape);
  const auto a = generate_dataset(g, behavior, 64, 1000);
  const auto b = generate_dataset(g, behavior, 64, 1000);
  const auto c = generate_dataset(g, behavior, 64, 1001);
  CHECK(a.steps[0][10].action == b.steps[0][10].action);
  CHECK(a.steps[1][63].reward[0] == b.steps[1][63].reward[0]);
  bool any_diff = false;
  for (int m = 0; m < 64 && !any_diff; ++m)
    any_diff = a.steps[0][m].action != c.steps[0][m].action ||
               a.steps[0][m].context != c.steps[0][m].context;
  CHECK(any_diff);
}
