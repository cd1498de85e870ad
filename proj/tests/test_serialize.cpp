#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "irmarl/serialize.hpp"
#include "irmarl/verify.hpp"

using namespace irmarl;

TEST_CASE("ir functions round-trip through their JSON schema") {
  Rng rng(1);
  const auto f = random_ir_function(rng, 3, {2, 4, 3}, 3);
  const auto j = serialize_ir_function(f);
  CHECK(j.at("rank") == 3);
  CHECK(j.at("x_size") == 3);
  CHECK(j.at("y_sizes") == std::vector<int>{2, 4, 3});
  const auto g = parse_ir_function(j);
  CHECK(max_abs_difference(f, g) == 0.0);
  CHECK(serialize_ir_function(g) == j);
}

TEST_CASE("games round-trip and re-serialize byte-identically") {
  Rng rng(2);
  auto game = random_game(rng, 3, 2, 2, 2, 3, 2);
  game.noise.kind = NoiseSpec::Kind::AdditiveUniform;
  game.noise.width = 0.25;
  game.reward_min = -0.5;
  game.reward_max = 1.5;
  const auto j = serialize_game(game);
  const auto parsed = parse_game(j);
  CHECK(serialize_game(parsed) == j);
  CHECK(parsed.shape == game.shape);
  CHECK(parsed.context_dist == game.context_dist);
  CHECK(parsed.noise.width == game.noise.width);
}

TEST_CASE("policies and mixtures round-trip") {
  Rng rng(3);
  const auto game = random_game(rng, 2, 2, 2, 2, 2, 2);
  const auto pi = random_policy(rng, game.shape, 0.2);
  CHECK(parse_policy(serialize_policy(pi)).tables == pi.tables);

  MixturePolicy mix{{pi, random_policy(rng, game.shape, 0.2)}};
  const auto parsed = parse_mixture(serialize_mixture(mix));
  REQUIRE(parsed.components.size() == 2);
  CHECK(parsed.components[0].tables == mix.components[0].tables);
  CHECK(parsed.components[1].tables == mix.components[1].tables);

  // A bare product policy document is accepted as a one-component mixture.
  const auto upgraded = parse_mixture(serialize_policy(pi));
  CHECK(upgraded.components.size() == 1);
}

TEST_CASE("behavior policies round-trip with and without explicit sigma") {
  Rng rng(4);
  const auto game = random_game(rng, 2, 2, 2, 2, 2, 2);
  BehaviorPolicy plain = BehaviorPolicy::uniform(game.shape);
  CHECK_FALSE(parse_behavior(serialize_behavior(plain)).has_state_dists());

  BehaviorPolicy with_sigma = plain;
  with_sigma.state_dists = plain.effective_state_dists(game);
  const auto parsed = parse_behavior(serialize_behavior(with_sigma));
  CHECK(parsed.has_state_dists());
  CHECK(parsed.state_dists == with_sigma.state_dists);
}

TEST_CASE("learned models round-trip with diagnostics") {
  Rng rng(5);
  const auto game = random_game(rng, 2, 2, 2, 2, 2, 2);
  const auto ds = generate_dataset(game, BehaviorPolicy::uniform(game.shape), 500, 77);
  IrClassSpec spec;
  spec.rank = 2;
  const auto model = fit_model(ds, spec, 0.1);
  const auto j = serialize_model(model);
  const auto parsed = parse_model(j);
  CHECK(serialize_model(parsed) == j);
  CHECK(parsed.reward_lo == model.reward_lo);
  CHECK(parsed.transitions == model.transitions);
  CHECK(parsed.reward_diagnostics[0][0].train_mse ==
        model.reward_diagnostics[0][0].train_mse);
}

TEST_CASE("gap reports carry the full certificate") {
  Rng rng(6);
  const auto game = random_game(rng, 2, 1, 2, 1, 2, 2);
  const auto mix = MixturePolicy::single(random_policy(rng, game.shape, 0.2));
  const auto report = evaluate_gap(game, mix);
  const auto j = serialize_gap_report(report);
  CHECK(j.at("gap").size() == 2);
  CHECK(j.at("max_gap").get<double>() == report.max_gap);
  CHECK(j.at("mixture_convention") == "component-average");
}

TEST_CASE("json files write and read back") {
  const std::string path = "serialize_test_file.json";
  nlohmann::json j = {{"a", 1}, {"b", {1, 2, 3}}};
  write_json_file(j, path);
  CHECK(read_json_file(path) == j);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_json_file("does_not_exist.json"), std::runtime_error);
}
