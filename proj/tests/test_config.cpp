#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "irmarl/config.hpp"

using namespace irmarl;

TEST_CASE("toml subset parses sections, scalars, and arrays") {
  const auto t = TomlTable::parse(R"(
# top comment
title = "exp"   # trailing comment
count = 42
ratio = 0.5
flag = true

[section]
items = [1, 2, 3]
names = ["a", "b"]
empty = []
)");
  CHECK(t.get("", "title").as_string() == "exp");
  CHECK(t.get("", "count").as_int() == 42);
  CHECK(t.get("", "ratio").as_double() == 0.5);
  CHECK(t.get("", "count").as_double() == 42.0);  // int promotes
  CHECK(t.get("", "flag").as_bool());
  CHECK(t.get("section", "items").as_array().size() == 3);
  CHECK(t.get("section", "items").as_array()[2].as_int() == 3);
  CHECK(t.get("section", "names").as_array()[1].as_string() == "b");
  CHECK(t.get("section", "empty").as_array().empty());
  CHECK_FALSE(t.has("section", "missing"));
  CHECK(t.get_int("section", "missing", 7) == 7);
}

TEST_CASE("toml parse errors carry line numbers") {
  try {
    TomlTable::parse("a = 1\nb =\n");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(TomlTable::parse("[open\n"), std::invalid_argument);
  CHECK_THROWS_AS(TomlTable::parse("x 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(TomlTable::parse("s = \"oops\n"), std::invalid_argument);
}

TEST_CASE("experiment config defaults and validation") {
  const auto t = TomlTable::parse(R"(
[game]
agents = 3
horizon = 2
rank = 2

[data]
samples = 500

[train]
iterations = 50

[output]
seeds = [4, 5]
directory = "somewhere"
)");
  const auto c = ExperimentConfig::from_toml(t);
  CHECK(c.game_agents == 3);
  CHECK(c.samples == 500);
  CHECK(c.train.iterations == 50);
  CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.output_dir == "somewhere");
  REQUIRE(c.fit_arms.size() == 1);
  CHECK(c.fit_arms[0].rank == 2);  // defaults to the game rank

  const auto multi = TomlTable::parse("[fit]\nranks = [1, 2]\n");
  const auto marms = ExperimentConfig::from_toml(multi);
  REQUIRE(marms.fit_arms.size() == 2);
  CHECK(marms.fit_arms[0].rank == 1);
  CHECK(marms.fit_arms[1].rank == 2);

  const auto bad = TomlTable::parse("[data]\nsamples = 0\n");
  CHECK_THROWS_AS(ExperimentConfig::from_toml(bad), std::invalid_argument);
  const auto missing = TomlTable::parse("[game]\nfile = \"nope.json\"\n");
  CHECK_THROWS_AS(ExperimentConfig::from_toml(missing), std::invalid_argument);
  const auto bad_critic = TomlTable::parse("[train]\ncritic = \"sorcery\"\n");
  CHECK_THROWS_AS(ExperimentConfig::from_toml(bad_critic), std::invalid_argument);
}

TEST_CASE("quadratic study config reads arms and seeds") {
  const auto t = TomlTable::parse(R"(
[quadratic]
agents = 8
noise = 0.5625
arm = "2ir"
seeds = [1, 2, 3]
)");
  const auto c = QuadraticStudyConfig::from_toml(t);
  CHECK(c.run.num_agents == 8);
  CHECK(c.run.noise_width == 0.5625);
  CHECK(c.arm == "2ir");
  CHECK(c.seeds.size() == 3);
  CHECK(c.run.effective_sample_count() == 45);

  const auto bad = TomlTable::parse("[quadratic]\narm = \"mlp\"\n");
  CHECK_THROWS_AS(QuadraticStudyConfig::from_toml(bad), std::invalid_argument);
}
