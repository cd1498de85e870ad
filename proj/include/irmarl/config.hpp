#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "irmarl/drac.hpp"
#include "irmarl/quadratic.hpp"

namespace irmarl {

// Minimal TOML subset: comments, one-level [sections], and key = value with
// strings, integers, floats, booleans, and flat arrays. Enough for the
// experiment configs; parse errors carry line numbers.
struct TomlValue {
  std::variant<std::string, std::int64_t, double, bool, std::vector<TomlValue>> data;

  const std::string& as_string() const;
  std::int64_t as_int() const;
  double as_double() const;  // accepts integer literals
  bool as_bool() const;
  const std::vector<TomlValue>& as_array() const;
};

class TomlTable {
 public:
  static TomlTable parse(const std::string& text);
  static TomlTable parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const TomlValue& get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<std::string> keys(const std::string& section) const;

 private:
  std::map<std::string, std::map<std::string, TomlValue>> sections_;
};

// Configuration of the full offline pipeline (data -> fit -> train -> gap).
struct ExperimentConfig {
  // Game: either a file or a seeded random instance.
  std::string game_file;  // empty: generate
  int game_agents = 2, game_horizon = 1, game_contexts = 2, game_states = 1, game_actions = 2,
      game_rank = 2;
  std::uint64_t game_seed = 1;

  std::string behavior_file;  // empty: uniform

  int samples = 10000;

  std::vector<IrClassSpec> fit_arms;  // one reward class per critic arm
  double transition_alpha = 0.1;

  DracParams train;
  bool theory_schedule = false;
  double schedule_epsilon = 1e-3;
  double schedule_c_s = 1.0;

  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";

  static ExperimentConfig from_toml(const TomlTable& toml);
  void validate() const;
};

struct QuadraticStudyConfig {
  QuadraticConfig run;
  std::string arm = "all";  // joint | 2ir | 1ir | all
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";

  static QuadraticStudyConfig from_toml(const TomlTable& toml);
  void validate() const;
};

}  // namespace irmarl
