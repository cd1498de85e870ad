#include "irmarl/config.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "irmarl/common.hpp"

namespace irmarl {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("config parse error at line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strip a trailing comment that is not inside a string literal.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

TomlValue parse_scalar(std::string_view token, int line);

TomlValue parse_value(std::string_view token, int line) {
  token = trim(token);
  if (token.empty()) fail(line, "missing value");
  if (token.front() == '[') {
    if (token.back() != ']') fail(line, "unterminated array");
    std::vector<TomlValue> items;
    std::string_view body = token.substr(1, token.size() - 2);
    std::size_t start = 0;
    bool in_string = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i < body.size() && body[i] == '"') in_string = !in_string;
      if (i == body.size() || (body[i] == ',' && !in_string)) {
        const auto piece = trim(body.substr(start, i - start));
        if (!piece.empty()) items.push_back(parse_scalar(piece, line));
        start = i + 1;
      }
    }
    return TomlValue{std::move(items)};
  }
  return parse_scalar(token, line);
}

TomlValue parse_scalar(std::string_view token, int line) {
  token = trim(token);
  if (token.empty()) fail(line, "missing value");
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') fail(line, "unterminated string");
    return TomlValue{std::string(token.substr(1, token.size() - 2))};
  }
  if (token == "true") return TomlValue{true};
  if (token == "false") return TomlValue{false};
  const std::string text(token);
  const bool looks_float = text.find_first_of(".eE") != std::string::npos;
  if (!looks_float) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size()) return TomlValue{value};
  }
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return TomlValue{value};
  } catch (...) {
  }
  fail(line, "cannot parse value '" + text + "'");
}

}  // namespace

const std::string& TomlValue::as_string() const {
  if (const auto* v = std::get_if<std::string>(&data)) return *v;
  throw std::invalid_argument("config: expected a string value");
}
std::int64_t TomlValue::as_int() const {
  if (const auto* v = std::get_if<std::int64_t>(&data)) return *v;
  throw std::invalid_argument("config: expected an integer value");
}
double TomlValue::as_double() const {
  if (const auto* v = std::get_if<double>(&data)) return *v;
  if (const auto* v = std::get_if<std::int64_t>(&data)) return static_cast<double>(*v);
  throw std::invalid_argument("config: expected a numeric value");
}
bool TomlValue::as_bool() const {
  if (const auto* v = std::get_if<bool>(&data)) return *v;
  throw std::invalid_argument("config: expected a boolean value");
}
const std::vector<TomlValue>& TomlValue::as_array() const {
  if (const auto* v = std::get_if<std::vector<TomlValue>>(&data)) return *v;
  throw std::invalid_argument("config: expected an array value");
}

TomlTable TomlTable::parse(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) fail(line_no, "empty section name");
      table.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    table.sections_[section][std::string(key)] = parse_value(line.substr(eq + 1), line_no);
  }
  return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool TomlTable::has(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  return sec != sections_.end() && sec->second.contains(key);
}

const TomlValue& TomlTable::get(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end() || !sec->second.contains(key))
    throw std::invalid_argument("config: missing [" + section + "] " + key);
  return sec->second.at(key);
}

std::string TomlTable::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? get(section, key).as_string() : fallback;
}
std::int64_t TomlTable::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
  return has(section, key) ? get(section, key).as_int() : fallback;
}
double TomlTable::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get(section, key).as_double() : fallback;
}
bool TomlTable::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  return has(section, key) ? get(section, key).as_bool() : fallback;
}

std::vector<std::string> TomlTable::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto sec = sections_.find(section);
  if (sec != sections_.end())
    for (const auto& [key, value] : sec->second) out.push_back(key);
  return out;
}

namespace {

std::vector<std::uint64_t> parse_seeds(const TomlTable& toml, const std::string& section) {
  std::vector<std::uint64_t> seeds;
  if (toml.has(section, "seeds")) {
    for (const auto& v : toml.get(section, "seeds").as_array())
      seeds.push_back(static_cast<std::uint64_t>(v.as_int()));
  }
  if (seeds.empty()) seeds.push_back(0);
  return seeds;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_toml(const TomlTable& toml) {
  ExperimentConfig c;
  c.game_file = toml.get_string("game", "file", "");
  c.game_agents = static_cast<int>(toml.get_int("game", "agents", c.game_agents));
  c.game_horizon = static_cast<int>(toml.get_int("game", "horizon", c.game_horizon));
  c.game_contexts = static_cast<int>(toml.get_int("game", "contexts", c.game_contexts));
  c.game_states = static_cast<int>(toml.get_int("game", "states", c.game_states));
  c.game_actions = static_cast<int>(toml.get_int("game", "actions", c.game_actions));
  c.game_rank = static_cast<int>(toml.get_int("game", "rank", c.game_rank));
  c.game_seed = static_cast<std::uint64_t>(toml.get_int("game", "seed", 1));

  c.behavior_file = toml.get_string("behavior", "file", "");

  c.samples = static_cast<int>(toml.get_int("data", "samples", c.samples));

  const double ridge = toml.get_double("fit", "ridge", 1e-8);
  if (toml.has("fit", "ranks")) {
    for (const auto& v : toml.get("fit", "ranks").as_array()) {
      IrClassSpec spec;
      spec.rank = static_cast<int>(v.as_int());
      spec.ridge = ridge;
      c.fit_arms.push_back(spec);
    }
  } else {
    IrClassSpec spec;
    spec.rank = static_cast<int>(toml.get_int("fit", "rank", c.game_rank));
    spec.ridge = ridge;
    c.fit_arms.push_back(spec);
  }
  c.transition_alpha = toml.get_double("fit", "alpha", 0.1);

  c.train.iterations = static_cast<int>(toml.get_int("train", "iterations", 1000));
  c.train.lambda = toml.get_double("train", "lambda", 0.05);
  c.train.eta = toml.get_double("train", "eta", 0.05);
  const auto critic = toml.get_string("train", "critic", "exact");
  if (critic == "exact") {
    c.train.critic = CriticMode::ExactDp;
  } else if (critic == "mc") {
    c.train.critic = CriticMode::MonteCarlo;
  } else {
    throw std::invalid_argument("config: unknown critic mode '" + critic + "' (exact|mc)");
  }
  c.train.mc_rollouts = static_cast<int>(toml.get_int("train", "rollouts", 1000));
  c.theory_schedule = toml.get_bool("train", "theory_schedule", false);
  c.schedule_epsilon = toml.get_double("train", "epsilon", 1e-3);
  c.schedule_c_s = toml.get_double("train", "c_s", 1.0);

  c.seeds = parse_seeds(toml, "output");
  c.output_dir = toml.get_string("output", "directory", "out");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (game_file.empty()) {
    require(game_agents >= 1 && game_horizon >= 1 && game_contexts >= 1 && game_states >= 1 &&
                game_actions >= 2 && game_rank >= 1,
            "config: invalid random-game dimensions");
  } else {
    require(std::filesystem::exists(game_file), "config: game file not found: " + game_file);
  }
  if (!behavior_file.empty())
    require(std::filesystem::exists(behavior_file),
            "config: behavior file not found: " + behavior_file);
  require(samples >= 1, "config: samples must be >= 1");
  require(!fit_arms.empty(), "config: need at least one reward-class arm");
  for (const auto& spec : fit_arms) spec.validate();
  train.validate();
  if (theory_schedule)
    require(schedule_epsilon > 0.0 && schedule_c_s > 0.0,
            "config: theory schedule needs positive epsilon and c_s");
  require(!seeds.empty(), "config: need at least one seed");
  require(!output_dir.empty(), "config: output directory must be set");
}

QuadraticStudyConfig QuadraticStudyConfig::from_toml(const TomlTable& toml) {
  QuadraticStudyConfig c;
  c.run.num_agents = static_cast<int>(toml.get_int("quadratic", "agents", 8));
  c.run.noise_width = toml.get_double("quadratic", "noise", 1.0);
  c.run.sample_coupling = toml.get_double("quadratic", "coupling", 0.1);
  c.run.sample_count = static_cast<int>(toml.get_int("quadratic", "samples", 0));
  c.run.actor_steps = static_cast<int>(toml.get_int("quadratic", "actor_steps", 500));
  c.run.actor_lr = toml.get_double("quadratic", "actor_lr", 0.02);
  c.run.bc_weight = toml.get_double("quadratic", "bc_weight", 0.1);
  c.run.init_spread = toml.get_double("quadratic", "init_spread", 0.01);
  c.run.ridge = toml.get_double("quadratic", "ridge", 1e-8);
  c.arm = toml.get_string("quadratic", "arm", "all");
  c.seeds = parse_seeds(toml, "quadratic");
  c.output_dir = toml.get_string("quadratic", "directory", "out");
  c.validate();
  return c;
}

void QuadraticStudyConfig::validate() const {
  run.validate();
  if (arm != "all") arm_from_name(arm);  // throws on unknown names
  require(!seeds.empty(), "config: need at least one seed");
  require(!output_dir.empty(), "config: output directory must be set");
}

}  // namespace irmarl
