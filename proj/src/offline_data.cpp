#include "irmarl/offline_data.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "irmarl/common.hpp"
#include "irmarl/serialize.hpp"

namespace irmarl {

using nlohmann::json;

BehaviorPolicy BehaviorPolicy::uniform(const GameShape& shape) {
  BehaviorPolicy b;
  b.policy = ProductPolicy::uniform(shape);
  return b;
}

void BehaviorPolicy::validate(const GameShape& shape) const {
  policy.validate(shape);
  if (!has_state_dists()) return;
  require(static_cast<int>(state_dists.size()) == shape.num_agents,
          "BehaviorPolicy: state_dists agent count");
  for (int i = 0; i < shape.num_agents; ++i) {
    require(static_cast<int>(state_dists[i].size()) == shape.horizon,
            "BehaviorPolicy: state_dists horizon");
    for (int h = 0; h < shape.horizon; ++h) {
      require(static_cast<int>(state_dists[i][h].size()) ==
                  shape.context_count * shape.state_counts[i],
              "BehaviorPolicy: state_dists table size");
      for (int c = 0; c < shape.context_count; ++c) {
        std::span<const double> row(state_dists[i][h].data() + c * shape.state_counts[i],
                                    shape.state_counts[i]);
        require(is_probability_vector(row), "BehaviorPolicy: sigma row is not a distribution");
      }
    }
  }
}

std::vector<std::vector<std::vector<double>>> BehaviorPolicy::effective_state_dists(
    const DecoupledMarkovGame& game) const {
  if (has_state_dists()) return state_dists;
  const auto& shape = game.shape;
  std::vector<std::vector<std::vector<double>>> sigma(
      shape.num_agents, std::vector<std::vector<double>>(shape.horizon));
  for (int i = 0; i < shape.num_agents; ++i) {
    for (int h = 0; h < shape.horizon; ++h)
      sigma[i][h].assign(shape.context_count * shape.state_counts[i], 0.0);
    for (int c = 0; c < shape.context_count; ++c) {
      const auto vis = local_visitation(game, policy, i, c);
      for (int h = 0; h < shape.horizon; ++h)
        std::copy(vis.state[h].begin(), vis.state[h].end(),
                  sigma[i][h].begin() + c * shape.state_counts[i]);
    }
  }
  return sigma;
}

void OfflineDataset::validate() const {
  shape.validate();
  require(static_cast<int>(steps.size()) == shape.horizon, "OfflineDataset: step count");
  const int m = records_per_step();
  require(m >= 1, "OfflineDataset: must contain at least one record per step");
  for (const auto& step : steps) {
    require(static_cast<int>(step.size()) == m, "OfflineDataset: uneven record counts");
    for (const auto& rec : step) {
      require(rec.context >= 0 && rec.context < shape.context_count,
              "OfflineDataset: context out of range");
      require(static_cast<int>(rec.state.size()) == shape.num_agents &&
                  static_cast<int>(rec.action.size()) == shape.num_agents &&
                  static_cast<int>(rec.next_state.size()) == shape.num_agents &&
                  static_cast<int>(rec.reward.size()) == shape.num_agents,
              "OfflineDataset: record arity mismatch");
      for (int i = 0; i < shape.num_agents; ++i) {
        require(rec.state[i] >= 0 && rec.state[i] < shape.state_counts[i],
                "OfflineDataset: state out of range");
        require(rec.next_state[i] >= 0 && rec.next_state[i] < shape.state_counts[i],
                "OfflineDataset: next state out of range");
        require(rec.action[i] >= 0 && rec.action[i] < shape.action_counts[i],
                "OfflineDataset: action out of range");
      }
    }
  }
}

OfflineDataset generate_dataset(const DecoupledMarkovGame& game, const BehaviorPolicy& behavior,
                                int records_per_step, std::uint64_t seed) {
  game.validate();
  behavior.validate(game.shape);
  require(records_per_step >= 1, "generate_dataset: need at least one record per step");

  const auto& shape = game.shape;
  const auto sigma = behavior.effective_state_dists(game);

  OfflineDataset ds;
  ds.shape = shape;
  ds.seed = seed;
  ds.game_hash = hex_hash(serialize_game(game).dump());
  ds.behavior_hash = hex_hash(serialize_behavior(behavior).dump());
  ds.steps.resize(shape.horizon);

  for (int h = 0; h < shape.horizon; ++h) {
    ds.steps[h].resize(records_per_step);
    for (int m = 0; m < records_per_step; ++m) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(m)));
      DatasetRecord rec;
      rec.context = rng.categorical(game.context_dist);
      rec.state.resize(shape.num_agents);
      rec.action.resize(shape.num_agents);
      rec.next_state.resize(shape.num_agents);
      rec.reward.resize(shape.num_agents);
      for (int i = 0; i < shape.num_agents; ++i) {
        std::span<const double> srow(
            sigma[i][h].data() + rec.context * shape.state_counts[i], shape.state_counts[i]);
        rec.state[i] = rng.categorical(srow);
        rec.action[i] =
            rng.categorical(behavior.policy.row(shape, i, h, rec.context, rec.state[i]));
      }
      for (int i = 0; i < shape.num_agents; ++i) {
        const double mean = game.reward_mean(i, h, rec.context, rec.state, rec.action);
        rec.reward[i] = game.noise.sample(mean, rng);
        rec.next_state[i] = rng.categorical(
            game.transition_row(i, h, rec.context, rec.state[i], rec.action[i]));
      }
      ds.steps[h][m] = std::move(rec);
    }
  }
  return ds;
}

void save_dataset(const OfflineDataset& dataset, const std::string& path) {
  dataset.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  json header = serialize_shape(dataset.shape);
  header["m"] = dataset.records_per_step();
  header["seed"] = dataset.seed;
  header["game_hash"] = dataset.game_hash;
  header["behavior_hash"] = dataset.behavior_hash;
  if (!dataset.config_hash.empty()) header["config_hash"] = dataset.config_hash;
  out << header.dump() << "\n";
  for (int h = 0; h < dataset.shape.horizon; ++h) {
    for (const auto& rec : dataset.steps[h]) {
      json line = {{"h", h},     {"c", rec.context},    {"s", rec.state},
                   {"a", rec.action}, {"sp", rec.next_state}, {"r", rec.reward}};
      out << line.dump() << "\n";
    }
  }
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::string line;
  int line_no = 0;
  auto parse_line = [&](const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("load_dataset: parse error at line " + std::to_string(line_no));
    return j;
  };

  OfflineDataset ds;
  if (!std::getline(in, line))
    throw std::runtime_error("load_dataset: missing header line in " + path);
  ++line_no;
  json header = parse_line(line);
  try {
    ds.shape = parse_shape(header);
    ds.seed = header.at("seed").get<std::uint64_t>();
    ds.game_hash = header.at("game_hash").get<std::string>();
    ds.behavior_hash = header.at("behavior_hash").get<std::string>();
    ds.config_hash = header.value("config_hash", "");
    const int m = header.at("m").get<int>();
    ds.steps.assign(ds.shape.horizon, {});
    for (auto& step : ds.steps) step.reserve(m);
  } catch (const json::exception& e) {
    throw std::runtime_error("load_dataset: bad header at line 1: " + std::string(e.what()));
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line);
    try {
      const int h = j.at("h").get<int>();
      if (h < 0 || h >= ds.shape.horizon)
        throw std::runtime_error("step index out of range");
      DatasetRecord rec;
      rec.context = j.at("c").get<int>();
      rec.state = j.at("s").get<std::vector<int>>();
      rec.action = j.at("a").get<std::vector<int>>();
      rec.next_state = j.at("sp").get<std::vector<int>>();
      rec.reward = j.at("r").get<std::vector<double>>();
      ds.steps[h].push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw std::runtime_error("load_dataset: bad record at line " + std::to_string(line_no) +
                               ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("load_dataset: bad record at line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  try {
    ds.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("load_dataset: " + std::string(e.what()) + " (file " + path + ")");
  }
  return ds;
}

}  // namespace irmarl
