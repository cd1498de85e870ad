#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irmarl/game.hpp"

namespace irmarl {

// Data-collection policy nu plus optional per-step per-agent state-sampling
// distributions sigma[i][h] (flat (c, s)). When sigma is absent, states are
// sampled from nu's own local visitation.
struct BehaviorPolicy {
  ProductPolicy policy;
  std::vector<std::vector<std::vector<double>>> state_dists;  // [agent][h], flat (c,s); may be empty

  static BehaviorPolicy uniform(const GameShape& shape);
  bool has_state_dists() const { return !state_dists.empty(); }
  void validate(const GameShape& shape) const;
  // The effective sigma tables, materializing the visitation default when
  // needed (requires the true transitions).
  std::vector<std::vector<std::vector<double>>> effective_state_dists(
      const DecoupledMarkovGame& game) const;
};

struct DatasetRecord {
  int context = 0;
  std::vector<int> state, action, next_state;  // per agent
  std::vector<double> reward;                  // per agent, observed
};

struct OfflineDataset {
  GameShape shape;
  std::vector<std::vector<DatasetRecord>> steps;  // [h][m], same M for every h
  std::uint64_t seed = 0;
  std::string game_hash, behavior_hash;
  std::string config_hash;  // optional provenance stamp, set by the pipeline

  int records_per_step() const { return steps.empty() ? 0 : static_cast<int>(steps[0].size()); }
  void validate() const;
};

// Draws M i.i.d. records per step: c ~ rho, s_i ~ sigma_{i,h}(.|c),
// a_i ~ nu_{i,h}(.|c,s_i), s'_i ~ P_{i,h}, r_i noisy with mean r_{i,h}(c,s,a).
// Each record uses its own derived generator: output is independent of
// sharding and iteration order for a fixed seed.
OfflineDataset generate_dataset(const DecoupledMarkovGame& game, const BehaviorPolicy& behavior,
                                int records_per_step, std::uint64_t seed);

// JSONL persistence: a metadata header line followed by one record per line.
void save_dataset(const OfflineDataset& dataset, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

}  // namespace irmarl
