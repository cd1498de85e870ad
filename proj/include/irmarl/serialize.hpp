#pragma once

#include <string>

#include <json.hpp>

#include "irmarl/game.hpp"
#include "irmarl/gap_eval.hpp"
#include "irmarl/model_learning.hpp"
#include "irmarl/offline_data.hpp"

namespace irmarl {

// JSON schemas for every persisted artifact. All documents carry
// "schema_version"; indices are 0-based; tables are row-major flat arrays.

nlohmann::json serialize_ir_function(const IrFunction& f);
IrFunction parse_ir_function(const nlohmann::json& j);

nlohmann::json serialize_shape(const GameShape& shape);
GameShape parse_shape(const nlohmann::json& j);

nlohmann::json serialize_game(const DecoupledMarkovGame& game);
DecoupledMarkovGame parse_game(const nlohmann::json& j);

nlohmann::json serialize_policy(const ProductPolicy& policy);
ProductPolicy parse_policy(const nlohmann::json& j);

nlohmann::json serialize_mixture(const MixturePolicy& policy);
MixturePolicy parse_mixture(const nlohmann::json& j);

nlohmann::json serialize_behavior(const BehaviorPolicy& behavior);
BehaviorPolicy parse_behavior(const nlohmann::json& j);

nlohmann::json serialize_model(const LearnedModel& model);
LearnedModel parse_model(const nlohmann::json& j);

nlohmann::json serialize_gap_report(const GapReport& report);

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace irmarl
