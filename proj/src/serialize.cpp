#include "irmarl/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace irmarl {

using nlohmann::json;

namespace {

json serialize_noise(const NoiseSpec& noise) {
  json j;
  switch (noise.kind) {
    case NoiseSpec::Kind::None:
      j["kind"] = "none";
      break;
    case NoiseSpec::Kind::AdditiveUniform:
      j["kind"] = "additive_uniform";
      j["width"] = noise.width;
      break;
    case NoiseSpec::Kind::Bernoulli:
      j["kind"] = "bernoulli";
      break;
  }
  return j;
}

NoiseSpec parse_noise(const json& j) {
  NoiseSpec noise;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    noise.kind = NoiseSpec::Kind::None;
  } else if (kind == "additive_uniform") {
    noise.kind = NoiseSpec::Kind::AdditiveUniform;
    noise.width = j.at("width").get<double>();
  } else if (kind == "bernoulli") {
    noise.kind = NoiseSpec::Kind::Bernoulli;
  } else {
    throw std::runtime_error("parse_noise: unknown kind '" + kind + "'");
  }
  return noise;
}

}  // namespace

json serialize_ir_function(const IrFunction& f) {
  json j;
  j["rank"] = f.rank();
  j["x_size"] = f.x_size();
  json sizes = json::array();
  for (const auto& d : f.y_domains()) sizes.push_back(d.size);
  j["y_sizes"] = std::move(sizes);
  json tables = json::array();
  for (const auto& [key, values] : f.tables())
    tables.push_back({{"subset", key.indices}, {"values", values}});
  j["tables"] = std::move(tables);
  return j;
}

IrFunction parse_ir_function(const json& j) {
  std::vector<SlotDomain> domains;
  for (int s : j.at("y_sizes").get<std::vector<int>>()) domains.push_back(SlotDomain{s});
  IrFunction f(j.at("x_size").get<int>(), std::move(domains), j.at("rank").get<int>());
  for (const auto& t : j.at("tables")) {
    SubsetKey key{t.at("subset").get<std::vector<int>>()};
    f.set_table(key, t.at("values").get<std::vector<double>>());
  }
  return f;
}

json serialize_shape(const GameShape& shape) {
  return json{{"num_agents", shape.num_agents},
              {"horizon", shape.horizon},
              {"context_count", shape.context_count},
              {"state_counts", shape.state_counts},
              {"action_counts", shape.action_counts},
              {"init_states", shape.init_states}};
}

GameShape parse_shape(const json& j) {
  GameShape shape;
  shape.num_agents = j.at("num_agents").get<int>();
  shape.horizon = j.at("horizon").get<int>();
  shape.context_count = j.at("context_count").get<int>();
  shape.state_counts = j.at("state_counts").get<std::vector<int>>();
  shape.action_counts = j.at("action_counts").get<std::vector<int>>();
  shape.init_states = j.at("init_states").get<std::vector<int>>();
  shape.validate();
  return shape;
}

json serialize_game(const DecoupledMarkovGame& game) {
  json j;
  j["schema_version"] = 1;
  j["type"] = "decoupled_markov_game";
  j["shape"] = serialize_shape(game.shape);
  j["context_dist"] = game.context_dist;
  j["transitions"] = game.transitions;
  json rewards = json::array();
  for (const auto& per_agent : game.rewards) {
    json steps = json::array();
    for (const auto& f : per_agent) steps.push_back(serialize_ir_function(f));
    rewards.push_back(std::move(steps));
  }
  j["rewards"] = std::move(rewards);
  j["noise"] = serialize_noise(game.noise);
  j["reward_range"] = {game.reward_min, game.reward_max};
  return j;
}

DecoupledMarkovGame parse_game(const json& j) {
  if (j.value("type", "") != "decoupled_markov_game")
    throw std::runtime_error("parse_game: unexpected document type");
  DecoupledMarkovGame game;
  game.shape = parse_shape(j.at("shape"));
  game.context_dist = j.at("context_dist").get<std::vector<double>>();
  game.transitions = j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
  for (const auto& per_agent : j.at("rewards")) {
    std::vector<IrFunction> steps;
    for (const auto& f : per_agent) steps.push_back(parse_ir_function(f));
    game.rewards.push_back(std::move(steps));
  }
  game.noise = parse_noise(j.at("noise"));
  const auto range = j.at("reward_range").get<std::vector<double>>();
  game.reward_min = range.at(0);
  game.reward_max = range.at(1);
  game.validate();
  return game;
}

json serialize_policy(const ProductPolicy& policy) {
  return json{{"schema_version", 1}, {"type", "product_policy"}, {"tables", policy.tables}};
}

ProductPolicy parse_policy(const json& j) {
  if (j.value("type", "") != "product_policy")
    throw std::runtime_error("parse_policy: unexpected document type");
  ProductPolicy p;
  p.tables = j.at("tables").get<std::vector<std::vector<std::vector<double>>>>();
  return p;
}

json serialize_mixture(const MixturePolicy& policy) {
  json comps = json::array();
  for (const auto& c : policy.components) comps.push_back(serialize_policy(c));
  return json{{"schema_version", 1}, {"type", "mixture_policy"}, {"components", comps}};
}

MixturePolicy parse_mixture(const json& j) {
  if (j.value("type", "") == "product_policy") return MixturePolicy::single(parse_policy(j));
  if (j.value("type", "") != "mixture_policy")
    throw std::runtime_error("parse_mixture: unexpected document type");
  MixturePolicy m;
  for (const auto& c : j.at("components")) m.components.push_back(parse_policy(c));
  return m;
}

json serialize_behavior(const BehaviorPolicy& behavior) {
  json j{{"schema_version", 1},
         {"type", "behavior_policy"},
         {"policy", serialize_policy(behavior.policy)}};
  if (behavior.has_state_dists()) j["state_dists"] = behavior.state_dists;
  return j;
}

BehaviorPolicy parse_behavior(const json& j) {
  if (j.value("type", "") != "behavior_policy")
    throw std::runtime_error("parse_behavior: unexpected document type");
  BehaviorPolicy b;
  b.policy = parse_policy(j.at("policy"));
  if (j.contains("state_dists"))
    b.state_dists = j.at("state_dists").get<std::vector<std::vector<std::vector<double>>>>();
  return b;
}

json serialize_model(const LearnedModel& model) {
  json j;
  j["schema_version"] = 1;
  j["type"] = "learned_model";
  j["shape"] = serialize_shape(model.shape);
  j["context_dist"] = model.context_dist;
  json rewards = json::array();
  for (const auto& per_agent : model.rewards) {
    json steps = json::array();
    for (const auto& f : per_agent) steps.push_back(serialize_ir_function(f));
    rewards.push_back(std::move(steps));
  }
  j["rewards"] = std::move(rewards);
  j["transitions"] = model.transitions;
  j["reward_range"] = {model.reward_lo, model.reward_hi};
  json diag = json::array();
  for (int i = 0; i < model.shape.num_agents; ++i) {
    json per_agent = json::array();
    for (int h = 0; h < model.shape.horizon; ++h) {
      per_agent.push_back(
          {{"train_mse", model.reward_diagnostics[i][h].train_mse},
           {"parameters", model.reward_diagnostics[i][h].parameter_count},
           {"log_likelihood", model.transition_diagnostics[i][h].log_likelihood},
           {"unseen_rows", model.transition_diagnostics[i][h].unseen_rows}});
    }
    diag.push_back(std::move(per_agent));
  }
  j["diagnostics"] = std::move(diag);
  return j;
}

LearnedModel parse_model(const json& j) {
  if (j.value("type", "") != "learned_model")
    throw std::runtime_error("parse_model: unexpected document type");
  LearnedModel model;
  model.shape = parse_shape(j.at("shape"));
  model.context_dist = j.at("context_dist").get<std::vector<double>>();
  for (const auto& per_agent : j.at("rewards")) {
    std::vector<IrFunction> steps;
    for (const auto& f : per_agent) steps.push_back(parse_ir_function(f));
    model.rewards.push_back(std::move(steps));
  }
  model.transitions = j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
  const auto range = j.at("reward_range").get<std::vector<double>>();
  model.reward_lo = range.at(0);
  model.reward_hi = range.at(1);
  model.reward_diagnostics.assign(model.shape.num_agents, {});
  model.transition_diagnostics.assign(model.shape.num_agents, {});
  for (int i = 0; i < model.shape.num_agents; ++i) {
    model.reward_diagnostics[i].resize(model.shape.horizon);
    model.transition_diagnostics[i].resize(model.shape.horizon);
    for (int h = 0; h < model.shape.horizon; ++h) {
      const auto& d = j.at("diagnostics").at(i).at(h);
      model.reward_diagnostics[i][h].train_mse = d.at("train_mse").get<double>();
      model.reward_diagnostics[i][h].parameter_count = d.at("parameters").get<int>();
      model.transition_diagnostics[i][h].log_likelihood = d.at("log_likelihood").get<double>();
      model.transition_diagnostics[i][h].unseen_rows =
          d.at("unseen_rows").get<std::vector<int>>();
    }
  }
  model.validate();
  return model;
}

json serialize_gap_report(const GapReport& report) {
  json j;
  j["schema_version"] = 1;
  j["type"] = "gap_report";
  j["best_response_value"] = report.best_response_value;
  j["policy_value"] = report.policy_value;
  j["gap"] = report.gap;
  j["max_gap"] = report.max_gap;
  j["argmax_agent"] = report.argmax_agent;
  j["argmax_deviation"] = report.argmax_deviation.action;
  j["mixture_convention"] = report.mixture_convention;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json_file: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write_json_file: write failed for " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_json_file: cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("read_json_file: malformed JSON in " + path);
  return j;
}

}  // namespace irmarl
