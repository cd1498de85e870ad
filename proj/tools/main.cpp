// Command-line driver: dataset generation, model fitting, policy training,
// gap certification, the full pipeline, the continuous quadratic study, and
// the numerical verification suites.
//
// Exit codes: 0 success, 2 configuration error, 3 stage failure,
// 4 verification failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "irmarl/common.hpp"
#include "irmarl/config.hpp"
#include "irmarl/gap_eval.hpp"
#include "irmarl/serialize.hpp"
#include "irmarl/svg.hpp"
#include "irmarl/verify.hpp"

namespace fs = std::filesystem;
using namespace irmarl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;
constexpr int kExitVerify = 4;

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void stage_fail(const std::string& stage, const std::string& cause) {
  throw StageError("stage '" + stage + "' failed: " + cause);
}

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    stage_fail(name, e.what());
  }
}

DecoupledMarkovGame load_game_file(const std::string& path) {
  return parse_game(read_json_file(path));
}

BehaviorPolicy load_behavior_or_uniform(const std::string& path, const GameShape& shape) {
  if (path.empty()) return BehaviorPolicy::uniform(shape);
  auto behavior = parse_behavior(read_json_file(path));
  behavior.validate(shape);
  return behavior;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_trace_csv(const std::string& path, const DracResult& result, const DracParams& params,
                     const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) stage_fail("train", "cannot open trace file " + path);
  out << "# T=" << params.iterations << " eta=" << format_double(params.eta)
      << " lambda=" << format_double(params.lambda) << " B=" << format_double(result.gain_bound)
      << " config_hash=" << config_hash << "\n";
  out << "t,i,h,max_chi2,mean_Q,cell_count\n";
  for (const auto& row : result.trace) {
    out << row.iteration << "," << row.agent << "," << row.h << ","
        << format_double(row.max_chi2) << "," << format_double(row.mean_q) << ","
        << row.cell_count << "\n";
  }
  if (!out) stage_fail("train", "write failed for " + path);
}

void write_gap_summary_csv(const std::string& path, const GapReport& report,
                           const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) stage_fail("evaluate", "cannot open summary file " + path);
  double mean = 0.0;
  for (double g : report.gap) mean += g;
  mean /= static_cast<double>(report.gap.size());
  out << "# config_hash=" << config_hash << "\n";
  out << "max_gap,argmax_agent,mean_gap\n";
  out << format_double(report.max_gap) << "," << report.argmax_agent << ","
      << format_double(mean) << "\n";
}

DracParams resolve_train_params(const ExperimentConfig& config, int rank,
                                const LearnedModel& model, std::uint64_t seed) {
  DracParams params = config.train;
  params.seed = seed;
  if (config.theory_schedule) {
    const bool contextual = model.shape.horizon == 1;
    const auto hp = theoretical_hyperparams(
        contextual ? ScheduleSetting::ContextualGame : ScheduleSetting::MarkovGame, rank,
        model.shape.num_agents, model.shape.horizon, config.schedule_epsilon,
        config.schedule_c_s);
    params.iterations = hp.iterations;
    params.eta = hp.eta;
    params.lambda = hp.lambda;
  }
  return params;
}

// One pipeline seed: shared dataset -> per-arm model, mixture, gap report.
void run_pipeline_seed(const ExperimentConfig& config, const DecoupledMarkovGame& game,
                       const BehaviorPolicy& behavior, std::uint64_t seed, const fs::path& dir,
                       const std::string& config_hash,
                       std::vector<std::pair<int, double>>* arm_gaps) {
  fs::create_directories(dir);

  auto dataset = run_stage("generate-data", [&] {
    return generate_dataset(game, behavior, config.samples, seed);
  });
  dataset.config_hash = config_hash;
  run_stage("generate-data", [&] {
    save_dataset(dataset, (dir / "dataset.jsonl").string());
    return 0;
  });

  const bool single_arm = config.fit_arms.size() == 1;
  for (const auto& spec : config.fit_arms) {
    const std::string suffix = single_arm ? "" : "_rank" + std::to_string(spec.rank);
    const auto model = run_stage("fit", [&] {
      return fit_model(dataset, spec, config.transition_alpha);
    });
    run_stage("fit", [&] {
      auto doc = serialize_model(model);
      doc["config_hash"] = config_hash;
      write_json_file(doc, (dir / ("model" + suffix + ".json")).string());
      return 0;
    });

    const auto params =
        resolve_train_params(config, spec.rank, model, mix_seed(seed, 0x7A41ull));
    const auto trained = run_stage("train", [&] { return run_drac(model, behavior, params); });
    run_stage("train", [&] {
      auto doc = serialize_mixture(trained.mixture);
      doc["config_hash"] = config_hash;
      write_json_file(doc, (dir / ("policy" + suffix + ".json")).string());
      write_trace_csv((dir / ("trace" + suffix + ".csv")).string(), trained, params,
                      config_hash);
      return 0;
    });

    const auto report =
        run_stage("evaluate", [&] { return evaluate_gap(game, trained.mixture); });
    run_stage("evaluate", [&] {
      auto doc = serialize_gap_report(report);
      doc["config_hash"] = config_hash;
      write_json_file(doc, (dir / ("gap_report" + suffix + ".json")).string());
      write_gap_summary_csv((dir / ("summary" + suffix + ".csv")).string(), report,
                            config_hash);
      return 0;
    });
    arm_gaps->emplace_back(spec.rank, report.max_gap);
  }
}

int cmd_pipeline(const std::string& config_path, std::optional<std::uint64_t> seed_override,
                 const std::string& out_override, int threads) {
  const auto toml = TomlTable::parse_file(config_path);
  auto config = ExperimentConfig::from_toml(toml);
  if (seed_override) config.seeds = {*seed_override};
  if (!out_override.empty()) config.output_dir = out_override;

  std::string raw;
  {
    std::ifstream in(config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    raw = buf.str();
  }
  const std::string config_hash = hex_hash(raw);

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);

  const auto game = run_stage("game", [&]() -> DecoupledMarkovGame {
    if (!config.game_file.empty()) return load_game_file(config.game_file);
    Rng rng(config.game_seed);
    return random_game(rng, config.game_agents, config.game_horizon, config.game_contexts,
                       config.game_states, config.game_actions, config.game_rank);
  });
  run_stage("game", [&] {
    auto doc = serialize_game(game);
    doc["config_hash"] = config_hash;
    write_json_file(doc, (out_dir / "game.json").string());
    return 0;
  });
  const auto behavior = run_stage("behavior", [&] {
    return load_behavior_or_uniform(config.behavior_file, game.shape);
  });

  // Seeds run as parallel jobs writing disjoint directories; the summary is
  // assembled afterwards in seed order, so output does not depend on timing.
  const int num_seeds = static_cast<int>(config.seeds.size());
  std::vector<std::vector<std::pair<int, double>>> all_gaps(num_seeds);
  std::vector<std::exception_ptr> errors(num_seeds);
  auto worker = [&](int first) {
    for (int k = first; k < num_seeds; k += std::max(threads, 1)) {
      try {
        const fs::path dir = num_seeds == 1
                                 ? out_dir
                                 : out_dir / ("seed-" + std::to_string(config.seeds[k]));
        run_pipeline_seed(config, game, behavior, config.seeds[k], dir, config_hash,
                          &all_gaps[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  } else {
    worker(0);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::ofstream summary(out_dir / "gaps.csv");
  if (!summary) stage_fail("pipeline", "cannot open gaps.csv");
  summary << "# config_hash=" << config_hash << "\n";
  summary << "seed,rank,max_gap\n";
  for (int k = 0; k < num_seeds; ++k) {
    for (const auto& [rank, gap] : all_gaps[k]) {
      summary << config.seeds[k] << "," << rank << "," << format_double(gap) << "\n";
      std::cout << "seed " << config.seeds[k] << " rank " << rank << ": max gap " << gap
                << "\n";
    }
  }
  return kExitOk;
}

int cmd_quadratic(const std::string& config_path, std::optional<std::uint64_t> seed_override,
                  const std::string& out_override, int threads) {
  QuadraticStudyConfig config;
  if (!config_path.empty()) {
    config = QuadraticStudyConfig::from_toml(TomlTable::parse_file(config_path));
  }
  if (seed_override) config.seeds = {*seed_override};
  if (!out_override.empty()) config.output_dir = out_override;

  std::string config_hash = hex_hash("quadratic:" + std::to_string(config.run.num_agents) + ":" +
                                     format_double(config.run.noise_width));
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    config_hash = hex_hash(buf.str());
  }

  std::vector<CriticArm> arms;
  if (config.arm == "all") {
    arms = {CriticArm::PairwiseIr, CriticArm::SingleIr, CriticArm::Joint};
  } else {
    arms = {arm_from_name(config.arm)};
  }

  const int samples = config.run.effective_sample_count();
  const int num_seeds = static_cast<int>(config.seeds.size());
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);

  // results[seed][arm] = per-step gap trace
  std::vector<std::vector<std::vector<double>>> results(
      num_seeds, std::vector<std::vector<double>>(arms.size()));
  std::vector<std::exception_ptr> errors(num_seeds);

  // Seeds run as parallel jobs writing disjoint files; every job derives its
  // own generators, so the output is identical for any thread count. The
  // shared per-seed dataset file makes the paired comparison auditable.
  auto worker = [&](int first) {
    for (int s = first; s < num_seeds; s += std::max(threads, 1)) {
      try {
        const auto dataset = generate_quadratic_dataset(
            config.run.num_agents, samples, config.run.noise_width,
            mix_seed(config.seeds[s], 0xDA7Aull));
        std::ofstream data_csv(out_dir /
                               ("dataset_seed" + std::to_string(config.seeds[s]) + ".csv"));
        if (!data_csv) stage_fail("quadratic", "cannot open dataset csv");
        data_csv << "# config_hash=" << config_hash << "\n";
        for (int i = 0; i < config.run.num_agents; ++i) data_csv << "a" << i << ",";
        for (int i = 0; i < config.run.num_agents; ++i)
          data_csv << "r" << i << (i + 1 < config.run.num_agents ? "," : "\n");
        for (std::size_t m = 0; m < dataset.actions.size(); ++m) {
          for (int i = 0; i < config.run.num_agents; ++i)
            data_csv << format_double(dataset.actions[m][i]) << ",";
          for (int i = 0; i < config.run.num_agents; ++i)
            data_csv << format_double(dataset.rewards[m][i])
                     << (i + 1 < config.run.num_agents ? "," : "\n");
        }
        for (std::size_t a = 0; a < arms.size(); ++a) {
          const auto run = run_quadratic_arm(dataset, arms[a], config.run,
                                             mix_seed(config.seeds[s], 0xAC70ull, a));
          results[s][a] = run.gap_trace;
        }
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  } else {
    worker(0);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::ofstream csv(out_dir / "quadratic_trace.csv");
  if (!csv) stage_fail("quadratic", "cannot open quadratic_trace.csv");
  csv << "# agents=" << config.run.num_agents << " samples=" << samples
      << " noise=" << format_double(config.run.noise_width) << " config_hash=" << config_hash
      << "\n";
  csv << "arm,seed,step,gap\n";
  for (int s = 0; s < num_seeds; ++s)
    for (std::size_t a = 0; a < arms.size(); ++a)
      for (std::size_t step = 0; step < results[s][a].size(); ++step)
        csv << arm_name(arms[a]) << "," << config.seeds[s] << "," << step << ","
            << format_double(results[s][a][step]) << "\n";

  // Mean trace per arm, plotted over actor steps.
  std::vector<double> xs(results[0][0].size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
  const char* colors[3] = {"#1f77b4", "#2ca02c", "#ff7f0e"};
  std::vector<SvgSeries> series;
  std::cout << "final mean gaps:";
  for (std::size_t a = 0; a < arms.size(); ++a) {
    SvgSeries s;
    s.label = arm_name(arms[a]);
    s.color = colors[a % 3];
    s.ys.assign(xs.size(), 0.0);
    for (int sd = 0; sd < num_seeds; ++sd)
      for (std::size_t i = 0; i < xs.size(); ++i) s.ys[i] += results[sd][a][i];
    for (auto& v : s.ys) v /= num_seeds;
    std::cout << " " << arm_name(arms[a]) << "=" << s.ys.back();
    series.push_back(std::move(s));
  }
  std::cout << "\n";
  write_line_plot((out_dir / "quadratic_gap.svg").string(), "Equilibrium gap by critic arm",
                  "actor step", "gap", xs, series);
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<SuiteResult> results;
  try {
    results = run_verification(suite, seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  bool all_ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all_ok = all_ok && r.passed;
  }
  return all_ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline multi-agent equilibrium learning with interaction-rank rewards"};
  app.require_subcommand(1);

  std::string game_path, behavior_path, dataset_path, model_path, policy_path, config_path;
  std::string out_path = "out", out_policy, out_trace, out_report, out_csv;
  std::uint64_t seed = 0;
  int samples = 10000;
  int threads = 1;
  IrClassSpec fit_spec;
  double alpha = 0.1;
  DracParams train_params;
  std::string suite = "all";

  auto* gen = app.add_subcommand("generate-data", "Sample an offline dataset from a game file");
  gen->add_option("--game", game_path, "game JSON file")->required();
  gen->add_option("--behavior", behavior_path, "behavior policy JSON (default: uniform)");
  gen->add_option("--samples", samples, "records per step")->required();
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--out", out_path, "output dataset path (JSONL)")->required();

  auto* fit = app.add_subcommand("fit", "Fit rewards and transitions from a dataset");
  fit->add_option("--dataset", dataset_path, "dataset JSONL file")->required();
  fit->add_option("--rank", fit_spec.rank, "interaction rank of the reward class")->required();
  fit->add_option("--ridge", fit_spec.ridge, "ridge weight for the reward fit");
  fit->add_option("--alpha", alpha, "transition smoothing");
  fit->add_option("--out", out_path, "output model path (JSON)")->required();

  auto* train = app.add_subcommand("train", "Run the offline actor-critic on a learned model");
  train->add_option("--model", model_path, "learned model JSON")->required();
  train->add_option("--behavior", behavior_path, "behavior policy JSON (default: uniform)");
  train->add_option("--iterations", train_params.iterations, "iteration count")->required();
  train->add_option("--lambda", train_params.lambda, "divergence regularization weight");
  train->add_option("--eta", train_params.eta, "proximal step size");
  std::string critic = "exact";
  train->add_option("--critic", critic, "critic mode: exact | mc");
  train->add_option("--rollouts", train_params.mc_rollouts, "rollouts per cell in mc mode");
  train->add_option("--seed", seed, "seed for the mc critic");
  train->add_option("--out-policy", out_policy, "output mixture policy JSON")->required();
  train->add_option("--out-trace", out_trace, "output trace CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "Certify the equilibrium gap of a policy");
  eval->add_option("--game", game_path, "game JSON file")->required();
  eval->add_option("--policy", policy_path, "policy JSON (product or mixture)")->required();
  eval->add_option("--out", out_report, "output gap report JSON")->required();
  eval->add_option("--out-csv", out_csv, "optional one-line CSV summary");

  auto* pipe = app.add_subcommand("pipeline", "Dataset, fit, train, and evaluate from a config");
  pipe->add_option("--config", config_path, "experiment config (TOML)")->required();
  auto* pipe_seed = pipe->add_option("--seed", seed, "override the config seed list");
  pipe->add_option("--out", out_path, "override the output directory");
  pipe->add_option("--threads", threads, "parallel seed jobs");

  auto* quad = app.add_subcommand("quadratic", "Continuous pairwise-product critic study");
  quad->add_option("--config", config_path, "study config (TOML)");
  auto* quad_seed = quad->add_option("--seed", seed, "override the config seed list");
  quad->add_option("--out", out_path, "override the output directory");
  quad->add_option("--threads", threads, "parallel seed jobs");

  auto* verify = app.add_subcommand("verify", "Run a numerical verification suite");
  verify->add_option("--suite", suite,
                     "standardization | alignment | shift | update | noregret | drift | oracles "
                     "| tv | rates | mc-critic | end-to-end | quadratic | all");
  verify->add_option("--seed", seed, "suite seed (default: the frozen calibration seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) {
      const auto game = load_game_file(game_path);
      const auto behavior = load_behavior_or_uniform(behavior_path, game.shape);
      const auto dataset = generate_dataset(game, behavior, samples, seed);
      save_dataset(dataset, out_path);
      std::cout << "wrote " << out_path << " (" << dataset.records_per_step()
                << " records per step)\n";
      return kExitOk;
    }
    if (*fit) {
      const auto dataset = load_dataset(dataset_path);
      const auto model = fit_model(dataset, fit_spec, alpha);
      write_json_file(serialize_model(model), out_path);
      double worst = 0.0;
      for (const auto& per_agent : model.reward_diagnostics)
        for (const auto& d : per_agent) worst = std::max(worst, d.train_mse);
      std::cout << "wrote " << out_path << " (worst train MSE " << worst << ")\n";
      return kExitOk;
    }
    if (*train) {
      if (critic == "mc")
        train_params.critic = CriticMode::MonteCarlo;
      else if (critic != "exact")
        throw std::invalid_argument("unknown critic mode '" + critic + "' (exact|mc)");
      train_params.seed = seed;
      const auto model = parse_model(read_json_file(model_path));
      const auto behavior = load_behavior_or_uniform(behavior_path, model.shape);
      const auto result = run_drac(model, behavior, train_params);
      write_json_file(serialize_mixture(result.mixture), out_policy);
      write_trace_csv(out_trace, result, train_params, "-");
      std::cout << "wrote " << out_policy << " and " << out_trace << "\n";
      return kExitOk;
    }
    if (*eval) {
      const auto game = load_game_file(game_path);
      const auto mixture = parse_mixture(read_json_file(policy_path));
      const auto report = evaluate_gap(game, mixture);
      write_json_file(serialize_gap_report(report), out_report);
      if (!out_csv.empty()) write_gap_summary_csv(out_csv, report, "-");
      std::cout << "max gap " << report.max_gap << " (agent " << report.argmax_agent << ")\n";
      return kExitOk;
    }
    if (*pipe) {
      return cmd_pipeline(config_path,
                          pipe_seed->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                          pipe->count("--out") ? out_path : "", threads);
    }
    if (*quad) {
      return cmd_quadratic(config_path,
                           quad_seed->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                           quad->count("--out") ? out_path : "", threads);
    }
    if (*verify) {
      return cmd_verify(suite, verify->count("--seed") ? seed : 1234567ull);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitConfig;
}
