#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ide/config.hpp"
#include "ide/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitNumericError = 4;

enum class LogLevel { kError = 0, kWarn, kInfo, kDebug };

LogLevel log_level() {
  const char* env = std::getenv("IDE_LOG_LEVEL");
  if (!env) return LogLevel::kWarn;
  std::string s(env);
  if (s == "error") return LogLevel::kError;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

void log(LogLevel level, const std::string& msg) {
  static LogLevel threshold = log_level();
  if (level <= threshold) std::cerr << msg << "\n";
}

struct CommonArgs {
  std::string config_path;
  std::string benchmark_dir;
  std::string checkpoint_path;
  std::string out_dir;
  std::int64_t seed_override = -1;
  int jobs = 1;
};

ide::ExperimentConfig load_config(const CommonArgs& args) {
  ide::ExperimentConfig cfg = ide::ExperimentConfig::from_file(args.config_path);
  if (args.seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(args.seed_override);
    cfg.benchmark.seed = cfg.seed;
    cfg.training.seed = cfg.seed;
  }
  return cfg;
}

std::string resolve_out(const CommonArgs& args, const ide::ExperimentConfig& cfg) {
  std::string out = args.out_dir.empty() ? cfg.output_dir : args.out_dir;
  fs::create_directories(out);
  return out;
}

ide::Benchmark require_benchmark(const CommonArgs& args) {
  if (args.benchmark_dir.empty() || !fs::exists(fs::path(args.benchmark_dir) / "manifest.json")) {
    throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory),
                            "benchmark directory: " + args.benchmark_dir);
  }
  return ide::load_benchmark(args.benchmark_dir);
}

ide::Model require_model(const CommonArgs& args, const ide::ExperimentConfig& cfg) {
  if (args.checkpoint_path.empty() || !fs::exists(args.checkpoint_path)) {
    throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory),
                            "checkpoint: " + args.checkpoint_path);
  }
  return ide::Model(cfg.model, ide::ParamStore::load(args.checkpoint_path));
}

int cmd_generate(const CommonArgs& args) {
  ide::ExperimentConfig cfg = load_config(args);
  std::string out = resolve_out(args, cfg);
  log(LogLevel::kInfo, "generating benchmark into " + out);
  ide::Benchmark bench = ide::build_benchmark(cfg.benchmark);
  ide::save_benchmark(bench, out, cfg.fingerprint());
  return 0;
}

int cmd_train(const CommonArgs& args) {
  ide::ExperimentConfig cfg = load_config(args);
  ide::Benchmark bench = require_benchmark(args);
  std::string out = resolve_out(args, cfg);

  int start_iteration = 0;
  ide::Model model = [&] {
    if (!args.checkpoint_path.empty()) {
      ide::Model resumed = require_model(args, cfg);
      std::ifstream st(fs::path(out) / "train_state.json");
      if (st) {
        json j = json::parse(st);
        start_iteration = j.value("iterations_done", 0);
      }
      return resumed;
    }
    return ide::Model(cfg.model, cfg.seed);
  }();

  ide::Trainer trainer(model, cfg.training);
  std::ofstream losses(fs::path(out) / "losses.csv",
                       start_iteration > 0 ? std::ios::app : std::ios::out);
  if (start_iteration == 0) losses << "iteration,wcel,cl,total\n";
  std::ofstream attention;
  if (cfg.log_attention) {
    attention.open(fs::path(out) / "attention.csv",
                   start_iteration > 0 ? std::ios::app : std::ios::out);
    if (start_iteration == 0) attention << "iteration,item,s,fla,ffa\n";
  }
  log(LogLevel::kInfo, "training for " + std::to_string(cfg.training.iterations) +
                           " iterations from iteration " + std::to_string(start_iteration));
  trainer.run(bench.train_sets, &losses,
              cfg.log_attention ? &attention : nullptr, start_iteration);

  model.params().save((fs::path(out) / "checkpoint.bin").string());
  json state;
  state["iterations_done"] = start_iteration + cfg.training.iterations;
  state["fingerprint"] = cfg.fingerprint();
  std::ofstream st(fs::path(out) / "train_state.json");
  st << state.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args) {
  ide::ExperimentConfig cfg = load_config(args);
  ide::Benchmark bench = require_benchmark(args);
  ide::Model model = require_model(args, cfg);
  std::string out = resolve_out(args, cfg);

  std::vector<ide::SetSample> queries, gallery;
  ide::split_query_gallery(bench.test_sets, queries, gallery);
  ide::EvalReport report = ide::evaluate(queries, gallery, model);
  report.fingerprint = cfg.fingerprint();
  report.seed = cfg.seed;
  ide::write_eval_report_json(report, (fs::path(out) / "eval_report.json").string());
  ide::write_cmc_csv(report, (fs::path(out) / "cmc.csv").string());

  if (!bench.cross_scene_sets.empty()) {
    ide::EvalReport cross = ide::run_cross_scene(bench, model);
    cross.fingerprint = cfg.fingerprint();
    cross.seed = cfg.seed;
    ide::write_eval_report_json(cross,
                                (fs::path(out) / "eval_report_cross_scene.json").string());
  }
  std::cout << "cmc1=" << (report.cmc.empty() ? 0.0 : report.cmc[0])
            << " map=" << report.map << "\n";
  return 0;
}

int cmd_ablate(const CommonArgs& args) {
  ide::ExperimentConfig cfg = load_config(args);
  ide::Benchmark bench = require_benchmark(args);
  std::string out = resolve_out(args, cfg);

  auto grid = ide::default_ablation_grid();
  auto results = ide::run_ablation(bench, cfg.model, cfg.training, grid,
                                   cfg.ablation_seeds, args.jobs);
  ide::write_ablation_csv(results, cfg.fingerprint(),
                          (fs::path(out) / "ablation_table.csv").string());
  for (const auto& cell : grid) {
    auto vals = ide::cell_values(results, cell.name);
    std::cout << cell.name << " cmc1 mean=" << ide::mean_of(vals)
              << " std=" << ide::stddev_of(vals) << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis) {
  ide::ExperimentConfig cfg = load_config(args);
  ide::Benchmark bench = require_benchmark(args);
  std::string out = resolve_out(args, cfg);

  std::vector<ide::SweepRow> rows;
  if (axis == "fla" || axis == "both") {
    auto r = ide::sigma_sweep(bench, cfg.model, cfg.training, "fla",
                              cfg.sweep_sigma_fla, cfg.ablation_seeds, args.jobs);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (axis == "ffa" || axis == "both") {
    auto r = ide::sigma_sweep(bench, cfg.model, cfg.training, "ffa",
                              cfg.sweep_sigma_ffa, cfg.ablation_seeds, args.jobs);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  ide::write_sweep_csv(rows, cfg.fingerprint(),
                       (fs::path(out) / "sigma_sweep.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ID-aware set embedding experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string sweep_axis = "both";

  auto add_common = [&](CLI::App* cmd, bool needs_benchmark, bool takes_checkpoint) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    if (needs_benchmark) {
      cmd->add_option("--benchmark", args.benchmark_dir, "benchmark directory")
          ->required();
    }
    if (takes_checkpoint) {
      cmd->add_option("--checkpoint", args.checkpoint_path, "parameter checkpoint");
    }
    cmd->add_option("--out", args.out_dir, "output directory (default from config)");
    cmd->add_option("--seed", args.seed_override, "override config seed");
    cmd->add_option("--jobs", args.jobs, "parallel runs for grid commands");
  };

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic benchmark");
  add_common(generate, false, false);
  CLI::App* train = app.add_subcommand("train", "train a model on a benchmark");
  add_common(train, true, true);
  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  add_common(evaluate, true, true);
  CLI::App* ablate = app.add_subcommand("ablate", "run the ablation grid");
  add_common(ablate, true, false);
  CLI::App* sweep = app.add_subcommand("sweep", "sigma sensitivity sweep");
  add_common(sweep, true, false);
  sweep->add_option("--axis", sweep_axis, "fla, ffa, or both")
      ->check(CLI::IsMember({"fla", "ffa", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(args);
    if (train->parsed()) return cmd_train(args);
    if (evaluate->parsed()) return cmd_evaluate(args);
    if (ablate->parsed()) return cmd_ablate(args);
    if (sweep->parsed()) return cmd_sweep(args, sweep_axis);
  } catch (const ide::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::system_error& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const ide::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumericError;
  } catch (const ide::CheckpointError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
