#pragma once

#include <string>
#include <vector>

#include "ide/config.hpp"
#include "ide/eval.hpp"
#include "ide/synth.hpp"
#include "ide/trainer.hpp"

namespace ide {

struct AblationCell {
  std::string name;
  CeMode ce_mode;
  FusionMode fusion_mode;
};

// Baseline, FLA, FFA, FLA+FFA, FLA+FFA_MH.
std::vector<AblationCell> default_ablation_grid();

struct AblationResult {
  std::string cell;
  std::uint64_t seed = 0;
  double cmc1 = 0.0;
  double map = 0.0;
};

struct SweepRow {
  std::string axis;  // "fla" or "ffa"
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double cmc1 = 0.0;
};

/// Trains one model on the benchmark's train split and evaluates it on the
/// within-scene test split. Evaluation is symmetric across cameras: each
/// direction (cam0 vs cam1, cam1 vs cam0) is scored and the per-query
/// results pooled, which doubles the query count per run.
struct RunOutcome {
  Model model;
  EvalReport within;
};

/// `seed` selects the model initialization; the minibatch stream comes from
/// train_cfg.seed and is therefore shared across cells and seeds, so grid
/// comparisons are paired on common batch sequences.
RunOutcome train_and_evaluate(const Benchmark& bench, const EmbedderConfig& model_cfg,
                              const TrainConfig& train_cfg, std::uint64_t seed);

EvalReport run_cross_scene(const Benchmark& bench, const Model& model);

std::vector<AblationResult> run_ablation(const Benchmark& bench,
                                         const EmbedderConfig& model_cfg,
                                         const TrainConfig& base,
                                         const std::vector<AblationCell>& grid,
                                         const std::vector<std::uint64_t>& seeds,
                                         int jobs = 1);

std::vector<SweepRow> sigma_sweep(const Benchmark& bench,
                                  const EmbedderConfig& model_cfg,
                                  const TrainConfig& base, const std::string& axis,
                                  const std::vector<double>& values,
                                  const std::vector<std::uint64_t>& seeds,
                                  int jobs = 1);

double mean_of(const std::vector<double>& xs);
double stddev_of(const std::vector<double>& xs);

// Per-cell seed means, preserving grid order.
std::vector<double> cell_values(const std::vector<AblationResult>& results,
                                const std::string& cell,
                                bool map_metric = false);

void write_eval_report_json(const EvalReport& report, const std::string& path);
void write_cmc_csv(const EvalReport& report, const std::string& path);
void write_ablation_csv(const std::vector<AblationResult>& results,
                        const std::string& fingerprint, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& fingerprint, const std::string& path);

}  // namespace ide
