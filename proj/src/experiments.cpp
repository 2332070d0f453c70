#include "ide/experiments.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace ide {

namespace {

using nlohmann::json;

void run_parallel(std::size_t task_count, int jobs,
                  const std::function<void(std::size_t)>& task) {
  if (jobs <= 1 || task_count <= 1) {
    for (std::size_t i = 0; i < task_count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  int n = std::min<std::size_t>(static_cast<std::size_t>(jobs), task_count);
  workers.reserve(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < task_count; i = next.fetch_add(1)) {
        task(i);
      }
    });
  }
  for (auto& t : workers) t.join();
}

// Symmetric cross-camera protocol: every set serves once as a query against
// the other camera's gallery. Pools the per-query results of both directions.
EvalReport evaluate_both_directions(const std::vector<SetSample>& cam0,
                                    const std::vector<SetSample>& cam1,
                                    const Model& model) {
  EvalReport fwd = evaluate(cam0, cam1, model);
  EvalReport rev = evaluate(cam1, cam0, model);
  EvalReport out;
  out.num_queries = fwd.num_queries + rev.num_queries;
  out.num_gallery = std::max(fwd.num_gallery, rev.num_gallery);
  out.per_query_ap = fwd.per_query_ap;
  out.per_query_ap.insert(out.per_query_ap.end(), rev.per_query_ap.begin(),
                          rev.per_query_ap.end());
  out.map = mean_of(out.per_query_ap);
  double wf = static_cast<double>(fwd.num_queries) / out.num_queries;
  out.cmc.resize(std::max(fwd.cmc.size(), rev.cmc.size()));
  for (std::size_t r = 0; r < out.cmc.size(); ++r) {
    double f = r < fwd.cmc.size() ? fwd.cmc[r] : fwd.cmc.back();
    double b = r < rev.cmc.size() ? rev.cmc[r] : rev.cmc.back();
    out.cmc[r] = wf * f + (1.0 - wf) * b;
  }
  return out;
}

}  // namespace

std::vector<AblationCell> default_ablation_grid() {
  return {
      {"baseline", CeMode::kStandard, FusionMode::kAverage},
      {"fla", CeMode::kFlaWeighted, FusionMode::kAverage},
      {"ffa", CeMode::kStandard, FusionMode::kFfa},
      {"fla_ffa", CeMode::kFlaWeighted, FusionMode::kFfa},
      {"fla_ffa_mh", CeMode::kFlaWeighted, FusionMode::kFfaMh},
  };
}

RunOutcome train_and_evaluate(const Benchmark& bench, const EmbedderConfig& model_cfg,
                              const TrainConfig& train_cfg, std::uint64_t seed) {
  // `seed` drives the model initialization only; the minibatch stream stays
  // on train_cfg.seed so runs are compared on common batches (paired design).
  Model model(model_cfg, seed);
  Trainer trainer(model, train_cfg);
  trainer.run(bench.train_sets);

  std::vector<SetSample> queries, gallery;
  split_query_gallery(bench.test_sets, queries, gallery);
  EvalReport within = evaluate_both_directions(queries, gallery, model);
  within.seed = seed;
  return RunOutcome{std::move(model), std::move(within)};
}

EvalReport run_cross_scene(const Benchmark& bench, const Model& model) {
  if (bench.cross_scene_sets.empty()) {
    throw ConfigError("run_cross_scene: benchmark has no cross-scene split");
  }
  std::vector<SetSample> queries, gallery;
  split_query_gallery(bench.cross_scene_sets, queries, gallery);
  return evaluate_both_directions(queries, gallery, model);
}

std::vector<AblationResult> run_ablation(const Benchmark& bench,
                                         const EmbedderConfig& model_cfg,
                                         const TrainConfig& base,
                                         const std::vector<AblationCell>& grid,
                                         const std::vector<std::uint64_t>& seeds,
                                         int jobs) {
  std::vector<AblationResult> results(grid.size() * seeds.size());
  run_parallel(results.size(), jobs, [&](std::size_t idx) {
    const AblationCell& cell = grid[idx / seeds.size()];
    std::uint64_t seed = seeds[idx % seeds.size()];
    TrainConfig cfg = base;
    cfg.ce_mode = cell.ce_mode;
    cfg.attention.fusion_mode = cell.fusion_mode;
    RunOutcome out = train_and_evaluate(bench, model_cfg, cfg, seed);
    results[idx] = {cell.name, seed, out.within.cmc.empty() ? 0.0 : out.within.cmc[0],
                    out.within.map};
  });
  return results;
}

std::vector<SweepRow> sigma_sweep(const Benchmark& bench,
                                  const EmbedderConfig& model_cfg,
                                  const TrainConfig& base, const std::string& axis,
                                  const std::vector<double>& values,
                                  const std::vector<std::uint64_t>& seeds,
                                  int jobs) {
  if (axis != "fla" && axis != "ffa") {
    throw ConfigError("sigma_sweep: axis must be 'fla' or 'ffa'");
  }
  std::vector<SweepRow> rows(values.size() * seeds.size());
  run_parallel(rows.size(), jobs, [&](std::size_t idx) {
    double sigma = values[idx / seeds.size()];
    std::uint64_t seed = seeds[idx % seeds.size()];
    TrainConfig cfg = base;
    if (axis == "fla") {
      cfg.attention.sigma_fla = sigma;
    } else {
      cfg.attention.sigma_ffa = sigma;
    }
    RunOutcome out = train_and_evaluate(bench, model_cfg, cfg, seed);
    rows[idx] = {axis, sigma, seed, out.within.cmc.empty() ? 0.0 : out.within.cmc[0]};
  });
  return rows;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::vector<double> cell_values(const std::vector<AblationResult>& results,
                                const std::string& cell, bool map_metric) {
  std::vector<double> out;
  for (const auto& r : results) {
    if (r.cell == cell) out.push_back(map_metric ? r.map : r.cmc1);
  }
  return out;
}

void write_eval_report_json(const EvalReport& report, const std::string& path) {
  json j;
  j["cmc"] = report.cmc;
  j["map"] = report.map;
  j["per_query_ap"] = report.per_query_ap;
  j["num_queries"] = report.num_queries;
  j["num_gallery"] = report.num_gallery;
  j["fingerprint"] = report.fingerprint;
  j["seed"] = report.seed;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_cmc_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "rank,cmc\n";
  for (std::size_t r = 0; r < report.cmc.size(); ++r) {
    out << (r + 1) << ',' << report.cmc[r] << '\n';
  }
}

void write_ablation_csv(const std::vector<AblationResult>& results,
                        const std::string& fingerprint, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "# fingerprint=" << fingerprint << "\n";
  out << "cell,seed,cmc1,map\n";
  for (const auto& r : results) {
    out << r.cell << ',' << r.seed << ',' << r.cmc1 << ',' << r.map << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& fingerprint, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "# fingerprint=" << fingerprint << "\n";
  out << "axis,sigma,seed,cmc1\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << r.sigma << ',' << r.seed << ',' << r.cmc1 << '\n';
  }
}

}  // namespace ide
