#pragma once

#include <cstdint>
#include <optional>
#include <ostream>

#include "ide/attention.hpp"
#include "ide/losses.hpp"
#include "ide/model.hpp"
#include "ide/synth.hpp"

namespace ide {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CeMode { kStandard, kFlaWeighted };

struct TrainConfig {
  double learning_rate = 1e-3;
  int iterations = 70000;
  int persons_per_batch = 3;
  int sets_per_person = 2;
  int items_per_set = 9;
  AttentionConfig attention;
  LossConfig loss;
  CeMode ce_mode = CeMode::kFlaWeighted;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StepResult {
  double wcel = 0.0;
  double cl = 0.0;
  double total = 0.0;
  std::vector<QualityRecord> qualities;  // batch order
};

/// One optimizer step per call: embed -> logits -> confidences -> attention
/// weights (constants) -> WCEL + fused-set contrastive -> backward -> SGD.
class Trainer {
 public:
  Trainer(Model& model, TrainConfig config);

  StepResult train_step(const MiniBatch& batch);

  // Loss components only; parameters untouched. Shares the step's forward
  // path so the baseline equivalence checks compare identical graphs.
  StepResult compute_losses(const MiniBatch& batch);

  /// Samples minibatches from the pool and steps `iterations` times.
  /// losses_csv, when set, receives one "iteration,wcel,cl,total" row per
  /// step; attention_csv one "iteration,item,s,fla,ffa" row per item.
  void run(const std::vector<SetSample>& pool, std::ostream* losses_csv = nullptr,
           std::ostream* attention_csv = nullptr, int start_iteration = 0);

  const TrainConfig& config() const { return cfg_; }
  const FuseStats& fuse_stats() const { return fuse_stats_; }

 private:
  StepResult forward_losses(const MiniBatch& batch, NodePtr* joint_out);

  Model& model_;
  TrainConfig cfg_;
  std::mt19937_64 sampler_rng_;
  FuseStats fuse_stats_;
};

}  // namespace ide
