#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ide/model.hpp"
#include "ide/synth.hpp"
#include "ide/trainer.hpp"

namespace ide {

/// Whole-experiment configuration. Parsing is strict: unknown keys are
/// rejected with the offending key named; absent keys take defaults.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  BenchmarkConfig benchmark;
  EmbedderConfig model;
  TrainConfig training;
  std::vector<std::uint64_t> ablation_seeds = {1, 2, 3, 4, 5};
  std::vector<double> sweep_sigma_fla = {0.12, 0.15, 0.18, 0.21, 0.24};
  std::vector<double> sweep_sigma_ffa = {0.62, 0.65, 0.68, 0.71, 0.74};
  bool log_attention = false;

  void validate() const;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string canonical_json() const;
  // FNV-1a 64 over the canonical serialization, hex encoded.
  std::string fingerprint() const;
};

std::string to_string(FusionMode mode);
std::string to_string(CeMode mode);
std::string to_string(GaussianDenominator denom);
FusionMode fusion_mode_from_string(const std::string& s);
CeMode ce_mode_from_string(const std::string& s);
GaussianDenominator denominator_from_string(const std::string& s);

std::string fnv1a_hex(const std::string& data);

}  // namespace ide
