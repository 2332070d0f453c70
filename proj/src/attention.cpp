#include "ide/attention.hpp"

#include <cmath>

namespace ide {

namespace {

constexpr double kDegenerateWeightSum = 1e-12;

double gaussian(double s, double center, double sigma,
                GaussianDenominator denom) {
  if (sigma <= 0.0) throw ContractError("attention: sigma must be positive");
  double d = s - center;
  double divisor = sigma * sigma;
  if (denom == GaussianDenominator::kTwoSigmaSq) divisor *= 2.0;
  return std::exp(-(d * d) / divisor);
}

}  // namespace

void AttentionConfig::validate() const {
  if (sigma_fla <= 0.0 || sigma_ffa <= 0.0) {
    throw ContractError("AttentionConfig: sigma values must be positive");
  }
}

double id_quality(const Vector& softmax_probs, int label) {
  if (label < 0 || label >= softmax_probs.size()) {
    throw DimensionError("id_quality: label out of range");
  }
  return softmax_probs(label);
}

double fla_score(double s, double sigma_fla, GaussianDenominator denom) {
  return gaussian(s, 0.5, sigma_fla, denom);
}

double ffa_score(double s, double sigma_ffa, GaussianDenominator denom) {
  return gaussian(s, 1.0, sigma_ffa, denom);
}

double ffa_mh_score(double s, double sigma_ffa, GaussianDenominator denom) {
  return gaussian(s, 0.5, sigma_ffa, denom);
}

double fusion_weight(double s, const AttentionConfig& cfg) {
  switch (cfg.fusion_mode) {
    case FusionMode::kAverage:
      return 1.0;
    case FusionMode::kFfa:
      return ffa_score(s, cfg.sigma_ffa, cfg.denominator);
    case FusionMode::kFfaMh:
      return ffa_mh_score(s, cfg.sigma_ffa, cfg.denominator);
  }
  throw ContractError("fusion_weight: invalid mode");
}

NodePtr fuse_set(const std::vector<NodePtr>& embeddings,
                 const std::vector<double>& weights, FuseStats* stats) {
  if (embeddings.empty()) throw DimensionError("fuse_set: empty set");
  if (embeddings.size() != weights.size()) {
    throw DimensionError("fuse_set: weight count mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractError("fuse_set: negative weight");
    total += w;
  }
  std::vector<double> coeffs(weights.size());
  if (total < kDegenerateWeightSum) {
    if (stats) ++stats->degenerate_fallbacks;
    std::fill(coeffs.begin(), coeffs.end(), 1.0 / static_cast<double>(weights.size()));
  } else {
    for (std::size_t i = 0; i < weights.size(); ++i) coeffs[i] = weights[i] / total;
  }
  return linear_combination(embeddings, coeffs);
}

}  // namespace ide
