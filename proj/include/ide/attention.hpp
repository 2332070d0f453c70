#pragma once

#include <vector>

#include "ide/autodiff.hpp"

namespace ide {

enum class FusionMode { kAverage, kFfa, kFfaMh };
enum class GaussianDenominator { kSigmaSq, kTwoSigmaSq };

struct AttentionConfig {
  double sigma_fla = 0.18;
  double sigma_ffa = 0.68;
  FusionMode fusion_mode = FusionMode::kFfa;
  GaussianDenominator denominator = GaussianDenominator::kSigmaSq;

  void validate() const;
};

/// Per-item quality and derived attention weights. These are computed from
/// node values and never enter the graph, so no gradient can reach them.
struct QualityRecord {
  double s = 0.0;
  double fla = 0.0;
  double ffa = 0.0;
};

// Confidence of the set label under the softmax over identities.
double id_quality(const Vector& softmax_probs, int label);

// Gaussian of the confidence centered at 0.5 (emphasizes medium-hard items).
double fla_score(double s, double sigma_fla,
                 GaussianDenominator denom = GaussianDenominator::kSigmaSq);
// Gaussian centered at 1 (emphasizes ID-consistent items).
double ffa_score(double s, double sigma_ffa,
                 GaussianDenominator denom = GaussianDenominator::kSigmaSq);
// Ablation variant of the fusion weight, centered at 0.5.
double ffa_mh_score(double s, double sigma_ffa,
                    GaussianDenominator denom = GaussianDenominator::kSigmaSq);

// Fusion weight under the configured mode; average mode gives 1 per item.
double fusion_weight(double s, const AttentionConfig& cfg);

/// Weighted fusion sum_i w_i z_i / sum_i w_i. Weights are constants; the
/// gradient reaching each z_i is scaled by w_i / sum w. Falls back to the
/// plain mean when the weights collapse below epsilon, counting the event.
struct FuseStats {
  long degenerate_fallbacks = 0;
};

NodePtr fuse_set(const std::vector<NodePtr>& embeddings,
                 const std::vector<double>& weights,
                 FuseStats* stats = nullptr);

}  // namespace ide
