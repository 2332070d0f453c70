#pragma once

#include <vector>

#include "ide/autodiff.hpp"

namespace ide {

struct LossConfig {
  double margin = 1.2;
  double wcel_weight = 1.0;
  double cl_weight = 1.0;

  void validate() const;
};

// Confidence floor inside the weighted cross-entropy log.
inline constexpr double kLogFloor = 1e-12;

/// L = -sum_i w_i log s_i / sum_i w_i with gradient-stopped weights, so
/// dL/ds_i = (w_i / sum w) * (-1 / s_i).
NodePtr weighted_cross_entropy(const std::vector<NodePtr>& confidences,
                               const std::vector<double>& fla_weights);

/// y d^2 + (1-y) max(0, alpha - d)^2 with d the raw L2 distance.
NodePtr contrastive_pair(const NodePtr& phi_a, const NodePtr& phi_b,
                         bool same_id, double alpha);

/// Mean contrastive loss over all m(m-1)/2 unordered set pairs.
NodePtr batch_contrastive(const std::vector<NodePtr>& set_embeddings,
                          const std::vector<int>& labels, double alpha);

NodePtr joint_loss(const NodePtr& wcel, const NodePtr& cl,
                   double wcel_weight, double cl_weight);

}  // namespace ide
