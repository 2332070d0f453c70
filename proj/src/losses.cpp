#include "ide/losses.hpp"

namespace ide {

void LossConfig::validate() const {
  if (margin <= 0.0) throw ContractError("LossConfig: margin must be positive");
  if (wcel_weight < 0.0 || cl_weight < 0.0) {
    throw ContractError("LossConfig: loss weights must be non-negative");
  }
}

NodePtr weighted_cross_entropy(const std::vector<NodePtr>& confidences,
                               const std::vector<double>& fla_weights) {
  if (confidences.empty() || confidences.size() != fla_weights.size()) {
    throw DimensionError("weighted_cross_entropy: empty or mismatched inputs");
  }
  double weight_sum = 0.0;
  for (double w : fla_weights) {
    if (w <= 0.0) throw ContractError("weighted_cross_entropy: weights must be positive");
    weight_sum += w;
  }
  std::vector<NodePtr> terms;
  std::vector<double> coeffs;
  terms.reserve(confidences.size());
  coeffs.reserve(confidences.size());
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    terms.push_back(log_floored(confidences[i], kLogFloor));
    coeffs.push_back(-fla_weights[i] / weight_sum);
  }
  return linear_combination(terms, coeffs);
}

NodePtr contrastive_pair(const NodePtr& phi_a, const NodePtr& phi_b,
                         bool same_id, double alpha) {
  NodePtr dist = l2_norm(sub(phi_a, phi_b));
  if (same_id) return square(dist);
  NodePtr hinge = relu(sub(constant(alpha), dist));
  return square(hinge);
}

NodePtr batch_contrastive(const std::vector<NodePtr>& set_embeddings,
                          const std::vector<int>& labels, double alpha) {
  std::size_t m = set_embeddings.size();
  if (m < 2 || labels.size() != m) {
    throw DimensionError("batch_contrastive: need at least 2 sets with labels");
  }
  std::vector<NodePtr> pair_losses;
  pair_losses.reserve(m * (m - 1) / 2);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    for (std::size_t k = j + 1; k < m; ++k) {
      pair_losses.push_back(contrastive_pair(set_embeddings[j], set_embeddings[k],
                                             labels[j] == labels[k], alpha));
    }
  }
  std::vector<double> coeffs(pair_losses.size(),
                             1.0 / static_cast<double>(pair_losses.size()));
  return linear_combination(pair_losses, coeffs);
}

NodePtr joint_loss(const NodePtr& wcel, const NodePtr& cl,
                   double wcel_weight, double cl_weight) {
  return add(scale(wcel, wcel_weight), scale(cl, cl_weight));
}

}  // namespace ide
