#pragma once

#include <cstdint>
#include <vector>

#include "ide/autodiff.hpp"
#include "ide/data.hpp"
#include "ide/param_store.hpp"

namespace ide {

struct EmbedderConfig {
  int input_dim = 32;
  std::vector<int> hidden_dims = {48, 32};
  int embed_dim = 16;
  int num_identities = 60;

  void validate() const;
};

struct BatchForward {
  std::vector<NodePtr> embeddings;  // m*n entries, batch order
  std::vector<NodePtr> logits;
  std::vector<int> labels;          // set label repeated per item
  std::vector<std::size_t> set_offsets;  // start index of each set
  std::vector<std::size_t> set_sizes;
};

/// Fully connected embedder with relu hidden layers, plus the ID
/// classification head whose k-th row is identity k's context vector.
/// The head carries no bias; logits are raw dot products.
class Model {
 public:
  Model(EmbedderConfig cfg, std::uint64_t seed);
  Model(EmbedderConfig cfg, ParamStore store);

  NodePtr embed(const Vector& item) const;
  NodePtr logits(const NodePtr& z) const;

  BatchForward embed_batch(const MiniBatch& batch) const;

  // Forward without graph construction, for evaluation.
  Vector embed_value(const Vector& item) const;

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const EmbedderConfig& config() const { return cfg_; }

 private:
  EmbedderConfig cfg_;
  ParamStore params_;
  std::vector<NodePtr> weights_;  // per layer
  std::vector<NodePtr> biases_;
  NodePtr head_;

  void bind_params();
};

}  // namespace ide
