#include "ide/model.hpp"

namespace ide {

void EmbedderConfig::validate() const {
  if (input_dim <= 0 || embed_dim <= 0) {
    throw DimensionError("EmbedderConfig: dimensions must be positive");
  }
  for (int h : hidden_dims) {
    if (h <= 0) throw DimensionError("EmbedderConfig: hidden dim must be positive");
  }
  if (num_identities < 2) {
    throw DimensionError("EmbedderConfig: need at least 2 identities");
  }
}

Model::Model(EmbedderConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), params_(seed) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  int prev = cfg_.input_dim;
  std::vector<int> dims = cfg_.hidden_dims;
  dims.push_back(cfg_.embed_dim);
  for (std::size_t l = 0; l < dims.size(); ++l) {
    int out = dims[l];
    params_.create("layer" + std::to_string(l) + ".W",
                   glorot_uniform(out, prev, prev, out, rng));
    params_.create("layer" + std::to_string(l) + ".b", Matrix::Zero(out, 1));
    prev = out;
  }
  params_.create("head.W",
                 glorot_uniform(cfg_.num_identities, cfg_.embed_dim,
                                cfg_.embed_dim, cfg_.num_identities, rng));
  bind_params();
}

Model::Model(EmbedderConfig cfg, ParamStore store)
    : cfg_(std::move(cfg)), params_(std::move(store)) {
  cfg_.validate();
  bind_params();
  if (head_->value.rows() != cfg_.num_identities ||
      head_->value.cols() != cfg_.embed_dim) {
    throw DimensionError("Model: checkpoint head shape disagrees with config");
  }
}

void Model::bind_params() {
  weights_.clear();
  biases_.clear();
  std::size_t layers = cfg_.hidden_dims.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    weights_.push_back(params_.get("layer" + std::to_string(l) + ".W"));
    biases_.push_back(params_.get("layer" + std::to_string(l) + ".b"));
  }
  head_ = params_.get("head.W");
}

NodePtr Model::embed(const Vector& item) const {
  if (item.size() != cfg_.input_dim) {
    throw DimensionError("embed: item dimension mismatch");
  }
  NodePtr h = constant_vec(item);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = add(matvec(weights_[l], h), biases_[l]);
    if (l + 1 < weights_.size()) h = relu(h);
  }
  return h;
}

NodePtr Model::logits(const NodePtr& z) const {
  if (z->value.rows() != cfg_.embed_dim || z->value.cols() != 1) {
    throw DimensionError("logits: embedding dimension mismatch");
  }
  return matvec(head_, z);
}

BatchForward Model::embed_batch(const MiniBatch& batch) const {
  BatchForward out;
  std::size_t total = 0;
  for (const auto& set : batch.sets) total += set.items.size();

  // One matrix pass for the whole batch; per-item nodes are column views.
  Matrix X(cfg_.input_dim, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (const auto& set : batch.sets) {
    out.set_offsets.push_back(static_cast<std::size_t>(col));
    out.set_sizes.push_back(set.items.size());
    for (const auto& item : set.items) {
      if (item.size() != cfg_.input_dim) {
        throw DimensionError("embed_batch: item dimension mismatch");
      }
      X.col(col++) = item;
      out.labels.push_back(set.label);
    }
  }
  NodePtr h = constant(std::move(X));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = broadcast_add_col(matvec(weights_[l], h), biases_[l]);
    if (l + 1 < weights_.size()) h = relu(h);
  }
  NodePtr all_logits = matvec(head_, h);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(total); ++j) {
    out.embeddings.push_back(column(h, j));
    out.logits.push_back(column(all_logits, j));
  }
  return out;
}

Vector Model::embed_value(const Vector& item) const {
  if (item.size() != cfg_.input_dim) {
    throw DimensionError("embed_value: item dimension mismatch");
  }
  Vector h = item;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = weights_[l]->value * h + biases_[l]->value.col(0);
    if (l + 1 < weights_.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

}  // namespace ide
