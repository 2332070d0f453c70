#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "ide/autodiff.hpp"

namespace ide {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named trainable parameters plus the seed they were initialized from.
/// Checkpoints round-trip bit-exactly (little-endian 64-bit floats).
class ParamStore {
 public:
  ParamStore() = default;
  explicit ParamStore(std::uint64_t seed) : seed_(seed) {}

  NodePtr create(const std::string& name, Matrix init);
  NodePtr get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return params_.size(); }

  const std::map<std::string, NodePtr>& all() const { return params_; }

  void zero_grads();
  // p <- p - lr * grad, over every parameter.
  void sgd_step(double lr);

  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::map<std::string, NodePtr> params_;
  std::uint64_t seed_ = 0;
};

// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                      Eigen::Index fan_in, Eigen::Index fan_out,
                      std::mt19937_64& rng);

}  // namespace ide
