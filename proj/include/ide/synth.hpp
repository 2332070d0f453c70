#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ide/data.hpp"

namespace ide {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IdentityWorld {
  int num_identities = 0;
  int input_dim = 0;
  int scene_id = 0;
  std::uint64_t seed = 0;
  std::vector<Vector> prototypes;
  // Orthonormal basis (input_dim x nuisance_dims, possibly empty) of the
  // nuisance subspace, orthogonal to the identity subspace. Set biases are
  // drawn from it, so an embedder can cancel them without losing identity.
  Matrix nuisance_basis;
};

struct CorruptionSpec {
  double noise_sigma = 1.0;    // additive Gaussian, models perceptual quality
  double outlier_rate = 0.0;   // item replaced by another identity's sample
  double jitter_min = 0.5;     // per-item multiplier on noise_sigma
  double jitter_max = 1.5;
  // Per-set bias: one Gaussian offset shared by every item of a set, modeling
  // capture conditions (lighting, viewpoint, camera color cast). It does not
  // average out within a set, so set representations must learn to cancel it.
  double set_bias_sigma = 0.0;

  void validate() const;
};

/// Generator-side set: carries the ground-truth corruption flags, which the
/// trainer never sees (it gets a BatchSet view without them).
struct SetSample {
  std::vector<Vector> items;
  int set_label = -1;
  int camera_id = 0;
  int scene_id = 0;
  std::vector<bool> corruption_flags;

  BatchSet training_view() const { return BatchSet{items, set_label}; }
};

struct BenchmarkConfig {
  int num_train_ids = 60;
  int num_test_ids = 30;
  int sets_per_id = 4;
  int items_per_set = 40;
  int input_dim = 32;
  // Identities are generated in pairs of near-twins separated by this offset
  // (0 disables pairing). Twins make retrieval hinge on fine-grained margins,
  // which is where corrupted supervision actually hurts.
  double twin_offset = 1.8;
  // Per-dimension standard deviation of the prototype draw. Controls the
  // overall feature scale relative to the contrastive margin.
  double prototype_scale = 0.6;
  // Dimension of the identity subspace the prototypes are drawn from
  // (0 = full input_dim). A low-dimensional subspace puts corruption damage
  // and identity discrimination in the same directions, so noisy supervision
  // measurably degrades retrieval instead of dissipating into unused axes.
  int prototype_dim = 6;
  // Dimension of the shared fine-feature subspace that separates twin pairs.
  // Fewer fine dimensions concentrate the retrieval-critical structure, so
  // the quality of the learned map along them dominates test accuracy.
  int fine_dims = 2;
  // Dimension of the nuisance subspace that carries per-set biases. Requires
  // prototype_dim > 0 and prototype_dim + nuisance_dims <= input_dim.
  int nuisance_dims = 8;
  // Benchmark default corruption: moderate perceptual noise plus a fixed-
  // magnitude per-set nuisance bias; outlier_rate stays an experiment knob.
  CorruptionSpec corruption{.noise_sigma = 0.35, .set_bias_sigma = 1.2};
  double cross_scene_noise_scale = 1.5;
  bool with_cross_scene = true;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Benchmark {
  BenchmarkConfig config;
  IdentityWorld world;  // train ids [0, T), test ids [T, T + num_test_ids)
  std::vector<SetSample> train_sets;
  std::vector<SetSample> test_sets;
  std::vector<SetSample> cross_scene_sets;
};

/// With twin_offset > 0, identities form near-twin pairs: odd index i is a
/// twin of i-1, displaced along the shared fine-feature subspace (the first
/// few axes of the identity subspace).
IdentityWorld generate_world(int num_ids, int input_dim, std::uint64_t seed,
                             int scene_id = 0, double twin_offset = 0.0,
                             double prototype_scale = 1.0,
                             int prototype_dim = 0, int fine_dims = 4,
                             int nuisance_dims = 0);

SetSample sample_set(const IdentityWorld& world, int identity, int n,
                     const CorruptionSpec& spec, std::uint64_t seed);

/// Draws persons_per_batch identities, sets_per_person sets each, and
/// subsamples items_per_set items from every chosen set.
MiniBatch sample_minibatch(const std::vector<SetSample>& pool,
                           int persons_per_batch, int sets_per_person,
                           int items_per_set, std::mt19937_64& rng);

Benchmark build_benchmark(const BenchmarkConfig& config);

void save_benchmark(const Benchmark& bench, const std::string& dir,
                    const std::string& config_fingerprint);
Benchmark load_benchmark(const std::string& dir);

}  // namespace ide
