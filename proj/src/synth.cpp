#include "ide/synth.hpp"
#include <cmath>

#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace ide {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kFormatVersion = 1;

// splitmix64 finalizer, used to derive per-set seeds from (seed, tags).
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector gaussian_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = dist(rng);
  return v;
}

void write_split(const std::string& path, const std::vector<SetSample>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write split file: " + path);
  auto write_i64 = [&](std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  write_i64(kFormatVersion);
  write_i64(static_cast<std::int64_t>(sets.size()));
  for (const auto& s : sets) {
    write_i64(s.set_label);
    write_i64(s.camera_id);
    write_i64(s.scene_id);
    write_i64(static_cast<std::int64_t>(s.items.size()));
    write_i64(s.items.empty() ? 0 : s.items[0].size());
    for (const auto& item : s.items) {
      out.write(reinterpret_cast<const char*>(item.data()),
                static_cast<std::streamsize>(sizeof(double) * item.size()));
    }
  }
}

void write_flags(const std::string& path, const std::vector<SetSample>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write flags file: " + path);
  for (const auto& s : sets) {
    for (bool f : s.corruption_flags) out.put(f ? 1 : 0);
  }
}

std::vector<SetSample> read_split(const std::string& path,
                                  const std::string& flags_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read split file: " + path);
  auto read_i64 = [&]() {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };
  if (read_i64() != kFormatVersion) {
    throw ConfigError("unsupported split format version: " + path);
  }
  std::int64_t count = read_i64();
  std::vector<SetSample> sets(static_cast<std::size_t>(count));
  for (auto& s : sets) {
    s.set_label = static_cast<int>(read_i64());
    s.camera_id = static_cast<int>(read_i64());
    s.scene_id = static_cast<int>(read_i64());
    std::int64_t n = read_i64();
    std::int64_t dim = read_i64();
    s.items.resize(static_cast<std::size_t>(n));
    for (auto& item : s.items) {
      item.resize(dim);
      in.read(reinterpret_cast<char*>(item.data()),
              static_cast<std::streamsize>(sizeof(double) * dim));
    }
    s.corruption_flags.assign(static_cast<std::size_t>(n), false);
    if (!in) throw ConfigError("truncated split file: " + path);
  }
  std::ifstream flags(flags_path, std::ios::binary);
  if (flags) {
    for (auto& s : sets) {
      for (std::size_t i = 0; i < s.corruption_flags.size(); ++i) {
        s.corruption_flags[i] = flags.get() != 0;
      }
    }
  }
  return sets;
}

std::vector<SetSample> generate_split(const IdentityWorld& world, int id_begin,
                                      int id_end, const BenchmarkConfig& cfg,
                                      const CorruptionSpec& spec, int scene_id,
                                      std::uint64_t salt) {
  std::vector<SetSample> sets;
  for (int id = id_begin; id < id_end; ++id) {
    for (int s = 0; s < cfg.sets_per_id; ++s) {
      std::uint64_t set_seed = mix(cfg.seed, mix(salt, mix(id, s)));
      SetSample sample = sample_set(world, id, cfg.items_per_set, spec, set_seed);
      sample.camera_id = s % 2;
      sample.scene_id = scene_id;
      sets.push_back(std::move(sample));
    }
  }
  return sets;
}

}  // namespace

void CorruptionSpec::validate() const {
  if (noise_sigma < 0.0) throw ConfigError("corruption: noise_sigma must be >= 0");
  if (outlier_rate < 0.0 || outlier_rate >= 1.0) {
    throw ConfigError("corruption: outlier_rate must be in [0,1)");
  }
  if (jitter_min <= 0.0 || jitter_max < jitter_min) {
    throw ConfigError("corruption: invalid jitter range");
  }
  if (set_bias_sigma < 0.0) {
    throw ConfigError("corruption: set_bias_sigma must be >= 0");
  }
}

void BenchmarkConfig::validate() const {
  if (num_train_ids < 2 || num_test_ids < 2) {
    throw ConfigError("benchmark: need at least 2 train and 2 test identities");
  }
  if (sets_per_id < 2) throw ConfigError("benchmark: sets_per_id must be >= 2");
  if (items_per_set < 1 || input_dim < 1) {
    throw ConfigError("benchmark: degenerate set or input dimensions");
  }
  if (cross_scene_noise_scale <= 0.0) {
    throw ConfigError("benchmark: cross_scene_noise_scale must be positive");
  }
  if (twin_offset < 0.0) throw ConfigError("benchmark: twin_offset must be >= 0");
  if (prototype_scale <= 0.0) {
    throw ConfigError("benchmark: prototype_scale must be positive");
  }
  if (prototype_dim < 0 || prototype_dim > input_dim) {
    throw ConfigError("benchmark: prototype_dim must be in [0, input_dim]");
  }
  if (fine_dims < 1 || fine_dims > input_dim) {
    throw ConfigError("benchmark: fine_dims must be in [1, input_dim]");
  }
  if (nuisance_dims < 0 ||
      (prototype_dim == 0 ? input_dim : prototype_dim) + nuisance_dims > input_dim) {
    throw ConfigError(
        "benchmark: prototype_dim + nuisance_dims must fit within input_dim");
  }
  if (corruption.set_bias_sigma > 0.0 && nuisance_dims == 0 && prototype_dim != 0) {
    throw ConfigError(
        "benchmark: set_bias_sigma needs nuisance_dims when prototypes are "
        "confined to a subspace");
  }
  corruption.validate();
}

IdentityWorld generate_world(int num_ids, int input_dim, std::uint64_t seed,
                             int scene_id, double twin_offset,
                             double prototype_scale, int prototype_dim,
                             int fine_dims_req, int nuisance_dims) {
  if (num_ids < 2 || input_dim < 1) {
    throw ConfigError("generate_world: degenerate dimensions");
  }
  if (twin_offset < 0.0) {
    throw ConfigError("generate_world: twin_offset must be >= 0");
  }
  if (prototype_scale <= 0.0) {
    throw ConfigError("generate_world: prototype_scale must be positive");
  }
  if (prototype_dim < 0 || prototype_dim > input_dim) {
    throw ConfigError("generate_world: prototype_dim out of range");
  }
  if (fine_dims_req < 1) {
    throw ConfigError("generate_world: fine_dims must be >= 1");
  }
  const int proto_dim = prototype_dim == 0 ? input_dim : prototype_dim;
  if (nuisance_dims < 0 || proto_dim + nuisance_dims > input_dim) {
    throw ConfigError(
        "generate_world: identity and nuisance subspaces must fit input_dim");
  }
  IdentityWorld world;
  world.num_identities = num_ids;
  world.input_dim = input_dim;
  world.scene_id = scene_id;
  world.seed = seed;
  std::mt19937_64 rng(seed);
  // All prototypes live in one proto_dim-dimensional identity subspace.
  // Twin offsets live in a shared fine-feature sub-subspace of it, so
  // resolving any twin pair requires the same directions as every other pair.
  const int fine_dims = std::min(fine_dims_req, proto_dim);
  const int frame_dims = proto_dim + nuisance_dims;
  Eigen::MatrixXd frame(input_dim, frame_dims);
  for (int c = 0; c < frame_dims; ++c) frame.col(c) = gaussian_vector(input_dim, rng);
  frame = Eigen::HouseholderQR<Eigen::MatrixXd>(frame).householderQ() *
          Eigen::MatrixXd::Identity(input_dim, frame_dims);
  const auto basis = frame.leftCols(proto_dim);
  world.nuisance_basis = frame.rightCols(nuisance_dims);
  const auto fine = basis.leftCols(fine_dims);
  world.prototypes.reserve(static_cast<std::size_t>(num_ids));
  auto fine_direction = [&]() {
    Vector g = gaussian_vector(fine_dims, rng);
    Vector dir = fine * g;
    return Vector(dir / dir.norm());
  };
  for (int i = 0; i < num_ids; ++i) {
    if (twin_offset > 0.0 && (i % 2) == 1) {
      // odd identities are near-twins of the preceding even identity
      world.prototypes.push_back(world.prototypes.back() +
                                 twin_offset * fine_direction());
    } else {
      world.prototypes.push_back(
          Vector(prototype_scale * (basis * gaussian_vector(proto_dim, rng))));
    }
  }
  for (int i = 0; i < num_ids; ++i) {
    for (int j = i + 1; j < num_ids; ++j) {
      if ((world.prototypes[i] - world.prototypes[j]).norm() <= 0.0) {
        throw ConfigError("generate_world: coincident prototypes");
      }
    }
  }
  return world;
}

SetSample sample_set(const IdentityWorld& world, int identity, int n,
                     const CorruptionSpec& spec, std::uint64_t seed) {
  if (identity < 0 || identity >= world.num_identities) {
    throw ConfigError("sample_set: identity out of range");
  }
  if (n < 1) throw ConfigError("sample_set: need n >= 1");
  spec.validate();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(spec.jitter_min, spec.jitter_max);
  std::uniform_int_distribution<int> other(0, world.num_identities - 2);

  SetSample sample;
  sample.set_label = identity;
  sample.items.reserve(static_cast<std::size_t>(n));
  sample.corruption_flags.reserve(static_cast<std::size_t>(n));
  Vector set_bias = Vector::Zero(world.input_dim);
  if (spec.set_bias_sigma > 0.0) {
    // Random direction, fixed magnitude: every set is equally affected, so
    // no set gets systematically luckier capture conditions than another.
    // In the nuisance subspace when the world has one, otherwise full-space.
    Vector dir;
    double dims;
    if (world.nuisance_basis.cols() > 0) {
      dims = static_cast<double>(world.nuisance_basis.cols());
      dir = world.nuisance_basis *
            gaussian_vector(static_cast<int>(world.nuisance_basis.cols()), rng);
    } else {
      dims = static_cast<double>(world.input_dim);
      dir = gaussian_vector(world.input_dim, rng);
    }
    set_bias = (spec.set_bias_sigma * std::sqrt(dims) / dir.norm()) * dir;
  }
  for (int i = 0; i < n; ++i) {
    bool outlier = unit(rng) < spec.outlier_rate;
    int source = identity;
    if (outlier) {
      int o = other(rng);
      source = o >= identity ? o + 1 : o;
    }
    double sigma = spec.noise_sigma * jitter(rng);
    Vector item = world.prototypes[source] + set_bias +
                  sigma * gaussian_vector(world.input_dim, rng);
    sample.items.push_back(std::move(item));
    sample.corruption_flags.push_back(outlier);
  }
  return sample;
}

MiniBatch sample_minibatch(const std::vector<SetSample>& pool,
                           int persons_per_batch, int sets_per_person,
                           int items_per_set, std::mt19937_64& rng) {
  std::vector<int> labels;
  for (const auto& s : pool) {
    if (std::find(labels.begin(), labels.end(), s.set_label) == labels.end()) {
      labels.push_back(s.set_label);
    }
  }
  if (static_cast<int>(labels.size()) < persons_per_batch) {
    throw ConfigError("sample_minibatch: not enough identities in pool");
  }
  std::shuffle(labels.begin(), labels.end(), rng);

  MiniBatch batch;
  for (int p = 0; p < persons_per_batch; ++p) {
    int label = labels[static_cast<std::size_t>(p)];
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].set_label == label) candidates.push_back(i);
    }
    if (static_cast<int>(candidates.size()) < sets_per_person) {
      throw ConfigError("sample_minibatch: identity has too few sets");
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (int s = 0; s < sets_per_person; ++s) {
      const SetSample& full = pool[candidates[static_cast<std::size_t>(s)]];
      if (static_cast<int>(full.items.size()) < items_per_set) {
        throw ConfigError("sample_minibatch: set smaller than items_per_set");
      }
      std::vector<std::size_t> idx(full.items.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      BatchSet bs;
      bs.label = label;
      for (int i = 0; i < items_per_set; ++i) {
        bs.items.push_back(full.items[idx[static_cast<std::size_t>(i)]]);
      }
      batch.sets.push_back(std::move(bs));
    }
  }
  return batch;
}

Benchmark build_benchmark(const BenchmarkConfig& config) {
  config.validate();
  Benchmark bench;
  bench.config = config;
  int total_ids = config.num_train_ids + config.num_test_ids;
  bench.world = generate_world(total_ids, config.input_dim,
                               mix(config.seed, 0xA11CE), /*scene_id=*/0,
                               config.twin_offset, config.prototype_scale,
                               config.prototype_dim, config.fine_dims,
                               config.nuisance_dims);

  bench.train_sets = generate_split(bench.world, 0, config.num_train_ids, config,
                                    config.corruption, /*scene_id=*/0, 0x7721);
  bench.test_sets = generate_split(bench.world, config.num_train_ids, total_ids,
                                   config, config.corruption, /*scene_id=*/0,
                                   0x7E57);
  if (config.with_cross_scene) {
    CorruptionSpec shifted = config.corruption;
    shifted.noise_sigma *= config.cross_scene_noise_scale;
    shifted.set_bias_sigma *= config.cross_scene_noise_scale;
    bench.cross_scene_sets =
        generate_split(bench.world, config.num_train_ids, total_ids, config,
                       shifted, /*scene_id=*/1, 0xC505);
  }
  return bench;
}

void save_benchmark(const Benchmark& bench, const std::string& dir,
                    const std::string& config_fingerprint) {
  fs::create_directories(dir);
  const auto& cfg = bench.config;

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["fingerprint"] = config_fingerprint;
  manifest["seed"] = cfg.seed;
  manifest["config"] = {
      {"num_train_ids", cfg.num_train_ids},
      {"num_test_ids", cfg.num_test_ids},
      {"sets_per_id", cfg.sets_per_id},
      {"items_per_set", cfg.items_per_set},
      {"input_dim", cfg.input_dim},
      {"twin_offset", cfg.twin_offset},
      {"prototype_scale", cfg.prototype_scale},
      {"prototype_dim", cfg.prototype_dim},
      {"fine_dims", cfg.fine_dims},
      {"nuisance_dims", cfg.nuisance_dims},
      {"noise_sigma", cfg.corruption.noise_sigma},
      {"outlier_rate", cfg.corruption.outlier_rate},
      {"jitter_min", cfg.corruption.jitter_min},
      {"jitter_max", cfg.corruption.jitter_max},
      {"set_bias_sigma", cfg.corruption.set_bias_sigma},
      {"cross_scene_noise_scale", cfg.cross_scene_noise_scale},
      {"with_cross_scene", cfg.with_cross_scene},
  };
  json splits;
  auto ids_of = [](const std::vector<SetSample>& sets) {
    std::vector<int> ids;
    for (const auto& s : sets) {
      if (std::find(ids.begin(), ids.end(), s.set_label) == ids.end()) {
        ids.push_back(s.set_label);
      }
    }
    return ids;
  };
  splits["train"] = ids_of(bench.train_sets);
  splits["test"] = ids_of(bench.test_sets);
  if (cfg.with_cross_scene) splits["cross_scene"] = ids_of(bench.cross_scene_sets);
  manifest["splits"] = splits;

  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";

  write_split((fs::path(dir) / "train.bin").string(), bench.train_sets);
  write_flags((fs::path(dir) / "train.flags.bin").string(), bench.train_sets);
  write_split((fs::path(dir) / "test.bin").string(), bench.test_sets);
  write_flags((fs::path(dir) / "test.flags.bin").string(), bench.test_sets);
  if (cfg.with_cross_scene) {
    write_split((fs::path(dir) / "cross_scene.bin").string(), bench.cross_scene_sets);
    write_flags((fs::path(dir) / "cross_scene.flags.bin").string(),
                bench.cross_scene_sets);
  }
}

Benchmark load_benchmark(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw ConfigError("missing manifest.json in " + dir);
  json manifest = json::parse(mf);
  if (manifest.at("format_version").get<int>() != kFormatVersion) {
    throw ConfigError("unsupported benchmark format version in " + dir);
  }
  Benchmark bench;
  auto& cfg = bench.config;
  const json& jc = manifest.at("config");
  cfg.num_train_ids = jc.at("num_train_ids").get<int>();
  cfg.num_test_ids = jc.at("num_test_ids").get<int>();
  cfg.sets_per_id = jc.at("sets_per_id").get<int>();
  cfg.items_per_set = jc.at("items_per_set").get<int>();
  cfg.input_dim = jc.at("input_dim").get<int>();
  cfg.twin_offset = jc.at("twin_offset").get<double>();
  cfg.prototype_scale = jc.at("prototype_scale").get<double>();
  cfg.prototype_dim = jc.at("prototype_dim").get<int>();
  cfg.fine_dims = jc.at("fine_dims").get<int>();
  cfg.nuisance_dims = jc.at("nuisance_dims").get<int>();
  cfg.corruption.noise_sigma = jc.at("noise_sigma").get<double>();
  cfg.corruption.outlier_rate = jc.at("outlier_rate").get<double>();
  cfg.corruption.jitter_min = jc.at("jitter_min").get<double>();
  cfg.corruption.jitter_max = jc.at("jitter_max").get<double>();
  cfg.corruption.set_bias_sigma = jc.at("set_bias_sigma").get<double>();
  cfg.cross_scene_noise_scale = jc.at("cross_scene_noise_scale").get<double>();
  cfg.with_cross_scene = jc.at("with_cross_scene").get<bool>();
  cfg.seed = manifest.at("seed").get<std::uint64_t>();

  bench.world = generate_world(cfg.num_train_ids + cfg.num_test_ids,
                               cfg.input_dim, mix(cfg.seed, 0xA11CE),
                               /*scene_id=*/0, cfg.twin_offset,
                               cfg.prototype_scale, cfg.prototype_dim,
                               cfg.fine_dims, cfg.nuisance_dims);
  bench.train_sets = read_split((fs::path(dir) / "train.bin").string(),
                                (fs::path(dir) / "train.flags.bin").string());
  bench.test_sets = read_split((fs::path(dir) / "test.bin").string(),
                               (fs::path(dir) / "test.flags.bin").string());
  if (cfg.with_cross_scene) {
    bench.cross_scene_sets =
        read_split((fs::path(dir) / "cross_scene.bin").string(),
                   (fs::path(dir) / "cross_scene.flags.bin").string());
  }
  return bench;
}

}  // namespace ide
