#include "ide/config.hpp"

#include <fstream>

#include <json.hpp>

namespace ide {

namespace {

using nlohmann::json;

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
  throw ConfigError("config: unknown key '" + section + "." + key + "'");
}

// Applies `fields`, then rejects anything left over.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: section '" + name_ + "' must be an object");
    for (const auto& [key, _] : j_.items()) pending_.push_back(key);
  }

  template <typename T>
  void field(const std::string& key, T& target) {
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        target = it->get<T>();
      } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + name_ + "." + key + "'");
      }
      consume(key);
    }
  }

  void field_enum(const std::string& key, FusionMode& target) {
    std::string s;
    bool present = j_.contains(key);
    field(key, s);
    if (present) target = fusion_mode_from_string(s);
  }
  void field_enum(const std::string& key, CeMode& target) {
    std::string s;
    bool present = j_.contains(key);
    field(key, s);
    if (present) target = ce_mode_from_string(s);
  }
  void field_enum(const std::string& key, GaussianDenominator& target) {
    std::string s;
    bool present = j_.contains(key);
    field(key, s);
    if (present) target = denominator_from_string(s);
  }

  const json* subsection(const std::string& key) {
    if (auto it = j_.find(key); it != j_.end()) {
      consume(key);
      return &*it;
    }
    return nullptr;
  }

  void finish() const {
    if (!pending_.empty()) unknown_key(name_, pending_.front());
  }

 private:
  void consume(const std::string& key) {
    std::erase(pending_, key);
  }

  const json& j_;
  std::string name_;
  std::vector<std::string> pending_;
};

}  // namespace

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kAverage: return "average";
    case FusionMode::kFfa: return "ffa";
    case FusionMode::kFfaMh: return "ffa_mh";
  }
  return "?";
}

std::string to_string(CeMode mode) {
  return mode == CeMode::kStandard ? "standard" : "fla_weighted";
}

std::string to_string(GaussianDenominator denom) {
  return denom == GaussianDenominator::kSigmaSq ? "sigma_sq" : "two_sigma_sq";
}

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "average") return FusionMode::kAverage;
  if (s == "ffa") return FusionMode::kFfa;
  if (s == "ffa_mh") return FusionMode::kFfaMh;
  throw ConfigError("config: invalid fusion_mode '" + s + "'");
}

CeMode ce_mode_from_string(const std::string& s) {
  if (s == "standard") return CeMode::kStandard;
  if (s == "fla_weighted") return CeMode::kFlaWeighted;
  throw ConfigError("config: invalid ce_mode '" + s + "'");
}

GaussianDenominator denominator_from_string(const std::string& s) {
  if (s == "sigma_sq") return GaussianDenominator::kSigmaSq;
  if (s == "two_sigma_sq") return GaussianDenominator::kTwoSigmaSq;
  throw ConfigError("config: invalid gaussian_denominator '" + s + "'");
}

void ExperimentConfig::validate() const {
  benchmark.validate();
  model.validate();
  training.validate();
  if (model.input_dim != benchmark.input_dim) {
    throw ConfigError("config: model.input_dim must equal benchmark input_dim");
  }
  if (model.num_identities != benchmark.num_train_ids) {
    throw ConfigError("config: model.num_identities must equal num_train_ids");
  }
  if (ablation_seeds.empty()) throw ConfigError("config: ablation_seeds empty");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  Section root(j, "");
  root.field("seed", cfg.seed);
  root.field("output_dir", cfg.output_dir);
  root.field("ablation_seeds", cfg.ablation_seeds);
  root.field("sweep_sigma_fla", cfg.sweep_sigma_fla);
  root.field("sweep_sigma_ffa", cfg.sweep_sigma_ffa);
  root.field("log_attention", cfg.log_attention);

  if (const json* jb = root.subsection("benchmark")) {
    Section b(*jb, "benchmark");
    b.field("num_train_ids", cfg.benchmark.num_train_ids);
    b.field("num_test_ids", cfg.benchmark.num_test_ids);
    b.field("sets_per_id", cfg.benchmark.sets_per_id);
    b.field("items_per_set", cfg.benchmark.items_per_set);
    b.field("input_dim", cfg.benchmark.input_dim);
    b.field("twin_offset", cfg.benchmark.twin_offset);
    b.field("prototype_scale", cfg.benchmark.prototype_scale);
    b.field("prototype_dim", cfg.benchmark.prototype_dim);
    b.field("fine_dims", cfg.benchmark.fine_dims);
    b.field("nuisance_dims", cfg.benchmark.nuisance_dims);
    b.field("noise_sigma", cfg.benchmark.corruption.noise_sigma);
    b.field("outlier_rate", cfg.benchmark.corruption.outlier_rate);
    b.field("jitter_min", cfg.benchmark.corruption.jitter_min);
    b.field("jitter_max", cfg.benchmark.corruption.jitter_max);
    b.field("set_bias_sigma", cfg.benchmark.corruption.set_bias_sigma);
    b.field("cross_scene_noise_scale", cfg.benchmark.cross_scene_noise_scale);
    b.field("with_cross_scene", cfg.benchmark.with_cross_scene);
    b.finish();
  }
  if (const json* jm = root.subsection("model")) {
    Section m(*jm, "model");
    m.field("hidden_dims", cfg.model.hidden_dims);
    m.field("embed_dim", cfg.model.embed_dim);
    m.finish();
  }
  if (const json* jt = root.subsection("training")) {
    Section t(*jt, "training");
    t.field("learning_rate", cfg.training.learning_rate);
    t.field("iterations", cfg.training.iterations);
    t.field("persons_per_batch", cfg.training.persons_per_batch);
    t.field("sets_per_person", cfg.training.sets_per_person);
    t.field("items_per_set", cfg.training.items_per_set);
    t.field_enum("ce_mode", cfg.training.ce_mode);
    t.finish();
  }
  if (const json* ja = root.subsection("attention")) {
    Section a(*ja, "attention");
    a.field("sigma_fla", cfg.training.attention.sigma_fla);
    a.field("sigma_ffa", cfg.training.attention.sigma_ffa);
    a.field_enum("fusion_mode", cfg.training.attention.fusion_mode);
    a.field_enum("gaussian_denominator", cfg.training.attention.denominator);
    a.finish();
  }
  if (const json* jl = root.subsection("loss")) {
    Section l(*jl, "loss");
    l.field("margin", cfg.training.loss.margin);
    l.field("wcel_weight", cfg.training.loss.wcel_weight);
    l.field("cl_weight", cfg.training.loss.cl_weight);
    l.finish();
  }
  root.finish();

  // Derived couplings: one seed and one input_dim drive everything.
  cfg.benchmark.seed = cfg.seed;
  cfg.training.seed = cfg.seed;
  cfg.model.input_dim = cfg.benchmark.input_dim;
  cfg.model.num_identities = cfg.benchmark.num_train_ids;
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["ablation_seeds"] = ablation_seeds;
  j["sweep_sigma_fla"] = sweep_sigma_fla;
  j["sweep_sigma_ffa"] = sweep_sigma_ffa;
  j["log_attention"] = log_attention;
  j["benchmark"] = {
      {"num_train_ids", benchmark.num_train_ids},
      {"num_test_ids", benchmark.num_test_ids},
      {"sets_per_id", benchmark.sets_per_id},
      {"items_per_set", benchmark.items_per_set},
      {"input_dim", benchmark.input_dim},
      {"twin_offset", benchmark.twin_offset},
      {"prototype_scale", benchmark.prototype_scale},
      {"prototype_dim", benchmark.prototype_dim},
      {"fine_dims", benchmark.fine_dims},
      {"nuisance_dims", benchmark.nuisance_dims},
      {"noise_sigma", benchmark.corruption.noise_sigma},
      {"outlier_rate", benchmark.corruption.outlier_rate},
      {"jitter_min", benchmark.corruption.jitter_min},
      {"jitter_max", benchmark.corruption.jitter_max},
      {"set_bias_sigma", benchmark.corruption.set_bias_sigma},
      {"cross_scene_noise_scale", benchmark.cross_scene_noise_scale},
      {"with_cross_scene", benchmark.with_cross_scene},
  };
  j["model"] = {
      {"hidden_dims", model.hidden_dims},
      {"embed_dim", model.embed_dim},
  };
  j["training"] = {
      {"learning_rate", training.learning_rate},
      {"iterations", training.iterations},
      {"persons_per_batch", training.persons_per_batch},
      {"sets_per_person", training.sets_per_person},
      {"items_per_set", training.items_per_set},
      {"ce_mode", to_string(training.ce_mode)},
  };
  j["attention"] = {
      {"sigma_fla", training.attention.sigma_fla},
      {"sigma_ffa", training.attention.sigma_ffa},
      {"fusion_mode", to_string(training.attention.fusion_mode)},
      {"gaussian_denominator", to_string(training.attention.denominator)},
  };
  j["loss"] = {
      {"margin", training.loss.margin},
      {"wcel_weight", training.loss.wcel_weight},
      {"cl_weight", training.loss.cl_weight},
  };
  return j.dump(2);
}

std::string ExperimentConfig::fingerprint() const {
  return fnv1a_hex(canonical_json());
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace ide
