#include <doctest.h>

#include "ide/config.hpp"

using namespace ide;

TEST_CASE("defaults parse and validate") {
  ExperimentConfig cfg = ExperimentConfig::from_json_text("{}");
  CHECK(cfg.benchmark.num_train_ids == 60);
  CHECK(cfg.training.attention.sigma_fla == doctest::Approx(0.18));
  CHECK(cfg.training.attention.sigma_ffa == doctest::Approx(0.68));
  CHECK(cfg.training.loss.margin == doctest::Approx(1.2));
  CHECK(cfg.training.learning_rate == doctest::Approx(1e-3));
  CHECK(cfg.model.num_identities == 60);
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    ExperimentConfig::from_json_text(R"({"benchmark": {"nois_sigma": 1.0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("nois_sigma") != std::string::npos);
  }
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"unexpected": 1})"), ConfigError);
}

TEST_CASE("values round trip through canonical serialization") {
  ExperimentConfig cfg = ExperimentConfig::from_json_text(R"({
    "seed": 9,
    "benchmark": {"num_train_ids": 10, "num_test_ids": 5, "outlier_rate": 0.25,
                   "input_dim": 12, "prototype_dim": 0, "nuisance_dims": 0,
                   "set_bias_sigma": 0.0},
    "model": {"embed_dim": 8, "hidden_dims": [16, 16]},
    "attention": {"fusion_mode": "ffa_mh", "sigma_fla": 0.2},
    "training": {"iterations": 77, "ce_mode": "standard"},
    "loss": {"margin": 2.0}
  })");
  CHECK(cfg.seed == 9);
  CHECK(cfg.benchmark.corruption.outlier_rate == doctest::Approx(0.25));
  CHECK(cfg.model.input_dim == 12);
  CHECK(cfg.model.num_identities == 10);
  CHECK(cfg.training.attention.fusion_mode == FusionMode::kFfaMh);
  CHECK(cfg.training.ce_mode == CeMode::kStandard);

  ExperimentConfig again = ExperimentConfig::from_json_text(cfg.canonical_json());
  CHECK(again.canonical_json() == cfg.canonical_json());
  CHECK(again.fingerprint() == cfg.fingerprint());
}

TEST_CASE("fingerprint changes with the config") {
  ExperimentConfig a = ExperimentConfig::from_json_text("{}");
  ExperimentConfig b = ExperimentConfig::from_json_text(R"({"seed": 2})");
  CHECK(a.fingerprint() != b.fingerprint());
  CHECK(a.fingerprint().size() == 16);
}

TEST_CASE("invalid enum values are config errors") {
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"attention": {"fusion_mode": "max"}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"training": {"ce_mode": "focal"}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"attention": {"gaussian_denominator": "x"}})"),
      ConfigError);
}

TEST_CASE("malformed json is a config error") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{"), ConfigError);
}
