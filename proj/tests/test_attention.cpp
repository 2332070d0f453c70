#include <doctest.h>

#include <cmath>

#include "ide/attention.hpp"
#include "oracles.hpp"

using namespace ide;

TEST_CASE("id_quality picks the label's softmax component") {
  Vector probs(10);
  probs.setConstant(0.1);
  CHECK(id_quality(probs, 3) == doctest::Approx(0.1));

  Vector p2(2);
  p2 << 0.9, 0.1;
  CHECK(id_quality(p2, 0) == doctest::Approx(0.9));
  CHECK(id_quality(p2, 1) == doctest::Approx(0.1));
  CHECK_THROWS_AS(id_quality(p2, 2), DimensionError);
  CHECK_THROWS_AS(id_quality(p2, -1), DimensionError);
}

TEST_CASE("fla_score values") {
  CHECK(fla_score(0.5, 0.18) == doctest::Approx(1.0));
  CHECK(fla_score(0.5 + 0.18, 0.18) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(fla_score(0.99, 0.18) ==
        doctest::Approx(std::exp(-0.49 * 0.49 / (0.18 * 0.18))).epsilon(1e-12));
  CHECK(fla_score(0.99, 0.18) == doctest::Approx(6.04e-4).epsilon(1e-2));
  CHECK_THROWS_AS(fla_score(0.5, 0.0), ContractError);
}

TEST_CASE("ffa_score values") {
  CHECK(ffa_score(1.0, 0.68) == doctest::Approx(1.0));
  CHECK(ffa_score(1.0 - 0.68, 0.68) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(ffa_score(0.0, 0.68) == doctest::Approx(std::exp(-1.0 / 0.4624)).epsilon(1e-12));
  CHECK(ffa_score(0.0, 0.68) == doctest::Approx(0.1151).epsilon(1e-3));
}

TEST_CASE("ffa_mh_score is the medium-hard variant") {
  CHECK(ffa_mh_score(0.5, 0.68) == doctest::Approx(1.0));
  CHECK(ffa_mh_score(1.0, 0.68) == doctest::Approx(std::exp(-0.25 / 0.4624)).epsilon(1e-12));
  CHECK(ffa_mh_score(1.0, 0.68) == doctest::Approx(0.5824).epsilon(1e-3));
  CHECK(ffa_mh_score(0.3, 0.68) == doctest::Approx(ffa_mh_score(0.7, 0.68)).epsilon(1e-12));
}

TEST_CASE("fla symmetry about 0.5") {
  for (double delta = 0.01; delta < 0.5; delta += 0.037) {
    CHECK(std::abs(fla_score(0.5 + delta, 0.18) - fla_score(0.5 - delta, 0.18)) < 1e-12);
  }
}

TEST_CASE("ffa strictly increasing on [0,1]") {
  double prev = ffa_score(0.0, 0.68);
  for (double s = 0.02; s <= 1.0; s += 0.02) {
    double cur = ffa_score(s, 0.68);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("two_sigma_sq denominator switch") {
  double s = 0.8;
  double a = fla_score(s, 0.18, GaussianDenominator::kSigmaSq);
  double b = fla_score(s, 0.18, GaussianDenominator::kTwoSigmaSq);
  CHECK(b == doctest::Approx(std::sqrt(a)).epsilon(1e-12));
}

TEST_CASE("fuse_set hand-computed cases") {
  Vector e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  auto z1 = constant_vec(e1), z2 = constant_vec(e2);

  auto mean2 = fuse_set({z1, z2}, {1.0, 1.0});
  CHECK(mean2->value(0, 0) == doctest::Approx(0.5));
  CHECK(mean2->value(1, 0) == doctest::Approx(0.5));

  auto first = fuse_set({z1, z2}, {1.0, 0.0});
  CHECK(first->value(0, 0) == doctest::Approx(1.0));
  CHECK(first->value(1, 0) == doctest::Approx(0.0));

  auto weighted = fuse_set({z1, z2}, {0.2, 0.8});
  CHECK(weighted->value(0, 0) == doctest::Approx(0.2));
  CHECK(weighted->value(1, 0) == doctest::Approx(0.8));

  CHECK_THROWS_AS(fuse_set({}, {}), DimensionError);
}

TEST_CASE("fuse_set convex hull and weight rescaling") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NodePtr> zs;
    std::vector<double> w, w2;
    std::uniform_real_distribution<double> wd(0.01, 2.0);
    for (int i = 0; i < 5; ++i) {
      zs.push_back(constant(oracles::random_matrix(4, 1, rng)));
      w.push_back(wd(rng));
      w2.push_back(w.back() * 2.0);
    }
    Matrix fused = fuse_set(zs, w)->value;
    for (Eigen::Index r = 0; r < 4; ++r) {
      double lo = zs[0]->value(r, 0), hi = lo;
      for (auto& z : zs) {
        lo = std::min(lo, z->value(r, 0));
        hi = std::max(hi, z->value(r, 0));
      }
      CHECK(fused(r, 0) >= lo - 1e-12);
      CHECK(fused(r, 0) <= hi + 1e-12);
    }
    Matrix fused2 = fuse_set(zs, w2)->value;
    CHECK((fused - fused2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("huge sigma_ffa collapses to average fusion") {
  std::mt19937_64 rng(5);
  std::vector<NodePtr> zs;
  std::vector<double> w;
  AttentionConfig cfg;
  cfg.sigma_ffa = 1e6;
  std::uniform_real_distribution<double> sd(0.01, 0.99);
  for (int i = 0; i < 9; ++i) {
    zs.push_back(constant(oracles::random_matrix(6, 1, rng)));
    w.push_back(ffa_score(sd(rng), cfg.sigma_ffa));
  }
  Matrix fused = fuse_set(zs, w)->value;
  Matrix avg = Matrix::Zero(6, 1);
  for (auto& z : zs) avg += z->value;
  avg /= 9.0;
  CHECK((fused - avg).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("degenerate weights fall back to average with a counter") {
  Vector e1(2), e2(2);
  e1 << 2, 0;
  e2 << 0, 2;
  FuseStats stats;
  auto fused = fuse_set({constant_vec(e1), constant_vec(e2)}, {1e-300, 1e-300}, &stats);
  CHECK(stats.degenerate_fallbacks == 1);
  CHECK(fused->value(0, 0) == doctest::Approx(1.0));
  CHECK(fused->value(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("single item set fuses to itself") {
  Vector e(3);
  e << 1, 2, 3;
  auto fused = fuse_set({constant_vec(e)}, {0.4});
  CHECK((fused->value.col(0) - e).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gradient through fusion is scaled by normalized constant weights") {
  std::mt19937_64 rng(9);
  auto z1 = constant(oracles::random_matrix(3, 1, rng));
  auto z2 = constant(oracles::random_matrix(3, 1, rng));
  double w1 = 0.3, w2 = 1.1;
  auto fused = fuse_set({z1, z2}, {w1, w2});
  backward(sum(fused));
  // dL/dz_i = w_i / sum(w) * ones
  CHECK(z1->grad(0, 0) == doctest::Approx(w1 / (w1 + w2)).epsilon(1e-12));
  CHECK(z2->grad(1, 0) == doctest::Approx(w2 / (w1 + w2)).epsilon(1e-12));
}
