#include <doctest.h>

#include <cmath>

#include "ide/losses.hpp"
#include "oracles.hpp"

using namespace ide;

TEST_CASE("single image at s=0.5 gives ln 2") {
  auto s = constant(0.5);
  auto loss = weighted_cross_entropy({s}, {1.0});
  CHECK(loss->scalar() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("equal weights reduce to mean cross-entropy") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> sd(0.05, 0.95);
  std::vector<NodePtr> conf;
  double mean_ce = 0.0;
  const int n = 12;
  for (int i = 0; i < n; ++i) {
    double s = sd(rng);
    conf.push_back(constant(s));
    mean_ce -= std::log(s) / n;
  }
  auto loss = weighted_cross_entropy(conf, std::vector<double>(n, 1.0));
  CHECK(std::abs(loss->scalar() - mean_ce) < 1e-12);

  // and the weights are scale invariant in their normalized form
  auto loss3 = weighted_cross_entropy(conf, std::vector<double>(n, 3.0));
  CHECK(std::abs(loss->scalar() - loss3->scalar()) < 1e-12);
}

TEST_CASE("weighted cross entropy gradient matches the closed form and FD") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> sd(0.05, 0.95);
  std::uniform_real_distribution<double> wd(0.1, 1.0);
  std::vector<NodePtr> conf;
  std::vector<double> weights;
  double wsum = 0.0;
  for (int i = 0; i < 8; ++i) {
    conf.push_back(constant(sd(rng)));
    weights.push_back(wd(rng));
    wsum += weights.back();
  }
  auto loss = weighted_cross_entropy(conf, weights);
  backward(loss);
  for (int i = 0; i < 8; ++i) {
    double closed = (weights[i] / wsum) * (-1.0 / conf[i]->scalar());
    CHECK(std::abs(conf[i]->grad(0, 0) - closed) < 1e-10);
  }
  double err = oracles::fd_max_rel_error(conf, [&] {
    return weighted_cross_entropy(conf, weights);
  });
  CHECK(err < 1e-4);
}

TEST_CASE("contrastive pair cases") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b = a;
  auto pa = constant_vec(a), pb = constant_vec(b);
  CHECK(contrastive_pair(pa, pb, true, 1.2)->scalar() == 0.0);

  Vector far(3);
  far << 10, 2, 3;
  CHECK(contrastive_pair(pa, constant_vec(far), false, 1.2)->scalar() == 0.0);

  CHECK(contrastive_pair(pa, pb, false, 1.2)->scalar() == doctest::Approx(1.44));
}

TEST_CASE("contrastive pair gradient vs finite differences") {
  std::mt19937_64 rng(8);
  auto a = constant(oracles::random_matrix(4, 1, rng));
  auto b = constant(oracles::random_matrix(4, 1, rng));
  CHECK(oracles::fd_max_rel_error({a, b}, [&] {
          return contrastive_pair(a, b, true, 1.2);
        }) < 1e-4);
  CHECK(oracles::fd_max_rel_error({a, b}, [&] {
          return contrastive_pair(a, b, false, 5.0);
        }) < 1e-4);
}

TEST_CASE("batch contrastive combinatorics") {
  std::mt19937_64 rng(4);
  std::vector<NodePtr> embs;
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    embs.push_back(constant(oracles::random_matrix(3, 1, rng)));
    labels.push_back(i / 2);  // 3 persons x 2 sets
  }
  // 15 pairs: 3 positive, 12 negative
  int pos = 0, neg = 0;
  for (int j = 0; j < 6; ++j) {
    for (int k = j + 1; k < 6; ++k) {
      (labels[j] == labels[k] ? pos : neg)++;
    }
  }
  CHECK(pos == 3);
  CHECK(neg == 12);
  CHECK_NOTHROW(batch_contrastive(embs, labels, 1.2));
  CHECK_THROWS_AS(batch_contrastive({embs[0]}, {0}, 1.2), DimensionError);
}

TEST_CASE("identical embeddings with distinct labels give alpha squared") {
  Vector v(3);
  v << 0.5, -0.25, 1.0;
  std::vector<NodePtr> embs;
  std::vector<int> labels;
  for (int i = 0; i < 4; ++i) {
    embs.push_back(constant_vec(v));
    labels.push_back(i);
  }
  auto loss = batch_contrastive(embs, labels, 1.2);
  CHECK(loss->scalar() == doctest::Approx(1.44).epsilon(1e-12));
}

TEST_CASE("batch contrastive is permutation invariant") {
  std::mt19937_64 rng(14);
  std::vector<NodePtr> embs;
  std::vector<int> labels = {0, 0, 1, 1, 2, 2};
  for (int i = 0; i < 6; ++i) embs.push_back(constant(oracles::random_matrix(3, 1, rng)));
  double base = batch_contrastive(embs, labels, 1.2)->scalar();
  std::vector<int> perm = {3, 1, 5, 0, 2, 4};
  std::vector<NodePtr> pe;
  std::vector<int> pl;
  for (int i : perm) {
    pe.push_back(embs[i]);
    pl.push_back(labels[i]);
  }
  CHECK(std::abs(batch_contrastive(pe, pl, 1.2)->scalar() - base) < 1e-12);
}

TEST_CASE("losses are non-negative") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = constant(oracles::random_matrix(3, 1, rng));
    auto b = constant(oracles::random_matrix(3, 1, rng));
    CHECK(contrastive_pair(a, b, trial % 2 == 0, 1.2)->scalar() >= 0.0);
    std::uniform_real_distribution<double> sd(0.01, 0.99);
    auto s = constant(sd(rng));
    CHECK(weighted_cross_entropy({s}, {1.0})->scalar() >= 0.0);
  }
}

TEST_CASE("joint loss weighting") {
  auto w = constant(0.7), c = constant(0.5);
  CHECK(joint_loss(w, c, 1.0, 1.0)->scalar() == doctest::Approx(1.2));
  CHECK(joint_loss(w, c, 1.0, 0.0)->scalar() == doctest::Approx(0.7));
  CHECK(joint_loss(w, c, 0.0, 1.0)->scalar() == doctest::Approx(0.5));
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  cfg.margin = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = LossConfig{};
  cfg.cl_weight = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
}
