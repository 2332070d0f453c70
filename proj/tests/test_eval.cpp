#include <doctest.h>

#include "ide/eval.hpp"
#include "ide/attention.hpp"
#include "oracles.hpp"

using namespace ide;

TEST_CASE("cosine distance basics") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << -2, 1, 0;  // orthogonal to a
  CHECK(cosine_distance(a, a) == doctest::Approx(0.0));
  CHECK(cosine_distance(a, b) == doctest::Approx(1.0));
  CHECK(cosine_distance(a, Vector(3 * a)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cosine_distance(a, Vector(Vector::Zero(3))), ContractError);
}

namespace {

Model make_model(int input_dim = 6, int embed_dim = 4) {
  EmbedderConfig cfg;
  cfg.input_dim = input_dim;
  cfg.hidden_dims = {8};
  cfg.embed_dim = embed_dim;
  cfg.num_identities = 3;
  return Model(cfg, 5);
}

}  // namespace

TEST_CASE("embed_test_set is average fusion") {
  Model model = make_model();
  SetSample set;
  set.set_label = 0;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 4; ++i) set.items.push_back(oracles::random_matrix(6, 1, rng).col(0));

  // n=1 gives the single embedding
  SetSample single;
  single.items = {set.items[0]};
  CHECK((embed_test_set(single, model) - model.embed_value(set.items[0])).norm() == 0.0);

  // duplicated items same as one
  SetSample dup;
  dup.items = {set.items[0], set.items[0], set.items[0]};
  CHECK((embed_test_set(dup, model) - model.embed_value(set.items[0])).norm() < 1e-14);

  // consistency with fuse_set under uniform weights
  std::vector<NodePtr> embs;
  for (const auto& item : set.items) embs.push_back(model.embed(item));
  Vector fused = fuse_set(embs, std::vector<double>(4, 1.0))->value.col(0);
  CHECK((embed_test_set(set, model) - fused).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(embed_test_set(SetSample{}, model), DimensionError);
}

TEST_CASE("evaluate trivial cases") {
  // each query's identity uniquely nearest
  std::vector<Vector> qe, ge;
  std::vector<int> ql, gl;
  for (int i = 0; i < 3; ++i) {
    Vector v = Vector::Zero(4);
    v(i) = 1.0;
    qe.push_back(v);
    ql.push_back(i);
    ge.push_back(1.1 * v);
    gl.push_back(i);
  }
  EvalReport r = evaluate_embeddings(qe, ql, ge, gl);
  CHECK(r.cmc[0] == doctest::Approx(1.0));
  CHECK(r.map == doctest::Approx(1.0));

  // adversarial: correct match always at rank 2
  Vector q(2);
  q << 1, 0;
  std::vector<Vector> gal;
  std::vector<int> gal_labels;
  gal.push_back(q);             // wrong id, distance 0
  gal_labels.push_back(99);
  Vector off(2);
  off << 1, 0.5;
  gal.push_back(off);           // correct id, larger distance
  gal_labels.push_back(1);
  EvalReport r2 = evaluate_embeddings({q}, {1}, gal, gal_labels);
  CHECK(r2.cmc[0] == doctest::Approx(0.0));
  CHECK(r2.cmc[1] == doctest::Approx(1.0));
}

TEST_CASE("evaluate matches brute force oracle on random instances") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> nq_dist(2, 8), ng_dist(5, 20), label_dist(0, 4);
  for (int inst = 0; inst < 10; ++inst) {
    int nq = nq_dist(rng), ng = ng_dist(rng);
    std::vector<Vector> qe, ge;
    std::vector<int> ql, gl;
    for (int g = 0; g < ng; ++g) {
      ge.push_back(oracles::random_matrix(5, 1, rng, -1, 1).col(0));
      gl.push_back(label_dist(rng));
    }
    for (int q = 0; q < nq; ++q) {
      qe.push_back(oracles::random_matrix(5, 1, rng, -1, 1).col(0));
      ql.push_back(gl[static_cast<std::size_t>(q) % gl.size()]);
    }
    EvalReport r = evaluate_embeddings(qe, ql, ge, gl);
    auto oracle = oracles::brute_force_ranking(qe, ql, ge, gl);
    CHECK(std::abs(r.map - oracle.map) < 1e-12);
    for (std::size_t k = 0; k < r.cmc.size(); ++k) {
      CHECK(std::abs(r.cmc[k] - oracle.cmc[k]) < 1e-12);
      if (k > 0) CHECK(r.cmc[k] >= r.cmc[k - 1]);
    }
  }
}

TEST_CASE("retrieval is invariant to positive rescaling of embeddings") {
  std::mt19937_64 rng(8);
  std::vector<Vector> qe, ge;
  std::vector<int> ql, gl;
  for (int g = 0; g < 12; ++g) {
    ge.push_back(oracles::random_matrix(4, 1, rng).col(0));
    gl.push_back(g % 3);
  }
  for (int q = 0; q < 5; ++q) {
    qe.push_back(oracles::random_matrix(4, 1, rng).col(0));
    ql.push_back(q % 3);
  }
  EvalReport base = evaluate_embeddings(qe, ql, ge, gl);
  std::vector<Vector> qs, gs;
  for (auto& v : qe) qs.push_back(7.3 * v);
  for (auto& v : ge) gs.push_back(7.3 * v);
  EvalReport scaled = evaluate_embeddings(qs, ql, gs, gl);
  CHECK(base.map == doctest::Approx(scaled.map).epsilon(1e-12));
  for (std::size_t k = 0; k < base.cmc.size(); ++k) {
    CHECK(base.cmc[k] == doctest::Approx(scaled.cmc[k]).epsilon(1e-12));
  }
}

TEST_CASE("evaluate rejects queries missing from the gallery") {
  Vector v = Vector::Ones(3);
  CHECK_THROWS_AS(evaluate_embeddings({v}, {5}, {v}, {1}), ContractError);
}

TEST_CASE("query gallery split by camera") {
  std::vector<SetSample> sets(4);
  sets[0].camera_id = 0;
  sets[1].camera_id = 1;
  sets[2].camera_id = 0;
  sets[3].camera_id = 1;
  std::vector<SetSample> q, g;
  split_query_gallery(sets, q, g);
  CHECK(q.size() == 2);
  CHECK(g.size() == 2);
}
