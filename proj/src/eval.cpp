#include "ide/eval.hpp"

#include <algorithm>
#include <numeric>

namespace ide {

double cosine_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("cosine_distance: size mismatch");
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ContractError("cosine_distance: zero vector");
  }
  return 1.0 - a.dot(b) / (na * nb);
}

Vector embed_test_set(const SetSample& set, const Model& model) {
  if (set.items.empty()) throw DimensionError("embed_test_set: empty set");
  Vector acc = Vector::Zero(model.config().embed_dim);
  for (const auto& item : set.items) acc += model.embed_value(item);
  return acc / static_cast<double>(set.items.size());
}

EvalReport evaluate_embeddings(const std::vector<Vector>& query_embs,
                               const std::vector<int>& query_labels,
                               const std::vector<Vector>& gallery_embs,
                               const std::vector<int>& gallery_labels) {
  if (query_embs.empty() || gallery_embs.empty()) {
    throw DimensionError("evaluate: empty query or gallery");
  }
  if (query_embs.size() != query_labels.size() ||
      gallery_embs.size() != gallery_labels.size()) {
    throw DimensionError("evaluate: label count mismatch");
  }
  for (int ql : query_labels) {
    if (std::find(gallery_labels.begin(), gallery_labels.end(), ql) ==
        gallery_labels.end()) {
      throw ContractError("evaluate: query identity absent from gallery");
    }
  }

  std::size_t ng = gallery_embs.size();
  EvalReport report;
  report.num_queries = static_cast<int>(query_embs.size());
  report.num_gallery = static_cast<int>(ng);
  report.cmc.assign(ng, 0.0);

  for (std::size_t q = 0; q < query_embs.size(); ++q) {
    std::vector<double> dist(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      dist[g] = cosine_distance(query_embs[q], gallery_embs[g]);
    }
    std::vector<std::size_t> order(ng);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    std::size_t first_correct = ng;
    int correct_total = 0;
    for (std::size_t g = 0; g < ng; ++g) {
      if (gallery_labels[g] == query_labels[q]) ++correct_total;
    }
    double ap = 0.0;
    int correct_seen = 0;
    for (std::size_t rank = 0; rank < ng; ++rank) {
      if (gallery_labels[order[rank]] == query_labels[q]) {
        if (first_correct == ng) first_correct = rank;
        ++correct_seen;
        ap += static_cast<double>(correct_seen) / static_cast<double>(rank + 1);
      }
    }
    ap /= static_cast<double>(correct_total);
    report.per_query_ap.push_back(ap);
    for (std::size_t r = first_correct; r < ng; ++r) report.cmc[r] += 1.0;
  }

  double nq = static_cast<double>(report.num_queries);
  for (double& c : report.cmc) c /= nq;
  report.map = std::accumulate(report.per_query_ap.begin(),
                               report.per_query_ap.end(), 0.0) /
               nq;
  return report;
}

EvalReport evaluate(const std::vector<SetSample>& queries,
                    const std::vector<SetSample>& gallery, const Model& model) {
  std::vector<Vector> qe, ge;
  std::vector<int> ql, gl;
  for (const auto& s : queries) {
    qe.push_back(embed_test_set(s, model));
    ql.push_back(s.set_label);
  }
  for (const auto& s : gallery) {
    ge.push_back(embed_test_set(s, model));
    gl.push_back(s.set_label);
  }
  return evaluate_embeddings(qe, ql, ge, gl);
}

void split_query_gallery(const std::vector<SetSample>& sets,
                         std::vector<SetSample>& queries,
                         std::vector<SetSample>& gallery) {
  queries.clear();
  gallery.clear();
  for (const auto& s : sets) {
    (s.camera_id == 0 ? queries : gallery).push_back(s);
  }
}

}  // namespace ide
