#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ide/model.hpp"
#include "ide/synth.hpp"

namespace ide {

struct EvalReport {
  std::vector<double> cmc;  // cmc[r] = fraction matched within rank r+1
  double map = 0.0;
  std::vector<double> per_query_ap;
  int num_queries = 0;
  int num_gallery = 0;
  std::string fingerprint;
  std::uint64_t seed = 0;
};

// 1 - cos(a, b), in [0, 2]. Zero vectors are degenerate inputs.
double cosine_distance(const Vector& a, const Vector& b);

// Test-phase set embedding: plain average fusion of item embeddings.
Vector embed_test_set(const SetSample& set, const Model& model);

/// Ranks gallery by ascending cosine distance per query, ties broken by
/// gallery index. CMC[r] counts first correct matches at rank <= r+1;
/// AP averages precision over all correct gallery entries.
EvalReport evaluate_embeddings(const std::vector<Vector>& query_embs,
                               const std::vector<int>& query_labels,
                               const std::vector<Vector>& gallery_embs,
                               const std::vector<int>& gallery_labels);

EvalReport evaluate(const std::vector<SetSample>& queries,
                    const std::vector<SetSample>& gallery, const Model& model);

// Cross-camera protocol: camera 0 sets become queries, camera 1 the gallery.
void split_query_gallery(const std::vector<SetSample>& sets,
                         std::vector<SetSample>& queries,
                         std::vector<SetSample>& gallery);

}  // namespace ide
