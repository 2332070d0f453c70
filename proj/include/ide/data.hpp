#pragma once

#include <vector>

#include "ide/autodiff.hpp"

namespace ide {

/// One image set as the trainer sees it: item feature vectors and the set
/// identity. Ground-truth corruption flags live only on the generator side.
struct BatchSet {
  std::vector<Vector> items;
  int label = -1;
};

/// The unit of one optimizer step: m sets arranged persons x sets-per-person.
struct MiniBatch {
  std::vector<BatchSet> sets;

  std::size_t num_sets() const { return sets.size(); }
  std::size_t num_items() const {
    std::size_t n = 0;
    for (const auto& s : sets) n += s.items.size();
    return n;
  }
};

}  // namespace ide
