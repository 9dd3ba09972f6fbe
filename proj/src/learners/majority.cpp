#include "iebsm/learners/majority.hpp"

#include <vector>

namespace iebsm::learners {

ClassIndex majority_class(std::span<const ClassIndex> labels, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (auto y : labels) {
    if (y < n_classes) ++counts[y];
  }
  ClassIndex best = 0;
  for (ClassIndex c = 1; c < n_classes; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

}  // namespace iebsm::learners
