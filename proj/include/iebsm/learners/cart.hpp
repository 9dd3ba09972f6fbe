#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "iebsm/core.hpp"

namespace iebsm::learners {

struct TreeOptions {
  // Features examined per split; 0 examines all. Constant features do not
  // count toward the budget.
  std::size_t max_features = 0;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 42;
};

// CART classifier: Gini impurity, unlimited depth, midpoint thresholds, first
// best split wins ties.
class DecisionTree final : public BatchClassifier {
 public:
  DecisionTree(const Schema& schema, TreeOptions options = {});

  Prediction predict(std::span<const double> x) const override;
  void fit(std::span<const Instance> batch) override;
  std::unique_ptr<BatchClassifier> clone() const override;
  std::string name() const override { return "DT"; }

  // Grows the tree on batch[indices[i]] (duplicates allowed, as in a bootstrap).
  void fit_indices(std::span<const Instance> batch, std::vector<std::size_t> indices, std::mt19937_64& rng);

  ClassIndex predict_label(std::span<const double> x) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t depth() const;

 private:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t label = 0;
    std::uint32_t counts_offset = 0;  // leaf class counts in leaf_counts_
  };

  std::size_t leaf_of(std::span<const double> x) const;

  TreeOptions options_;
  std::vector<Node> nodes_;
  std::vector<double> leaf_counts_;
};

}  // namespace iebsm::learners
