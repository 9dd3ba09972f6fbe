#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iebsm/core.hpp"
#include "iebsm/learners/cart.hpp"

namespace iebsm::learners {

struct ForestOptions {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  // 0 selects floor(sqrt(d)).
  std::size_t max_features = 0;
  std::uint64_t seed = 42;
};

// Bagged CART trees combined by majority vote (ties to the lowest class).
// Per-tree seeds are derived up front, so fit() (OpenMP over trees) and
// fit_serial() grow identical forests.
class RandomForest final : public BatchClassifier {
 public:
  RandomForest(const Schema& schema, ForestOptions options = {});

  Prediction predict(std::span<const double> x) const override;
  void fit(std::span<const Instance> batch) override;
  std::unique_ptr<BatchClassifier> clone() const override;
  std::string name() const override { return "RF"; }

  void fit_serial(std::span<const Instance> batch);

  std::vector<ClassIndex> predict_labels(std::span<const Instance> batch) const;
  std::vector<ClassIndex> predict_labels_serial(std::span<const Instance> batch) const;

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const ForestOptions& options() const noexcept { return options_; }

 private:
  void prepare(std::span<const Instance> batch);
  void grow(std::size_t t, std::span<const Instance> batch);
  ClassIndex vote(std::span<const double> x) const;

  Schema schema_;
  ForestOptions options_;
  std::vector<std::uint64_t> tree_seeds_;
  std::vector<DecisionTree> trees_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace iebsm::learners
