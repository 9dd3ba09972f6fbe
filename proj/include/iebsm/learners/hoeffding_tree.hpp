#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iebsm/core.hpp"
#include "iebsm/learners/gaussian_nb.hpp"

namespace iebsm::learners {

struct HoeffdingTreeConfig {
  std::size_t grace_period = 100;
  double delta = 0.01;
  std::size_t nb_threshold = 10;
  double tie_threshold = 0.05;
  std::size_t n_split_candidates = 10;
};

// sqrt(R^2 ln(1/delta) / (2n))
double hoeffding_bound(double range, double delta, double n);

struct LeafStats {
  GaussianStats stats;
  std::vector<double> feature_min;
  std::vector<double> feature_max;
  std::size_t seen_since_check = 0;
  // Class counts of the parent at split time; answers queries while empty.
  std::vector<std::int64_t> inherited_counts;

  LeafStats() = default;
  LeafStats(std::size_t n_classes, std::size_t n_features);
  void add(std::span<const double> x, ClassIndex y);
  bool is_pure() const;
};

struct SplitDecision {
  bool split = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double best_gain = 0.0;
  double second_gain = 0.0;  // best gain of any other feature, or 0 (no split)
  double epsilon = 0.0;
};

// Information gain (bits) of splitting the leaf at x_feature <= threshold,
// using the Gaussian class-conditional approximation of the leaf.
double gaussian_split_gain(const LeafStats& leaf, std::size_t feature, double threshold);

// Candidate thresholds: quantiles k/(n+1) of the pooled Gaussian, clipped to
// the observed range.
std::vector<double> split_candidates(const LeafStats& leaf, std::size_t feature, std::size_t n);

SplitDecision ht_attempt_split(const LeafStats& leaf, const HoeffdingTreeConfig& config = {});

Prediction ht_leaf_predict(const LeafStats& leaf, std::span<const double> x, std::size_t nb_threshold = 10);

// Hoeffding tree (VFDT) with Gaussian numeric splits and naive Bayes leaves.
class HoeffdingTree final : public OnlineClassifier {
 public:
  HoeffdingTree(const Schema& schema, HoeffdingTreeConfig config = {});

  Prediction predict(std::span<const double> x) const override;
  void learn_one(const Instance& inst) override;
  std::unique_ptr<OnlineClassifier> clone() const override;
  std::string name() const override { return "HT"; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t depth() const;

 private:
  struct Node {
    std::optional<LeafStats> leaf;  // engaged for leaves
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t route(std::span<const double> x) const;

  HoeffdingTreeConfig config_;
  std::vector<Node> nodes_;
};

}  // namespace iebsm::learners
