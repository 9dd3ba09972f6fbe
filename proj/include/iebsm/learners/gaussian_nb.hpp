#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iebsm/core.hpp"

namespace iebsm::learners {

// Welford accumulator.
struct RunningMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  // Unbiased; 0 below two observations.
  double variance() const { return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

// Class counts plus per-(class, feature) and per-feature Gaussian moments.
// Shared by both naive Bayes learners and the Hoeffding tree leaves.
class GaussianStats {
 public:
  GaussianStats() = default;
  GaussianStats(std::size_t n_classes, std::size_t n_features);

  void add(std::span<const double> x, ClassIndex y);
  // Two-pass recomputation over a whole batch; replaces the current state.
  void assign(std::span<const Instance> batch);

  std::size_t n_classes() const noexcept { return class_counts_.size(); }
  std::size_t n_features() const noexcept { return global_.size(); }
  std::int64_t total() const noexcept { return total_; }
  std::int64_t class_count(ClassIndex c) const { return class_counts_[c]; }
  const std::vector<std::int64_t>& class_counts() const noexcept { return class_counts_; }
  const RunningMoments& moments(ClassIndex c, std::size_t f) const { return per_class_[c * n_features() + f]; }
  const RunningMoments& global(std::size_t f) const { return global_[f]; }

  // sigma^2 floored at 1e-9 * (global feature variance + 1e-12).
  double floored_variance(ClassIndex c, std::size_t f) const;
  // log p(c) + sum_f log N(x_f | c); -inf for classes never observed.
  std::vector<double> joint_log_likelihood(std::span<const double> x) const;
  // Uniform scores with label 0 while empty.
  Prediction predict(std::span<const double> x) const;

 private:
  std::vector<std::int64_t> class_counts_;
  std::vector<RunningMoments> per_class_;
  std::vector<RunningMoments> global_;
  std::int64_t total_ = 0;
};

class OnlineGaussianNB final : public OnlineClassifier {
 public:
  explicit OnlineGaussianNB(const Schema& schema);

  Prediction predict(std::span<const double> x) const override;
  void learn_one(const Instance& inst) override;
  std::unique_ptr<OnlineClassifier> clone() const override;
  std::string name() const override { return "GNB"; }

  const GaussianStats& stats() const noexcept { return stats_; }

 private:
  GaussianStats stats_;
};

class BatchGaussianNB final : public BatchClassifier {
 public:
  explicit BatchGaussianNB(const Schema& schema);

  Prediction predict(std::span<const double> x) const override;
  void fit(std::span<const Instance> batch) override;
  std::unique_ptr<BatchClassifier> clone() const override;
  std::string name() const override { return "NB"; }

  const GaussianStats& stats() const noexcept { return stats_; }

 private:
  GaussianStats stats_;
};

}  // namespace iebsm::learners
