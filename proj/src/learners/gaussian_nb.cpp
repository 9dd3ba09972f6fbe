#include "iebsm/learners/gaussian_nb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace iebsm::learners {

GaussianStats::GaussianStats(std::size_t n_classes, std::size_t n_features)
    : class_counts_(n_classes, 0), per_class_(n_classes * n_features), global_(n_features) {}

void GaussianStats::add(std::span<const double> x, ClassIndex y) {
  ++class_counts_[y];
  ++total_;
  const std::size_t d = n_features();
  for (std::size_t f = 0; f < d; ++f) {
    per_class_[y * d + f].add(x[f]);
    global_[f].add(x[f]);
  }
}

void GaussianStats::assign(std::span<const Instance> batch) {
  const std::size_t k = n_classes();
  const std::size_t d = n_features();
  std::fill(class_counts_.begin(), class_counts_.end(), 0);
  per_class_.assign(k * d, RunningMoments{});
  global_.assign(d, RunningMoments{});
  total_ = static_cast<std::int64_t>(batch.size());
  for (const auto& inst : batch) {
    ++class_counts_[inst.y];
    for (std::size_t f = 0; f < d; ++f) {
      per_class_[inst.y * d + f].mean += inst.x[f];
      global_[f].mean += inst.x[f];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < d; ++f) {
      auto& m = per_class_[c * d + f];
      m.count = class_counts_[c];
      if (m.count > 0) m.mean /= static_cast<double>(m.count);
    }
  }
  for (auto& g : global_) {
    g.count = total_;
    if (total_ > 0) g.mean /= static_cast<double>(total_);
  }
  for (const auto& inst : batch) {
    for (std::size_t f = 0; f < d; ++f) {
      auto& m = per_class_[inst.y * d + f];
      m.m2 += (inst.x[f] - m.mean) * (inst.x[f] - m.mean);
      global_[f].m2 += (inst.x[f] - global_[f].mean) * (inst.x[f] - global_[f].mean);
    }
  }
}

double GaussianStats::floored_variance(ClassIndex c, std::size_t f) const {
  const double floor = 1e-9 * (global_[f].variance() + 1e-12);
  return std::max(moments(c, f).variance(), floor);
}

std::vector<double> GaussianStats::joint_log_likelihood(std::span<const double> x) const {
  const std::size_t k = n_classes();
  const std::size_t d = n_features();
  std::vector<double> out(k, -std::numeric_limits<double>::infinity());
  if (total_ == 0) return out;
  for (std::size_t c = 0; c < k; ++c) {
    if (class_counts_[c] == 0) continue;
    double ll = std::log(static_cast<double>(class_counts_[c]) / static_cast<double>(total_));
    for (std::size_t f = 0; f < d; ++f) {
      const double var = floored_variance(c, f);
      const double diff = x[f] - moments(c, f).mean;
      ll -= 0.5 * std::log(2.0 * std::numbers::pi * var) + diff * diff / (2.0 * var);
    }
    out[c] = ll;
  }
  return out;
}

Prediction GaussianStats::predict(std::span<const double> x) const {
  if (total_ == 0) return uniform_prediction(n_classes());
  return prediction_from_log_scores(joint_log_likelihood(x));
}

OnlineGaussianNB::OnlineGaussianNB(const Schema& schema)
    : OnlineClassifier(schema), stats_(schema.n_classes(), schema.n_features()) {}

Prediction OnlineGaussianNB::predict(std::span<const double> x) const {
  check_dimension(x);
  return stats_.predict(x);
}

void OnlineGaussianNB::learn_one(const Instance& inst) {
  check_instance(inst);
  stats_.add(inst.x, inst.y);
}

std::unique_ptr<OnlineClassifier> OnlineGaussianNB::clone() const {
  return std::make_unique<OnlineGaussianNB>(*this);
}

BatchGaussianNB::BatchGaussianNB(const Schema& schema)
    : BatchClassifier(schema), stats_(schema.n_classes(), schema.n_features()) {}

Prediction BatchGaussianNB::predict(std::span<const double> x) const {
  check_dimension(x);
  return stats_.predict(x);
}

void BatchGaussianNB::fit(std::span<const Instance> batch) {
  if (batch.empty()) throw TrainingError("cannot fit naive Bayes on an empty batch");
  for (const auto& inst : batch) check_instance(inst);
  stats_.assign(batch);
}

std::unique_ptr<BatchClassifier> BatchGaussianNB::clone() const {
  return std::make_unique<BatchGaussianNB>(*this);
}

}  // namespace iebsm::learners
