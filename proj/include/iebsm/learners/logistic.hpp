#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iebsm/core.hpp"
#include "iebsm/learners/gaussian_nb.hpp"

namespace iebsm::learners {

struct OLRConfig {
  double learning_rate = 0.005;
  double l2 = 1.0;
  double l1 = 0.0;
  double intercept_lr = 0.01;
  double gradient_clip = 1e12;
  bool one_vs_rest = false;
};

// Row-major K x D weights plus K intercepts.
struct LinearParams {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<double> weights;
  std::vector<double> intercepts;

  LinearParams() = default;
  LinearParams(std::size_t k, std::size_t d) : n_classes(k), n_features(d), weights(k * d, 0.0), intercepts(k, 0.0) {}

  double& w(std::size_t c, std::size_t f) { return weights[c * n_features + f]; }
  double w(std::size_t c, std::size_t f) const { return weights[c * n_features + f]; }
  std::vector<double> logits(std::span<const double> x) const;
};

std::vector<double> softmax(std::span<const double> logits);

// Cross-entropy of the softmax plus l2/2 ||W||^2 + l1 |W|_1 (intercepts unpenalized).
double softmax_loss(const LinearParams& params, std::span<const double> x, ClassIndex y, double l2,
                    double l1 = 0.0);

struct LinearGradient {
  std::vector<double> weights;
  std::vector<double> intercepts;
};

// Analytic gradient of softmax_loss. The data term is clipped per coordinate
// at +-clip before the penalty is added.
LinearGradient softmax_gradient(const LinearParams& params, std::span<const double> x, ClassIndex y,
                                double l2, double l1 = 0.0, double clip = 1e12);

// Running mean / population variance; features with zero variance map to 0.
class StandardScaler {
 public:
  explicit StandardScaler(std::size_t n_features = 0) : moments_(n_features) {}

  void learn(std::span<const double> x);
  std::vector<double> transform(std::span<const double> x) const;
  const RunningMoments& moments(std::size_t f) const { return moments_[f]; }

 private:
  std::vector<RunningMoments> moments_;
};

// Scaler followed by SGD logistic regression; the scaler sees x before the
// gradient step.
class OnlineLogisticRegression final : public OnlineClassifier {
 public:
  OnlineLogisticRegression(const Schema& schema, OLRConfig config = {});

  Prediction predict(std::span<const double> x) const override;
  void learn_one(const Instance& inst) override;
  std::unique_ptr<OnlineClassifier> clone() const override;
  std::string name() const override { return "OLR"; }

  const LinearParams& params() const noexcept { return params_; }
  const StandardScaler& scaler() const noexcept { return scaler_; }
  const OLRConfig& config() const noexcept { return config_; }

 private:
  OLRConfig config_;
  StandardScaler scaler_;
  LinearParams params_;
  std::int64_t n_seen_ = 0;
};

struct BatchLRConfig {
  std::size_t max_iterations = 200;
  double tolerance = 1e-6;
  double inverse_regularization = 1.0;  // C
};

// Multinomial LR on a standardized batch, fitted with full-batch gradient
// descent at step 1/L (L from a power-iteration curvature bound).
class BatchLogisticRegression final : public BatchClassifier {
 public:
  BatchLogisticRegression(const Schema& schema, BatchLRConfig config = {});

  Prediction predict(std::span<const double> x) const override;
  void fit(std::span<const Instance> batch) override;
  std::unique_ptr<BatchClassifier> clone() const override;
  std::string name() const override { return "LR"; }

  std::size_t iterations_run() const noexcept { return iterations_run_; }

 private:
  std::vector<double> standardize(std::span<const double> x) const;

  BatchLRConfig config_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  LinearParams params_;
  bool fitted_ = false;
  std::size_t iterations_run_ = 0;
};

}  // namespace iebsm::learners
