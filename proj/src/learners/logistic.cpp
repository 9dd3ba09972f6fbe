#include "iebsm/learners/logistic.hpp"

#include <algorithm>
#include <cmath>

namespace iebsm::learners {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> LinearParams::logits(std::span<const double> x) const {
  std::vector<double> z(intercepts);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double* row = weights.data() + c * n_features;
    for (std::size_t f = 0; f < n_features; ++f) z[c] += row[f] * x[f];
  }
  return z;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (auto& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

double softmax_loss(const LinearParams& params, std::span<const double> x, ClassIndex y, double l2,
                    double l1) {
  const auto z = params.logits(x);
  const double top = *std::max_element(z.begin(), z.end());
  double lse = 0.0;
  for (double v : z) lse += std::exp(v - top);
  double loss = top + std::log(lse) - z[y];
  for (double w : params.weights) loss += 0.5 * l2 * w * w + l1 * std::abs(w);
  return loss;
}

LinearGradient softmax_gradient(const LinearParams& params, std::span<const double> x, ClassIndex y,
                                double l2, double l1, double clip) {
  const std::size_t k = params.n_classes;
  const std::size_t d = params.n_features;
  auto p = softmax(params.logits(x));
  LinearGradient g{std::vector<double>(k * d), std::vector<double>(k)};
  for (std::size_t c = 0; c < k; ++c) {
    const double residual = p[c] - (c == y ? 1.0 : 0.0);
    g.intercepts[c] = std::clamp(residual, -clip, clip);
    for (std::size_t f = 0; f < d; ++f) {
      const double w = params.w(c, f);
      g.weights[c * d + f] = std::clamp(residual * x[f], -clip, clip) + l2 * w + l1 * sign(w);
    }
  }
  return g;
}

void StandardScaler::learn(std::span<const double> x) {
  for (std::size_t f = 0; f < moments_.size(); ++f) moments_[f].add(x[f]);
}

std::vector<double> StandardScaler::transform(std::span<const double> x) const {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t f = 0; f < moments_.size(); ++f) {
    const auto& m = moments_[f];
    if (m.count == 0) continue;
    const double var = m.m2 / static_cast<double>(m.count);
    if (var > 0.0) out[f] = (x[f] - m.mean) / std::sqrt(var);
  }
  return out;
}

OnlineLogisticRegression::OnlineLogisticRegression(const Schema& schema, OLRConfig config)
    : OnlineClassifier(schema),
      config_(config),
      scaler_(schema.n_features()),
      params_(schema.n_classes(), schema.n_features()) {}

Prediction OnlineLogisticRegression::predict(std::span<const double> x) const {
  check_dimension(x);
  if (n_seen_ == 0) return uniform_prediction(n_classes());
  const auto xs = scaler_.transform(x);
  const auto z = params_.logits(xs);
  if (!config_.one_vs_rest) return prediction_from_weights(softmax(z));
  std::vector<double> w(z.size());
  for (std::size_t c = 0; c < z.size(); ++c) w[c] = sigmoid(z[c]);
  return prediction_from_weights(std::move(w));
}

void OnlineLogisticRegression::learn_one(const Instance& inst) {
  check_instance(inst);
  scaler_.learn(inst.x);
  const auto xs = scaler_.transform(inst.x);
  ++n_seen_;
  const std::size_t k = params_.n_classes;
  const std::size_t d = params_.n_features;
  if (config_.one_vs_rest) {
    const auto z = params_.logits(xs);
    for (std::size_t c = 0; c < k; ++c) {
      const double residual =
          std::clamp(sigmoid(z[c]) - (c == inst.y ? 1.0 : 0.0), -config_.gradient_clip, config_.gradient_clip);
      for (std::size_t f = 0; f < d; ++f) {
        double& w = params_.w(c, f);
        w -= config_.learning_rate * (residual * xs[f] + config_.l2 * w + config_.l1 * sign(w));
      }
      params_.intercepts[c] -= config_.intercept_lr * residual;
    }
    return;
  }
  const auto g = softmax_gradient(params_, xs, inst.y, config_.l2, config_.l1, config_.gradient_clip);
  for (std::size_t i = 0; i < params_.weights.size(); ++i) {
    params_.weights[i] -= config_.learning_rate * g.weights[i];
  }
  for (std::size_t c = 0; c < k; ++c) params_.intercepts[c] -= config_.intercept_lr * g.intercepts[c];
}

std::unique_ptr<OnlineClassifier> OnlineLogisticRegression::clone() const {
  return std::make_unique<OnlineLogisticRegression>(*this);
}

BatchLogisticRegression::BatchLogisticRegression(const Schema& schema, BatchLRConfig config)
    : BatchClassifier(schema), config_(config) {}

std::vector<double> BatchLogisticRegression::standardize(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) out[f] = (x[f] - mean_[f]) / scale_[f];
  return out;
}

Prediction BatchLogisticRegression::predict(std::span<const double> x) const {
  check_dimension(x);
  if (!fitted_) return uniform_prediction(n_classes());
  return prediction_from_weights(softmax(params_.logits(standardize(x))));
}

void BatchLogisticRegression::fit(std::span<const Instance> batch) {
  if (batch.empty()) throw TrainingError("cannot fit logistic regression on an empty batch");
  for (const auto& inst : batch) check_instance(inst);
  const std::size_t n = batch.size();
  const std::size_t d = n_features();
  const std::size_t k = n_classes();
  const double nd = static_cast<double>(n);

  mean_.assign(d, 0.0);
  scale_.assign(d, 0.0);
  for (const auto& inst : batch) {
    for (std::size_t f = 0; f < d; ++f) mean_[f] += inst.x[f];
  }
  for (auto& m : mean_) m /= nd;
  for (const auto& inst : batch) {
    for (std::size_t f = 0; f < d; ++f) scale_[f] += (inst.x[f] - mean_[f]) * (inst.x[f] - mean_[f]);
  }
  for (auto& s : scale_) {
    s = std::sqrt(s / nd);
    if (!(s > 0.0)) s = 1.0;
  }
  std::vector<std::vector<double>> xs;
  xs.reserve(n);
  for (const auto& inst : batch) xs.push_back(standardize(inst.x));

  // lambda_max of the augmented second-moment matrix [x 1]^T [x 1] / n
  std::vector<double> v(d + 1, 1.0 / std::sqrt(static_cast<double>(d + 1)));
  double lambda = 1.0;
  for (int it = 0; it < 50; ++it) {
    std::vector<double> next(d + 1, 0.0);
    for (const auto& row : xs) {
      double dot = v[d];
      for (std::size_t f = 0; f < d; ++f) dot += row[f] * v[f];
      for (std::size_t f = 0; f < d; ++f) next[f] += dot * row[f];
      next[d] += dot;
    }
    double norm = 0.0;
    for (auto& e : next) {
      e /= nd;
      norm += e * e;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    lambda = norm;
    for (std::size_t i = 0; i <= d; ++i) v[i] = next[i] / norm;
  }
  const double penalty = 1.0 / (config_.inverse_regularization * nd);
  const double step = 1.0 / (0.5 * lambda + penalty);

  params_ = LinearParams(k, d);
  iterations_run_ = 0;
  for (std::size_t it = 0; it < config_.max_iterations; ++it) {
    std::vector<double> gw(k * d, 0.0);
    std::vector<double> gb(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = softmax(params_.logits(xs[i]));
      for (std::size_t c = 0; c < k; ++c) {
        const double residual = (p[c] - (c == batch[i].y ? 1.0 : 0.0)) / nd;
        gb[c] += residual;
        for (std::size_t f = 0; f < d; ++f) gw[c * d + f] += residual * xs[i][f];
      }
    }
    double norm2 = 0.0;
    for (std::size_t j = 0; j < gw.size(); ++j) {
      gw[j] += penalty * params_.weights[j];
      norm2 += gw[j] * gw[j];
    }
    for (double g : gb) norm2 += g * g;
    iterations_run_ = it + 1;
    if (std::sqrt(norm2) < config_.tolerance) break;
    for (std::size_t j = 0; j < gw.size(); ++j) params_.weights[j] -= step * gw[j];
    for (std::size_t c = 0; c < k; ++c) params_.intercepts[c] -= step * gb[c];
  }
  fitted_ = true;
}

std::unique_ptr<BatchClassifier> BatchLogisticRegression::clone() const {
  return std::make_unique<BatchLogisticRegression>(*this);
}

}  // namespace iebsm::learners
