#include "iebsm/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace iebsm {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Numeric:
      return "numeric";
    case FeatureKind::Categorical:
      return "categorical";
    case FeatureKind::Binary:
      return "binary";
  }
  return "numeric";
}

FeatureKind feature_kind_from_string(const std::string& text) {
  if (text == "numeric") return FeatureKind::Numeric;
  if (text == "categorical") return FeatureKind::Categorical;
  if (text == "binary") return FeatureKind::Binary;
  throw SchemaError("unknown feature kind '" + text + "'");
}

Schema::Schema(std::vector<FeatureDescriptor> features, std::vector<std::string> class_labels,
               std::string target_name)
    : features_(std::move(features)),
      class_labels_(std::move(class_labels)),
      target_name_(std::move(target_name)) {
  std::unordered_set<std::string> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f.name).second) throw SchemaError("duplicate feature name '" + f.name + "'");
  }
  if (class_labels_.empty()) throw SchemaError("schema needs at least one class label");
  seen.clear();
  for (const auto& c : class_labels_) {
    if (c.empty()) throw SchemaError("empty class label");
    if (!seen.insert(c).second) throw SchemaError("duplicate class label '" + c + "'");
  }
}

std::optional<ClassIndex> Schema::class_index(const std::string& label) const {
  auto it = std::find(class_labels_.begin(), class_labels_.end(), label);
  if (it == class_labels_.end()) return std::nullopt;
  return static_cast<ClassIndex>(it - class_labels_.begin());
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Prediction uniform_prediction(std::size_t n_classes) {
  Prediction p;
  p.label = 0;
  p.scores.assign(n_classes, 1.0 / static_cast<double>(std::max<std::size_t>(n_classes, 1)));
  return p;
}

Prediction prediction_from_weights(std::vector<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) return uniform_prediction(weights.size());
  for (auto& w : weights) w /= total;
  Prediction p;
  p.label = argmax(weights);
  p.scores = std::move(weights);
  return p;
}

Prediction prediction_from_log_scores(std::span<const double> log_scores) {
  if (log_scores.empty()) return {};
  const double top = *std::max_element(log_scores.begin(), log_scores.end());
  if (!std::isfinite(top)) return uniform_prediction(log_scores.size());
  std::vector<double> w(log_scores.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_scores[i] - top);
  return prediction_from_weights(std::move(w));
}

void Classifier::check_dimension(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw SchemaError("feature vector has " + std::to_string(x.size()) + " values, schema expects " +
                      std::to_string(n_features_));
  }
}

void Classifier::check_instance(const Instance& inst) const {
  check_dimension(inst.x);
  if (inst.y >= n_classes_) {
    throw SchemaError("class index " + std::to_string(inst.y) + " outside catalogue of " +
                      std::to_string(n_classes_));
  }
}

}  // namespace iebsm
