#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iebsm {

using ClassIndex = std::size_t;

// Error families. The CLI maps them to exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class FeatureKind { Numeric, Categorical, Binary };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& text);

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;

  bool operator==(const FeatureDescriptor&) const = default;
};

// Column layout and class catalogue of a stream. The order of class_labels is
// the global tie-break order: every argmax tie resolves to the lowest index.
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<FeatureDescriptor> features, std::vector<std::string> class_labels,
         std::string target_name = "target");

  std::size_t n_features() const noexcept { return features_.size(); }
  std::size_t n_classes() const noexcept { return class_labels_.size(); }
  const std::vector<FeatureDescriptor>& features() const noexcept { return features_; }
  const std::vector<std::string>& class_labels() const noexcept { return class_labels_; }
  const std::string& target_name() const noexcept { return target_name_; }

  std::optional<ClassIndex> class_index(const std::string& label) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<FeatureDescriptor> features_;
  std::vector<std::string> class_labels_;
  std::string target_name_ = "target";
};

struct Instance {
  std::vector<double> x;
  ClassIndex y = 0;
  std::uint64_t seq = 0;
};

struct Prediction {
  ClassIndex label = 0;
  std::vector<double> scores;  // empty when the model does not produce scores

  bool has_scores() const noexcept { return !scores.empty(); }
};

// Index of the largest element; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Normalizes non-negative weights into a Prediction; all-zero weights become
// uniform scores with label 0.
Prediction prediction_from_weights(std::vector<double> weights);

// Softmax over log-scores (max-shifted).
Prediction prediction_from_log_scores(std::span<const double> log_scores);

Prediction uniform_prediction(std::size_t n_classes);

// Shared base for every model. predict() is const: test-then-train requires
// that querying a model never changes what it learns afterwards.
class Classifier {
 public:
  explicit Classifier(const Schema& schema)
      : n_features_(schema.n_features()), n_classes_(schema.n_classes()) {}
  virtual ~Classifier() = default;

  virtual Prediction predict(std::span<const double> x) const = 0;
  virtual std::string name() const = 0;

  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_classes() const noexcept { return n_classes_; }

 protected:
  void check_dimension(std::span<const double> x) const;
  void check_instance(const Instance& inst) const;

 private:
  std::size_t n_features_;
  std::size_t n_classes_;
};

class OnlineClassifier : public Classifier {
 public:
  using Classifier::Classifier;
  virtual void learn_one(const Instance& inst) = 0;
  virtual std::unique_ptr<OnlineClassifier> clone() const = 0;
};

class BatchClassifier : public Classifier {
 public:
  using Classifier::Classifier;
  // Replaces any previous state. Throws TrainingError on an empty batch.
  virtual void fit(std::span<const Instance> batch) = 0;
  virtual std::unique_ptr<BatchClassifier> clone() const = 0;
};

}  // namespace iebsm
