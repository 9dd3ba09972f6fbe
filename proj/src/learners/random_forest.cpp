#include "iebsm/learners/random_forest.hpp"

#include <cmath>
#include <random>

namespace iebsm::learners {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomForest::RandomForest(const Schema& schema, ForestOptions options)
    : BatchClassifier(schema), schema_(schema), options_(options) {
  if (options_.n_trees == 0) throw ConfigError("random forest needs at least one tree");
}

void RandomForest::prepare(std::span<const Instance> batch) {
  if (batch.empty()) throw TrainingError("cannot fit a random forest on an empty batch");
  for (const auto& inst : batch) check_instance(inst);
  const std::size_t d = n_features();
  TreeOptions tree_options;
  tree_options.max_features = options_.max_features != 0
                                  ? options_.max_features
                                  : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
  tree_seeds_.resize(options_.n_trees);
  trees_.clear();
  trees_.reserve(options_.n_trees);
  for (std::size_t t = 0; t < options_.n_trees; ++t) {
    tree_seeds_[t] = splitmix64(options_.seed ^ splitmix64(t));
    tree_options.seed = tree_seeds_[t];
    trees_.emplace_back(schema_, tree_options);
  }
}

void RandomForest::grow(std::size_t t, std::span<const Instance> batch) {
  std::mt19937_64 rng(tree_seeds_[t]);
  std::vector<std::size_t> indices(batch.size());
  if (options_.bootstrap) {
    std::uniform_int_distribution<std::size_t> pick(0, batch.size() - 1);
    for (auto& i : indices) i = pick(rng);
  } else {
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  }
  trees_[t].fit_indices(batch, std::move(indices), rng);
}

void RandomForest::fit(std::span<const Instance> batch) {
  prepare(batch);
  const auto n_trees = static_cast<long long>(trees_.size());
#pragma omp parallel for schedule(dynamic)
  for (long long t = 0; t < n_trees; ++t) grow(static_cast<std::size_t>(t), batch);
}

void RandomForest::fit_serial(std::span<const Instance> batch) {
  prepare(batch);
  for (std::size_t t = 0; t < trees_.size(); ++t) grow(t, batch);
}

ClassIndex RandomForest::vote(std::span<const double> x) const {
  std::vector<double> votes(n_classes(), 0.0);
  for (const auto& tree : trees_) votes[tree.predict_label(x)] += 1.0;
  return argmax(votes);
}

Prediction RandomForest::predict(std::span<const double> x) const {
  check_dimension(x);
  if (trees_.empty()) return uniform_prediction(n_classes());
  std::vector<double> votes(n_classes(), 0.0);
  for (const auto& tree : trees_) votes[tree.predict_label(x)] += 1.0;
  return prediction_from_weights(std::move(votes));
}

std::vector<ClassIndex> RandomForest::predict_labels(std::span<const Instance> batch) const {
  std::vector<ClassIndex> out(batch.size(), 0);
  if (trees_.empty()) return out;
  const auto n = static_cast<long long>(batch.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = vote(batch[static_cast<std::size_t>(i)].x);
  return out;
}

std::vector<ClassIndex> RandomForest::predict_labels_serial(std::span<const Instance> batch) const {
  std::vector<ClassIndex> out(batch.size(), 0);
  if (trees_.empty()) return out;
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = vote(batch[i].x);
  return out;
}

std::unique_ptr<BatchClassifier> RandomForest::clone() const { return std::make_unique<RandomForest>(*this); }

}  // namespace iebsm::learners
