#include "iebsm/learners/factory.hpp"

#include "iebsm/learners/cart.hpp"
#include "iebsm/learners/gaussian_nb.hpp"
#include "iebsm/learners/hoeffding_tree.hpp"
#include "iebsm/learners/logistic.hpp"
#include "iebsm/learners/random_forest.hpp"

namespace iebsm::learners {

OnlineKind parse_online_kind(const std::string& name) {
  if (name == "GNB" || name == "ONB" || name == "NB") return OnlineKind::GaussianNB;
  if (name == "HT" || name == "HAT") return OnlineKind::HoeffdingTree;
  if (name == "OLR" || name == "LR") return OnlineKind::LogisticRegression;
  throw ConfigError("unknown online learner '" + name + "'");
}

BatchKind parse_batch_kind(const std::string& name) {
  if (name == "NB" || name == "GNB") return BatchKind::GaussianNB;
  if (name == "LR") return BatchKind::LogisticRegression;
  if (name == "DT" || name == "CART") return BatchKind::DecisionTree;
  if (name == "RF") return BatchKind::RandomForest;
  throw ConfigError("unknown batch learner '" + name + "'");
}

std::string short_name(OnlineKind kind) {
  switch (kind) {
    case OnlineKind::GaussianNB:
      return "ONB";
    case OnlineKind::HoeffdingTree:
      return "HT";
    case OnlineKind::LogisticRegression:
      return "OLR";
  }
  return "?";
}

std::string short_name(BatchKind kind) {
  switch (kind) {
    case BatchKind::GaussianNB:
      return "NB";
    case BatchKind::LogisticRegression:
      return "LR";
    case BatchKind::DecisionTree:
      return "DT";
    case BatchKind::RandomForest:
      return "RF";
  }
  return "?";
}

std::unique_ptr<OnlineClassifier> make_online(OnlineKind kind, const Schema& schema) {
  switch (kind) {
    case OnlineKind::GaussianNB:
      return std::make_unique<OnlineGaussianNB>(schema);
    case OnlineKind::HoeffdingTree:
      return std::make_unique<HoeffdingTree>(schema);
    case OnlineKind::LogisticRegression:
      return std::make_unique<OnlineLogisticRegression>(schema);
  }
  throw InternalError("unhandled online learner kind");
}

std::unique_ptr<BatchClassifier> make_batch(BatchKind kind, const Schema& schema, std::uint64_t seed,
                                            std::size_t n_trees) {
  switch (kind) {
    case BatchKind::GaussianNB:
      return std::make_unique<BatchGaussianNB>(schema);
    case BatchKind::LogisticRegression:
      return std::make_unique<BatchLogisticRegression>(schema);
    case BatchKind::DecisionTree: {
      TreeOptions options;
      options.seed = seed;
      return std::make_unique<DecisionTree>(schema, options);
    }
    case BatchKind::RandomForest: {
      ForestOptions options;
      options.seed = seed;
      options.n_trees = n_trees;
      return std::make_unique<RandomForest>(schema, options);
    }
  }
  throw InternalError("unhandled batch learner kind");
}

}  // namespace iebsm::learners
