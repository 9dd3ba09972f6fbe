#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "iebsm/core.hpp"

namespace iebsm::learners {

enum class OnlineKind { GaussianNB, HoeffdingTree, LogisticRegression };
enum class BatchKind { GaussianNB, LogisticRegression, DecisionTree, RandomForest };

// Accepts the short names used in experiment configs: GNB/ONB/NB, HT/HAT, OLR/LR.
OnlineKind parse_online_kind(const std::string& name);
// NB/GNB, LR, DT/CART, RF.
BatchKind parse_batch_kind(const std::string& name);

std::string short_name(OnlineKind kind);
std::string short_name(BatchKind kind);

std::unique_ptr<OnlineClassifier> make_online(OnlineKind kind, const Schema& schema);
std::unique_ptr<BatchClassifier> make_batch(BatchKind kind, const Schema& schema, std::uint64_t seed,
                                            std::size_t n_trees = 100);

}  // namespace iebsm::learners
