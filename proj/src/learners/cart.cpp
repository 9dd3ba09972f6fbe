#include "iebsm/learners/cart.hpp"

#include <algorithm>
#include <numeric>

namespace iebsm::learners {

DecisionTree::DecisionTree(const Schema& schema, TreeOptions options)
    : BatchClassifier(schema), options_(options) {}

void DecisionTree::fit(std::span<const Instance> batch) {
  if (batch.empty()) throw TrainingError("cannot fit a decision tree on an empty batch");
  for (const auto& inst : batch) check_instance(inst);
  std::vector<std::size_t> indices(batch.size());
  std::iota(indices.begin(), indices.end(), 0);
  std::mt19937_64 rng(options_.seed);
  fit_indices(batch, std::move(indices), rng);
}

void DecisionTree::fit_indices(std::span<const Instance> batch, std::vector<std::size_t> indices,
                               std::mt19937_64& rng) {
  if (indices.empty()) throw TrainingError("cannot fit a decision tree on an empty batch");
  const std::size_t k = n_classes();
  const std::size_t d = n_features();
  const std::size_t budget = options_.max_features == 0 ? d : std::min(options_.max_features, d);
  nodes_.clear();
  leaf_counts_.clear();

  struct Task {
    std::size_t node;
    std::size_t lo;
    std::size_t hi;
  };
  std::vector<Task> stack;
  nodes_.push_back({});
  stack.push_back({0, 0, indices.size()});

  std::vector<std::size_t> feature_order(d);
  std::vector<std::pair<double, std::uint32_t>> column;
  std::vector<double> total(k), left(k);

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    const std::size_t n = task.hi - task.lo;

    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t i = task.lo; i < task.hi; ++i) total[batch[indices[i]].y] += 1.0;
    const std::size_t present =
        static_cast<std::size_t>(std::count_if(total.begin(), total.end(), [](double c) { return c > 0.0; }));

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_proxy = -1.0;
    if (present > 1 && n >= options_.min_samples_split) {
      std::iota(feature_order.begin(), feature_order.end(), 0);
      if (budget < d) std::shuffle(feature_order.begin(), feature_order.end(), rng);
      double total_sq = 0.0;
      for (double c : total) total_sq += c * c;
      std::size_t examined = 0;
      for (std::size_t f : feature_order) {
        if (examined >= budget) break;
        column.clear();
        for (std::size_t i = task.lo; i < task.hi; ++i) {
          const auto& inst = batch[indices[i]];
          column.emplace_back(inst.x[f], static_cast<std::uint32_t>(inst.y));
        }
        std::sort(column.begin(), column.end());
        if (column.front().first == column.back().first) continue;  // constant here
        ++examined;
        std::fill(left.begin(), left.end(), 0.0);
        double sq_left = 0.0;
        double sq_right = total_sq;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const auto c = column[i].second;
          const double right_c = total[c] - left[c];
          sq_left += 2.0 * left[c] + 1.0;
          sq_right -= 2.0 * right_c - 1.0;
          left[c] += 1.0;
          if (column[i].first == column[i + 1].first) continue;
          const double nl = static_cast<double>(i + 1);
          const double nr = static_cast<double>(n - i - 1);
          // maximizing sum l^2/nl + sum r^2/nr minimizes weighted Gini
          const double proxy = sq_left / nl + sq_right / nr;
          if (proxy > best_proxy) {
            best_proxy = proxy;
            best_feature = static_cast<int>(f);
            const double a = column[i].first;
            const double b = column[i + 1].first;
            double mid = a + (b - a) / 2.0;
            if (mid >= b) mid = a;
            best_threshold = mid;
          }
        }
      }
    }

    if (best_feature < 0) {
      Node& leaf = nodes_[task.node];
      leaf.feature = -1;
      leaf.counts_offset = static_cast<std::uint32_t>(leaf_counts_.size());
      leaf.label = static_cast<std::uint32_t>(argmax(total));
      leaf_counts_.insert(leaf_counts_.end(), total.begin(), total.end());
      continue;
    }
    const auto mid_it = std::partition(indices.begin() + static_cast<std::ptrdiff_t>(task.lo),
                                       indices.begin() + static_cast<std::ptrdiff_t>(task.hi),
                                       [&](std::size_t idx) {
                                         return batch[idx].x[static_cast<std::size_t>(best_feature)] <= best_threshold;
                                       });
    const std::size_t mid = static_cast<std::size_t>(mid_it - indices.begin());
    const auto left_node = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    Node& node = nodes_[task.node];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_node;
    node.right = left_node + 1;
    // right first so the left subtree is grown first (stable node numbering)
    stack.push_back({left_node + 1u, mid, task.hi});
    stack.push_back({left_node, task.lo, mid});
  }
}

std::size_t DecisionTree::leaf_of(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return i;
}

ClassIndex DecisionTree::predict_label(std::span<const double> x) const {
  if (nodes_.empty()) return 0;
  return nodes_[leaf_of(x)].label;
}

Prediction DecisionTree::predict(std::span<const double> x) const {
  check_dimension(x);
  if (nodes_.empty()) return uniform_prediction(n_classes());
  const auto& leaf = nodes_[leaf_of(x)];
  std::vector<double> counts(leaf_counts_.begin() + leaf.counts_offset,
                             leaf_counts_.begin() + leaf.counts_offset + static_cast<std::ptrdiff_t>(n_classes()));
  return prediction_from_weights(std::move(counts));
}

std::unique_ptr<BatchClassifier> DecisionTree::clone() const { return std::make_unique<DecisionTree>(*this); }

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes_[i].feature >= 0) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

}  // namespace iebsm::learners
