#include "iebsm/learners/hoeffding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace iebsm::learners {
namespace {

double entropy_bits(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log2(c / total);
  }
  return h;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Inverse standard normal CDF (Acklam's rational approximation, |err| < 1.2e-9).
double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double low = 0.02425;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - low) return -normal_quantile(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

Prediction from_counts(std::span<const std::int64_t> counts) {
  std::vector<double> w(counts.begin(), counts.end());
  return prediction_from_weights(std::move(w));
}

}  // namespace

double hoeffding_bound(double range, double delta, double n) {
  return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

LeafStats::LeafStats(std::size_t n_classes, std::size_t n_features)
    : stats(n_classes, n_features),
      feature_min(n_features, std::numeric_limits<double>::infinity()),
      feature_max(n_features, -std::numeric_limits<double>::infinity()) {}

void LeafStats::add(std::span<const double> x, ClassIndex y) {
  stats.add(x, y);
  for (std::size_t f = 0; f < x.size(); ++f) {
    feature_min[f] = std::min(feature_min[f], x[f]);
    feature_max[f] = std::max(feature_max[f], x[f]);
  }
  ++seen_since_check;
}

bool LeafStats::is_pure() const {
  std::size_t present = 0;
  for (auto c : stats.class_counts()) present += c > 0 ? 1 : 0;
  return present <= 1;
}

double gaussian_split_gain(const LeafStats& leaf, std::size_t feature, double threshold) {
  const auto& st = leaf.stats;
  const std::size_t k = st.n_classes();
  std::vector<double> parent(k), left(k), right(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double n = static_cast<double>(st.class_count(c));
    parent[c] = n;
    if (n == 0.0) continue;
    const auto& m = st.moments(c, feature);
    const double sd = std::sqrt(m.variance());
    double frac_left;
    if (sd > 0.0) {
      frac_left = normal_cdf((threshold - m.mean) / sd);
    } else {
      frac_left = m.mean <= threshold ? 1.0 : 0.0;
    }
    left[c] = n * frac_left;
    right[c] = n - left[c];
  }
  double nl = 0.0, nr = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    nl += left[c];
    nr += right[c];
  }
  const double total = nl + nr;
  if (!(total > 0.0)) return 0.0;
  const double gain = entropy_bits(parent) - (nl / total) * entropy_bits(left) - (nr / total) * entropy_bits(right);
  return std::max(gain, 0.0);
}

std::vector<double> split_candidates(const LeafStats& leaf, std::size_t feature, std::size_t n) {
  std::vector<double> out;
  const double lo = leaf.feature_min[feature];
  const double hi = leaf.feature_max[feature];
  if (!(hi > lo)) return out;
  const auto& g = leaf.stats.global(feature);
  const double sd = std::sqrt(g.variance());
  for (std::size_t i = 1; i <= n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n + 1);
    double t = g.mean + sd * normal_quantile(p);
    t = std::clamp(t, lo, hi);
    if (t >= hi) continue;  // would send everything left
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

SplitDecision ht_attempt_split(const LeafStats& leaf, const HoeffdingTreeConfig& config) {
  SplitDecision decision;
  if (leaf.stats.total() == 0 || leaf.is_pure()) return decision;
  std::size_t observed = 0;
  for (auto c : leaf.stats.class_counts()) observed += c > 0 ? 1 : 0;
  const double range = std::log2(static_cast<double>(std::max<std::size_t>(observed, 2)));

  // best threshold per feature, then best and runner-up across features
  double best = 0.0, second = 0.0;
  std::size_t best_feature = 0;
  double best_threshold = 0.0;
  bool found = false;
  for (std::size_t f = 0; f < leaf.stats.n_features(); ++f) {
    double feature_best = -1.0;
    double feature_threshold = 0.0;
    for (double t : split_candidates(leaf, f, config.n_split_candidates)) {
      const double gain = gaussian_split_gain(leaf, f, t);
      if (gain > feature_best) {
        feature_best = gain;
        feature_threshold = t;
      }
    }
    if (feature_best < 0.0) continue;
    if (!found || feature_best > best) {
      if (found) second = std::max(second, best);
      best = feature_best;
      best_feature = f;
      best_threshold = feature_threshold;
      found = true;
    } else {
      second = std::max(second, feature_best);
    }
  }
  decision.epsilon = hoeffding_bound(range, config.delta, static_cast<double>(leaf.stats.total()));
  if (!found) return decision;
  decision.feature = best_feature;
  decision.threshold = best_threshold;
  decision.best_gain = best;
  decision.second_gain = second;
  decision.split = best > 0.0 && (best - second > decision.epsilon || decision.epsilon < config.tie_threshold);
  return decision;
}

Prediction ht_leaf_predict(const LeafStats& leaf, std::span<const double> x, std::size_t nb_threshold) {
  const auto n = leaf.stats.total();
  if (n == 0) {
    if (leaf.inherited_counts.empty()) return uniform_prediction(leaf.stats.n_classes());
    return from_counts(leaf.inherited_counts);
  }
  if (static_cast<std::size_t>(n) < nb_threshold) return from_counts(leaf.stats.class_counts());
  return leaf.stats.predict(x);
}

HoeffdingTree::HoeffdingTree(const Schema& schema, HoeffdingTreeConfig config)
    : OnlineClassifier(schema), config_(config) {
  Node root;
  root.leaf.emplace(schema.n_classes(), schema.n_features());
  nodes_.push_back(std::move(root));
}

std::size_t HoeffdingTree::route(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].leaf) i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return i;
}

Prediction HoeffdingTree::predict(std::span<const double> x) const {
  check_dimension(x);
  return ht_leaf_predict(*nodes_[route(x)].leaf, x, config_.nb_threshold);
}

void HoeffdingTree::learn_one(const Instance& inst) {
  check_instance(inst);
  const std::size_t at = route(inst.x);
  LeafStats& leaf = *nodes_[at].leaf;
  leaf.add(inst.x, inst.y);
  if (leaf.seen_since_check < config_.grace_period) return;
  leaf.seen_since_check = 0;
  const auto decision = ht_attempt_split(leaf, config_);
  if (!decision.split) return;

  Node child;
  child.leaf.emplace(n_classes(), n_features());
  child.leaf->inherited_counts = leaf.stats.class_counts();
  const std::size_t left = nodes_.size();
  nodes_.push_back(child);
  nodes_.push_back(std::move(child));
  Node& parent = nodes_[at];  // re-fetch, push_back may reallocate
  parent.leaf.reset();
  parent.feature = decision.feature;
  parent.threshold = decision.threshold;
  parent.left = left;
  parent.right = left + 1;
}

std::unique_ptr<OnlineClassifier> HoeffdingTree::clone() const { return std::make_unique<HoeffdingTree>(*this); }

std::size_t HoeffdingTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf.has_value(); }));
}

std::size_t HoeffdingTree::depth() const {
  std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) -> std::size_t {
    if (nodes_[i].leaf) return 0;
    return 1 + std::max(rec(nodes_[i].left), rec(nodes_[i].right));
  };
  return rec(0);
}

}  // namespace iebsm::learners
