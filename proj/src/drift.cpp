#include "iebsm/drift.hpp"

#include <algorithm>

#include "iebsm/eval.hpp"

namespace iebsm::drift {
namespace {

DriftStrategy make(std::string id, bool features, bool target, bool performance, double theta, std::size_t s,
                   RetrainScope scope) {
  DriftStrategy st;
  st.id = std::move(id);
  st.monitor_features = features;
  st.monitor_target = target;
  st.monitor_performance = performance;
  st.theta = theta;
  st.window_s = s;
  st.alpha = 0.2;
  st.retrain_scope = scope;
  return st;
}

DriftStrategy baseline(std::string id, std::optional<std::size_t> first_fit_at) {
  DriftStrategy st;
  st.id = std::move(id);
  st.train_once = true;
  st.first_fit_at = first_fit_at;
  return st;
}

std::vector<double> column(std::span<const Instance> window, std::size_t f) {
  std::vector<double> out;
  out.reserve(window.size());
  for (const auto& inst : window) out.push_back(inst.x[f]);
  return out;
}

std::vector<double> labels(std::span<const Instance> window) {
  std::vector<double> out;
  out.reserve(window.size());
  for (const auto& inst : window) out.push_back(static_cast<double>(inst.y));
  return out;
}

std::size_t count_unique(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
}

double window_f1(std::span<const Instance> window, std::span<const ClassIndex> predictions, std::size_t k) {
  eval::ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < window.size(); ++i) cm.add(window[i].y, predictions[i]);
  return eval::f1_macro(cm);
}

std::optional<Trigger> feature_trigger(const WindowPair& pair, const DriftStrategy& strategy, const Schema& schema,
                                       std::size_t f) {
  const auto a = column(pair.reference, f);
  const auto b = column(pair.current, f);
  TestId test = TestId::None;
  const auto outcome = test_column(a, b, schema.features()[f].kind, strategy.window_s, &test);
  if (!outcome || !stattests::flags_drift(*outcome, strategy.theta)) return std::nullopt;
  return Trigger{TriggerSource::Feature, schema.features()[f].name, test, outcome->drift_score};
}

void add_target_and_performance(const WindowPair& pair, const DriftStrategy& strategy, const Schema& schema,
                                DriftVerdict& verdict) {
  if (strategy.monitor_target) {
    const auto a = labels(pair.reference);
    const auto b = labels(pair.current);
    TestId test = TestId::None;
    const auto outcome = test_column(a, b, FeatureKind::Categorical, strategy.window_s, &test);
    if (outcome && stattests::flags_drift(*outcome, strategy.theta)) {
      verdict.triggers.push_back({TriggerSource::Target, schema.target_name(), test, outcome->drift_score});
    }
  }
  if (strategy.monitor_performance) {
    const double ref = window_f1(pair.reference, pair.reference_predictions, schema.n_classes());
    const double cur = window_f1(pair.current, pair.current_predictions, schema.n_classes());
    const double limit = strategy.performance_rule == PerformanceRule::RelativeDrop ? (1.0 - strategy.alpha) * ref
                                                                                    : strategy.alpha * ref;
    if (cur < limit) {
      verdict.triggers.push_back({TriggerSource::Performance, "performance", TestId::None, ref > 0.0 ? 1.0 - cur / ref : 0.0});
    }
  }
  verdict.drifted = !verdict.triggers.empty();
}

void validate_pair(const WindowPair& pair, const Schema& schema) {
  if (pair.reference.size() != pair.current.size()) throw InternalError("drift windows differ in size");
  if (pair.reference_predictions.size() != pair.reference.size() ||
      pair.current_predictions.size() != pair.current.size()) {
    throw InternalError("drift window predictions do not match window size");
  }
  if (pair.reference.empty()) throw InternalError("drift windows are empty");
  if (pair.reference.front().x.size() != schema.n_features()) throw SchemaError("window instances do not match schema");
}

}  // namespace

void DriftStrategy::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("strategy " + id + ": alpha must lie in (0, 1)");
  if ((monitor_features || monitor_target) && !(theta > 0.0)) {
    throw ConfigError("strategy " + id + ": theta must be positive when statistical monitors are on");
  }
  if (window_s < 2) throw ConfigError("strategy " + id + ": window s must be >= 2");
}

std::map<std::string, DriftStrategy> make_strategy_catalog() {
  using enum RetrainScope;
  std::map<std::string, DriftStrategy> catalog;
  auto put = [&](DriftStrategy st) { catalog.emplace(st.id, std::move(st)); };
  put(make("S1", true, true, true, 0.03, 10000, SinceLastReplacement));
  put(make("S2", false, false, true, 0.0, 10000, SinceLastReplacement));
  put(make("S3", true, true, true, 0.02, 5000, SinceLastReplacement));
  put(make("S4", true, true, true, 0.02, 2500, SinceLastReplacement));
  put(make("S5", false, false, true, 0.0, 2500, LastWindow));
  put(make("S6", true, true, true, 0.03, 10000, SinceLastReplacement));
  put(make("S7", true, true, true, 0.02, 10000, LastWindow));
  put(baseline("B1", std::nullopt));
  put(baseline("B2", 25000));
  return catalog;
}

DriftStrategy strategy_by_id(const std::string& id) {
  const auto catalog = make_strategy_catalog();
  const auto it = catalog.find(id);
  if (it == catalog.end()) throw ConfigError("unknown drift strategy '" + id + "'");
  return it->second;
}

std::string to_string(TestId test) {
  switch (test) {
    case TestId::None:
      return "none";
    case TestId::KolmogorovSmirnov:
      return "ks";
    case TestId::Wasserstein:
      return "wasserstein";
    case TestId::JensenShannon:
      return "jensen_shannon";
    case TestId::ChiSquared:
      return "chi_squared";
    case TestId::ZProportion:
      return "z_proportion";
  }
  return "none";
}

TestId select_test(FeatureKind kind, std::size_t n_unique, std::size_t s) {
  const bool large = s > 1000;
  if (n_unique <= 1) return TestId::None;
  if (n_unique == 2) return large ? TestId::JensenShannon : TestId::ZProportion;
  if (kind == FeatureKind::Numeric && n_unique > 5) return large ? TestId::Wasserstein : TestId::KolmogorovSmirnov;
  return large ? TestId::JensenShannon : TestId::ChiSquared;
}

std::optional<stattests::TestOutcome> test_column(std::span<const double> reference, std::span<const double> current,
                                                  FeatureKind kind, std::size_t s, TestId* chosen) {
  const std::size_t n_unique = count_unique(reference, current);
  const TestId test = select_test(kind, n_unique, s);
  if (chosen) *chosen = test;
  switch (test) {
    case TestId::None:
      return std::nullopt;
    case TestId::KolmogorovSmirnov:
      return stattests::ks_two_sample(reference, current);
    case TestId::Wasserstein:
      return stattests::wasserstein_1d(reference, current, stattests::population_std(reference));
    case TestId::JensenShannon:
      // dispatch only reaches JS for low-cardinality columns: compare value frequencies
      return stattests::js_divergence(reference, current, FeatureKind::Categorical);
    case TestId::ChiSquared:
      return stattests::chi_squared(reference, current);
    case TestId::ZProportion: {
      const double hi = std::max(*std::max_element(reference.begin(), reference.end()),
                                 *std::max_element(current.begin(), current.end()));
      const auto sa = static_cast<std::size_t>(std::count(reference.begin(), reference.end(), hi));
      const auto sb = static_cast<std::size_t>(std::count(current.begin(), current.end(), hi));
      return stattests::z_proportion(sa, reference.size(), sb, current.size());
    }
  }
  return std::nullopt;
}

std::string describe(const Trigger& trigger) {
  switch (trigger.source) {
    case TriggerSource::Feature:
      return "feature:" + trigger.name;
    case TriggerSource::Target:
      return "target:" + trigger.name;
    case TriggerSource::Performance:
      return "performance";
  }
  return "unknown";
}

DriftVerdict check_windows(const WindowPair& pair, const DriftStrategy& strategy, const Schema& schema) {
  validate_pair(pair, schema);
  DriftVerdict verdict;
  if (strategy.monitor_features) {
    const std::size_t d = schema.n_features();
    std::vector<std::optional<Trigger>> per_feature(d);
    const auto n = static_cast<long long>(d);
#pragma omp parallel for schedule(dynamic)
    for (long long f = 0; f < n; ++f) {
      per_feature[static_cast<std::size_t>(f)] = feature_trigger(pair, strategy, schema, static_cast<std::size_t>(f));
    }
    for (auto& t : per_feature) {
      if (t) verdict.triggers.push_back(std::move(*t));
    }
  }
  add_target_and_performance(pair, strategy, schema, verdict);
  return verdict;
}

DriftVerdict check_windows_serial(const WindowPair& pair, const DriftStrategy& strategy, const Schema& schema) {
  validate_pair(pair, schema);
  DriftVerdict verdict;
  if (strategy.monitor_features) {
    for (std::size_t f = 0; f < schema.n_features(); ++f) {
      if (auto t = feature_trigger(pair, strategy, schema, f)) verdict.triggers.push_back(std::move(*t));
    }
  }
  add_target_and_performance(pair, strategy, schema, verdict);
  return verdict;
}

}  // namespace iebsm::drift
