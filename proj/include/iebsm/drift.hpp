#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iebsm/core.hpp"
#include "iebsm/stattests.hpp"

namespace iebsm::drift {

enum class RetrainScope { SinceLastReplacement, LastWindow };

// How "F1 falling below alpha of the reference F1" is read.
enum class PerformanceRule {
  RelativeDrop,  // F1_cur < (1 - alpha) * F1_ref
  Literal,       // F1_cur < alpha * F1_ref
};

struct DriftStrategy {
  std::string id;
  bool monitor_features = false;
  bool monitor_target = false;
  bool monitor_performance = false;
  double theta = 0.0;
  std::size_t window_s = 10000;
  double alpha = 0.2;
  RetrainScope retrain_scope = RetrainScope::SinceLastReplacement;
  PerformanceRule performance_rule = PerformanceRule::RelativeDrop;
  // Baselines fit once and never monitor.
  bool train_once = false;
  // Overrides the ensemble-wide first-fit position (B2 fits at 25,000).
  std::optional<std::size_t> first_fit_at;

  bool any_monitor() const noexcept { return monitor_features || monitor_target || monitor_performance; }
  void validate() const;
};

// S1..S7, B1, B2 keyed by id.
std::map<std::string, DriftStrategy> make_strategy_catalog();
DriftStrategy strategy_by_id(const std::string& id);

enum class TestId { None, KolmogorovSmirnov, Wasserstein, JensenShannon, ChiSquared, ZProportion };

std::string to_string(TestId test);

TestId select_test(FeatureKind kind, std::size_t n_unique, std::size_t s);

struct WindowPair {
  std::span<const Instance> reference;
  std::span<const Instance> current;
  std::span<const ClassIndex> reference_predictions;
  std::span<const ClassIndex> current_predictions;
};

enum class TriggerSource { Feature, Target, Performance };

struct Trigger {
  TriggerSource source = TriggerSource::Feature;
  std::string name;  // feature name, target name, or "performance"
  TestId test = TestId::None;
  double drift_score = 0.0;
};

std::string describe(const Trigger& trigger);

struct DriftVerdict {
  bool drifted = false;
  std::vector<Trigger> triggers;
};

// Outcome of one column's test, or nullopt for constant columns.
std::optional<stattests::TestOutcome> test_column(std::span<const double> reference,
                                                  std::span<const double> current, FeatureKind kind,
                                                  std::size_t s, TestId* chosen = nullptr);

// Per-feature tests run in parallel (OpenMP); check_windows_serial is the
// reference loop. Both aggregate triggers in column order.
DriftVerdict check_windows(const WindowPair& pair, const DriftStrategy& strategy, const Schema& schema);
DriftVerdict check_windows_serial(const WindowPair& pair, const DriftStrategy& strategy, const Schema& schema);

}  // namespace iebsm::drift
