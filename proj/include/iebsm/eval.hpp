#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "iebsm/core.hpp"

namespace iebsm::eval {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 0);

  void add(ClassIndex truth, ClassIndex predicted, std::int64_t weight = 1);
  std::int64_t at(ClassIndex truth, ClassIndex predicted) const {
    return counts_[truth * k_ + predicted];
  }
  std::size_t n_classes() const noexcept { return k_; }
  std::int64_t total() const noexcept { return total_; }
  void clear();

 private:
  std::size_t k_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Unweighted mean of per-class F1. A class with P + R = 0 scores 0; classes
// absent from both truth and prediction are left out of the mean.
double f1_macro(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);

// Confusion matrix over the last `capacity` (truth, prediction) pairs.
class SlidingWindow {
 public:
  SlidingWindow(std::size_t n_classes, std::size_t capacity);

  void push(ClassIndex truth, ClassIndex predicted);
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const ConfusionMatrix& matrix() const noexcept { return cm_; }
  const std::deque<std::pair<ClassIndex, ClassIndex>>& records() const noexcept { return records_; }
  // 0 when empty.
  double f1() const;

 private:
  std::size_t capacity_;
  ConfusionMatrix cm_;
  std::deque<std::pair<ClassIndex, ClassIndex>> records_;
};

// Test-then-train metric state: cumulative matrix, sliding window, and a
// windowed-F1 trace sampled every `trace_every` instances.
class Prequential {
 public:
  Prequential(std::size_t n_classes, std::size_t window = 1000, std::size_t trace_every = 1000);

  void update(ClassIndex truth, ClassIndex predicted);

  std::size_t n_seen() const noexcept { return static_cast<std::size_t>(cumulative_.total()); }
  const ConfusionMatrix& cumulative() const noexcept { return cumulative_; }
  const SlidingWindow& window() const noexcept { return window_; }
  double cumulative_f1() const;
  double windowed_f1() const { return window_.f1(); }

  struct TracePoint {
    std::uint64_t seq;  // number of instances scored so far
    double windowed_f1;
    double cumulative_f1;
  };
  const std::vector<TracePoint>& trace() const noexcept { return trace_; }

 private:
  ConfusionMatrix cumulative_;
  SlidingWindow window_;
  std::size_t trace_every_;
  std::vector<TracePoint> trace_;
};

struct RunReport {
  std::string run_id;
  std::string stream_id;
  std::string method_id;
  double final_f1 = 0.0;
  std::vector<double> windowed_trace;  // one value per 1000 instances
  std::uint64_t n_instances = 0;
  std::uint64_t drift_count = 0;
  std::uint64_t replacement_count = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

// One line of JSON. Fields are emitted in a fixed order.
std::string serialize_report(const RunReport& report);
RunReport parse_report(const std::string& line);

struct MethodScore {
  std::string method;
  double f1 = 0.0;
};

struct RankingRow {
  std::string method;
  double ranking_score = 0.0;
  std::size_t position = 0;  // 1-based
};

// Per stream: methods sorted by F1 descending, tied F1 values share the
// average of their positions. The ranking score is a method's mean position
// over streams, positions follow ascending score (ties by method name).
std::vector<RankingRow> rank_methods(const std::map<std::string, std::vector<MethodScore>>& per_stream);

}  // namespace iebsm::eval
