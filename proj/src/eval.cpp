#include "iebsm/eval.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace iebsm::eval {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : k_(n_classes), counts_(n_classes * n_classes, 0) {}

void ConfusionMatrix::add(ClassIndex truth, ClassIndex predicted, std::int64_t weight) {
  if (truth >= k_ || predicted >= k_) throw MetricError("class index outside confusion matrix");
  counts_[truth * k_ + predicted] += weight;
  total_ += weight;
}

void ConfusionMatrix::clear() {
  std::fill(counts_.begin(), counts_.end(), 0);
  total_ = 0;
}

double f1_macro(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw MetricError("F1 of an empty confusion matrix");
  const std::size_t k = cm.n_classes();
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = cm.at(c, c);
    std::int64_t actual = 0;
    std::int64_t predicted = 0;
    for (std::size_t o = 0; o < k; ++o) {
      actual += cm.at(c, o);
      predicted += cm.at(o, c);
    }
    if (actual == 0 && predicted == 0) continue;
    ++counted;
    // 2PR/(P+R) == 2TP/(actual + predicted)
    if (tp > 0) sum += 2.0 * static_cast<double>(tp) / static_cast<double>(actual + predicted);
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw MetricError("accuracy of an empty confusion matrix");
  std::int64_t hits = 0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) hits += cm.at(c, c);
  return static_cast<double>(hits) / static_cast<double>(cm.total());
}

SlidingWindow::SlidingWindow(std::size_t n_classes, std::size_t capacity)
    : capacity_(capacity), cm_(n_classes) {
  if (capacity_ == 0) throw ConfigError("sliding window capacity must be >= 1");
}

void SlidingWindow::push(ClassIndex truth, ClassIndex predicted) {
  cm_.add(truth, predicted);
  records_.emplace_back(truth, predicted);
  if (records_.size() > capacity_) {
    const auto [t, p] = records_.front();
    cm_.add(t, p, -1);
    records_.pop_front();
  }
}

double SlidingWindow::f1() const { return records_.empty() ? 0.0 : f1_macro(cm_); }

Prequential::Prequential(std::size_t n_classes, std::size_t window, std::size_t trace_every)
    : cumulative_(n_classes), window_(n_classes, window), trace_every_(trace_every) {}

void Prequential::update(ClassIndex truth, ClassIndex predicted) {
  cumulative_.add(truth, predicted);
  window_.push(truth, predicted);
  if (trace_every_ > 0 && n_seen() % trace_every_ == 0) {
    trace_.push_back({static_cast<std::uint64_t>(n_seen()), window_.f1(), f1_macro(cumulative_)});
  }
}

double Prequential::cumulative_f1() const {
  return cumulative_.total() == 0 ? 0.0 : f1_macro(cumulative_);
}

std::string serialize_report(const RunReport& report) {
  nlohmann::ordered_json j;
  j["run_id"] = report.run_id;
  j["stream_id"] = report.stream_id;
  j["method_id"] = report.method_id;
  j["final_f1"] = report.final_f1;
  j["n_instances"] = report.n_instances;
  j["drift_count"] = report.drift_count;
  j["replacement_count"] = report.replacement_count;
  j["seed"] = report.seed;
  j["config_digest"] = report.config_digest;
  j["windowed_f1_trace"] = report.windowed_trace;
  return j.dump();
}

RunReport parse_report(const std::string& line) {
  RunReport r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.run_id = j.at("run_id").get<std::string>();
    r.stream_id = j.at("stream_id").get<std::string>();
    r.method_id = j.at("method_id").get<std::string>();
    r.final_f1 = j.at("final_f1").get<double>();
    r.n_instances = j.at("n_instances").get<std::uint64_t>();
    r.drift_count = j.at("drift_count").get<std::uint64_t>();
    r.replacement_count = j.at("replacement_count").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.windowed_trace = j.at("windowed_f1_trace").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed run report: ") + e.what());
  }
  return r;
}

std::vector<RankingRow> rank_methods(const std::map<std::string, std::vector<MethodScore>>& per_stream) {
  std::set<std::string> methods;
  for (const auto& [stream, scores] : per_stream) {
    for (const auto& s : scores) methods.insert(s.method);
  }
  std::string missing;
  for (const auto& [stream, scores] : per_stream) {
    std::set<std::string> present;
    for (const auto& s : scores) {
      if (!present.insert(s.method).second) {
        throw RankingError("method '" + s.method + "' listed twice for stream '" + stream + "'");
      }
    }
    for (const auto& m : methods) {
      if (!present.count(m)) missing += " (" + m + ", " + stream + ")";
    }
  }
  if (!missing.empty()) throw RankingError("incomplete grid, missing:" + missing);
  if (methods.empty()) return {};

  std::map<std::string, double> position_sum;
  for (const auto& [stream, scores] : per_stream) {
    std::vector<MethodScore> sorted = scores;
    std::sort(sorted.begin(), sorted.end(), [](const MethodScore& a, const MethodScore& b) {
      if (a.f1 != b.f1) return a.f1 > b.f1;
      return a.method < b.method;
    });
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j].f1 == sorted[i].f1) ++j;
      // positions i+1 .. j share their mean
      const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      for (std::size_t t = i; t < j; ++t) position_sum[sorted[t].method] += shared;
      i = j;
    }
  }
  std::vector<RankingRow> rows;
  const double n_streams = static_cast<double>(per_stream.size());
  for (const auto& m : methods) rows.push_back({m, position_sum[m] / n_streams, 0});
  std::sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.ranking_score != b.ranking_score) return a.ranking_score < b.ranking_score;
    return a.method < b.method;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].position = i + 1;
  return rows;
}

}  // namespace iebsm::eval
