#include "iebsm/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "iebsm/learners/majority.hpp"

namespace iebsm::ensemble {
namespace {

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double metric_value(const eval::ConfusionMatrix& cm, ComparisonMetric metric) {
  return metric == ComparisonMetric::F1Macro ? eval::f1_macro(cm) : eval::accuracy(cm);
}

}  // namespace

Combiner parse_combiner(const std::string& name) {
  if (name == "WV") return Combiner::WeightedVoting;
  if (name == "DS") return Combiner::DynamicSwitching;
  throw ConfigError("unknown combiner '" + name + "' (expected WV or DS)");
}

std::string to_string(Combiner combiner) { return combiner == Combiner::WeightedVoting ? "WV" : "DS"; }

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Drift:
      return "drift";
    case EventKind::Replace:
      return "replace";
    case EventKind::Discard:
      return "discard";
    case EventKind::CacheDrop:
      return "cache_drop";
    case EventKind::Warning:
      return "warning";
  }
  return "warning";
}

void EnsembleConfig::validate() const {
  if (members.empty()) throw ConfigError("ensemble needs at least one member");
  if (n_comp == 0) throw ConfigError("n_comp must be >= 1");
  if (score_window == 0) throw ConfigError("score window must be >= 1");
  if (n_first_fit == 0) throw ConfigError("n_first_fit must be >= 1");
  for (const auto& m : members) {
    if (m.kind == MemberKind::Batch) m.strategy.validate();
  }
}

std::vector<double> compute_weights(std::span<const double> scores, Combiner combiner) {
  const std::size_t n = scores.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  if (combiner == Combiner::DynamicSwitching) {
    w[argmax(scores)] = 1.0;
    return w;
  }
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) w[i] = scores[i] / total;
  return w;
}

ClassIndex combine_votes(std::span<const ClassIndex> predictions, std::span<const double> weights,
                         std::size_t n_classes) {
  if (predictions.size() != weights.size()) throw InternalError("vote needs one weight per prediction");
  std::vector<double> tally(n_classes, 0.0);
  for (std::size_t j = 0; j < predictions.size(); ++j) tally[predictions[j]] += weights[j];
  return argmax(tally);
}

ShadowOutcome shadow_compare_step(ShadowComparison& cmp, ClassIndex truth, ClassIndex incumbent_prediction,
                                  ClassIndex shadow_prediction, std::size_t n_comp, ComparisonMetric metric,
                                  double* shadow_score, double* incumbent_score) {
  cmp.shadow.add(truth, shadow_prediction);
  cmp.incumbent.add(truth, incumbent_prediction);
  ++cmp.n;
  if (cmp.n < n_comp) return ShadowOutcome::Pending;
  const double s = metric_value(cmp.shadow, metric);
  const double i = metric_value(cmp.incumbent, metric);
  if (shadow_score) *shadow_score = s;
  if (incumbent_score) *incumbent_score = i;
  cmp.shadow.clear();
  cmp.incumbent.clear();
  cmp.n = 0;
  return s > i ? ShadowOutcome::Replace : ShadowOutcome::Discard;
}

std::vector<Instance> retrain_slice(const std::deque<Instance>& cache, const drift::DriftStrategy& strategy) {
  std::size_t start = 0;
  if (strategy.retrain_scope == drift::RetrainScope::LastWindow && cache.size() > strategy.window_s) {
    start = cache.size() - strategy.window_s;
  }
  return {cache.begin() + static_cast<std::ptrdiff_t>(start), cache.end()};
}

Member::Member(MemberSpec spec, const Schema& schema, const EnsembleConfig& config)
    : spec_(std::move(spec)),
      schema_(schema),
      n_comp_(config.n_comp),
      cache_cap_(config.cache_cap),
      n_trees_(config.n_trees),
      metric_(config.shadow_metric),
      seed_(config.seed),
      first_fit_at_(spec_.strategy.first_fit_at.value_or(config.n_first_fit)),
      comparison_(schema.n_classes()),
      label_counts_(schema.n_classes(), 0),
      score_window_(schema.n_classes(), config.score_window) {
  if (spec_.kind == MemberKind::Online) {
    online_ = learners::make_online(spec_.online, schema_);
  } else {
    batch_ = learners::make_batch(spec_.batch, schema_, seed_, n_trees_);
  }
}

Member::Member(const Member& other)
    : spec_(other.spec_),
      schema_(other.schema_),
      n_comp_(other.n_comp_),
      cache_cap_(other.cache_cap_),
      n_trees_(other.n_trees_),
      metric_(other.metric_),
      seed_(other.seed_),
      first_fit_at_(other.first_fit_at_),
      online_(other.online_ ? other.online_->clone() : nullptr),
      batch_(other.batch_ ? other.batch_->clone() : nullptr),
      shadow_(other.shadow_ ? other.shadow_->clone() : nullptr),
      comparison_(other.comparison_),
      shadow_started_at_(other.shadow_started_at_),
      fitted_(other.fitted_),
      label_counts_(other.label_counts_),
      cache_(other.cache_),
      recent_(other.recent_),
      recent_predictions_(other.recent_predictions_),
      since_first_fit_(other.since_first_fit_),
      drift_count_(other.drift_count_),
      replacement_count_(other.replacement_count_),
      dropping_(other.dropping_),
      score_window_(other.score_window_) {}

Member& Member::operator=(const Member& other) {
  if (this != &other) {
    Member copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Prediction Member::predict(std::span<const double> x) const {
  if (online_) return online_->predict(x);
  if (!fitted_) {
    Prediction p;
    p.label = argmax(std::vector<double>(label_counts_.begin(), label_counts_.end()));
    return p;
  }
  return batch_->predict(x);
}

std::unique_ptr<BatchClassifier> Member::train(std::span<const Instance> slice) const {
  auto model = learners::make_batch(spec_.batch, schema_, seed_, n_trees_);
  model->fit(slice);
  return model;
}

void Member::learn(const Instance& inst, ClassIndex own_prediction, std::uint64_t position,
                   std::vector<Event>& events) {
  if (online_) {
    online_->learn_one(inst);
    return;
  }
  learn_batch(inst, own_prediction, position, events);
}

void Member::learn_batch(const Instance& inst, ClassIndex own_prediction, std::uint64_t position,
                         std::vector<Event>& events) {
  const auto& strategy = spec_.strategy;
  ++label_counts_[inst.y];

  cache_.push_back(inst);
  if (fitted_) {
    if (strategy.retrain_scope == drift::RetrainScope::LastWindow || strategy.train_once) {
      while (cache_.size() > strategy.window_s) cache_.pop_front();
    } else if (cache_.size() > cache_cap_) {
      cache_.pop_front();
      if (!dropping_) {
        events.push_back({inst.seq, spec_.id, EventKind::CacheDrop, "cache_cap", std::to_string(cache_cap_)});
        dropping_ = true;
      }
    }
  }

  if (shadow_) {
    const ClassIndex shadow_prediction = shadow_->predict(inst.x).label;
    double s = 0.0, i = 0.0;
    const auto outcome =
        shadow_compare_step(comparison_, inst.y, own_prediction, shadow_prediction, n_comp_, metric_, &s, &i);
    if (outcome != ShadowOutcome::Pending) {
      const std::string score = format_score(s) + ";" + format_score(i);
      if (outcome == ShadowOutcome::Replace) {
        batch_ = std::move(shadow_);
        ++replacement_count_;
        if (strategy.retrain_scope == drift::RetrainScope::SinceLastReplacement) {
          cache_.clear();
          dropping_ = false;
        }
        events.push_back({inst.seq, spec_.id, EventKind::Replace, "shadow", score});
      } else {
        events.push_back({inst.seq, spec_.id, EventKind::Discard, "shadow", score});
      }
      shadow_.reset();
      shadow_started_at_.reset();
    }
  }

  if (!fitted_) {
    if (position == first_fit_at_) {
      const std::vector<Instance> slice(cache_.begin(), cache_.end());
      batch_ = train(slice);
      fitted_ = true;
      if (strategy.retrain_scope == drift::RetrainScope::SinceLastReplacement) cache_.clear();
    }
    return;
  }
  if (strategy.train_once || !strategy.any_monitor()) return;

  const std::size_t s = strategy.window_s;
  recent_.push_back(inst);
  recent_predictions_.push_back(own_prediction);
  if (recent_.size() > 2 * s) {
    recent_.pop_front();
    recent_predictions_.pop_front();
  }
  ++since_first_fit_;
  if (since_first_fit_ % s != 0 || recent_.size() < 2 * s || shadow_) return;

  const std::vector<Instance> window(recent_.begin(), recent_.end());
  const std::vector<ClassIndex> predictions(recent_predictions_.begin(), recent_predictions_.end());
  drift::WindowPair pair{std::span(window).first(s), std::span(window).subspan(s),
                         std::span(predictions).first(s), std::span(predictions).subspan(s)};
  const auto verdict = drift::check_windows(pair, strategy, schema_);
  if (!verdict.drifted) return;

  const auto slice = retrain_slice(cache_, strategy);
  if (slice.empty()) return;
  shadow_ = train(slice);
  shadow_started_at_ = inst.seq + 1;
  comparison_ = ShadowComparison(schema_.n_classes());
  ++drift_count_;
  std::string sources, scores;
  for (const auto& t : verdict.triggers) {
    if (!sources.empty()) {
      sources += ';';
      scores += ';';
    }
    sources += drift::describe(t);
    scores += format_score(t.drift_score);
  }
  events.push_back({inst.seq, spec_.id, EventKind::Drift, sources, scores});
}

Ensemble::Ensemble(const Schema& schema, EnsembleConfig config) : schema_(schema), config_(std::move(config)) {
  config_.validate();
  members_.reserve(config_.members.size());
  for (const auto& spec : config_.members) members_.emplace_back(spec, schema_, config_);
}

VoteStep Ensemble::predict_phase(std::span<const double> x) const {
  VoteStep step;
  const std::size_t n = members_.size();
  step.member_predictions.assign(n, 0);
  std::vector<double> scores(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    try {
      step.member_predictions[j] = members_[j].predict(x).label;
    } catch (const std::exception& e) {
      step.member_predictions[j] = 0;
      step.warnings.push_back(members_[j].id() + ": predict failed: " + e.what());
    }
    scores[j] = members_[j].score();
  }
  step.weights = compute_weights(scores, config_.combiner);
  step.final_label = combine_votes(step.member_predictions, step.weights, schema_.n_classes());
  return step;
}

void Ensemble::learn_phase(const VoteStep& step, const Instance& inst) {
  ++processed_;
  for (const auto& w : step.warnings) events_.push_back({inst.seq, "ensemble", EventKind::Warning, "predict", w});
  for (std::size_t j = 0; j < members_.size(); ++j) {
    members_[j].record_score(inst.y, step.member_predictions[j]);
  }
  for (std::size_t j = 0; j < members_.size(); ++j) {
    try {
      members_[j].learn(inst, step.member_predictions[j], processed_, events_);
    } catch (const InternalError&) {
      throw;
    } catch (const std::exception& e) {
      events_.push_back({inst.seq, members_[j].id(), EventKind::Warning, "learn", e.what()});
    }
  }
}

ClassIndex Ensemble::process_instance(const Instance& inst, VoteStep* step_out) {
  VoteStep step = predict_phase(inst.x);
  learn_phase(step, inst);
  const ClassIndex final_label = step.final_label;
  if (step_out) *step_out = std::move(step);
  return final_label;
}

std::uint64_t Ensemble::drift_count() const {
  std::uint64_t total = 0;
  for (const auto& m : members_) total += m.drift_count();
  return total;
}

std::uint64_t Ensemble::replacement_count() const {
  std::uint64_t total = 0;
  for (const auto& m : members_) total += m.replacement_count();
  return total;
}

}  // namespace iebsm::ensemble
