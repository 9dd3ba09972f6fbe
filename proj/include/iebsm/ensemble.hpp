#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iebsm/core.hpp"
#include "iebsm/drift.hpp"
#include "iebsm/eval.hpp"
#include "iebsm/learners/factory.hpp"

namespace iebsm::ensemble {

enum class Combiner { WeightedVoting, DynamicSwitching };
enum class ComparisonMetric { F1Macro, Accuracy };

Combiner parse_combiner(const std::string& name);
std::string to_string(Combiner combiner);

enum class MemberKind { Online, Batch };

struct MemberSpec {
  std::string id;
  MemberKind kind = MemberKind::Online;
  learners::OnlineKind online = learners::OnlineKind::GaussianNB;
  learners::BatchKind batch = learners::BatchKind::RandomForest;
  drift::DriftStrategy strategy;  // batch members only
};

struct EnsembleConfig {
  std::vector<MemberSpec> members;
  Combiner combiner = Combiner::DynamicSwitching;
  std::size_t n_first_fit = 2500;
  std::size_t n_comp = 500;
  std::size_t score_window = 500;
  std::size_t cache_cap = 200000;
  std::size_t n_trees = 100;
  ComparisonMetric shadow_metric = ComparisonMetric::F1Macro;
  std::uint64_t seed = 42;

  void validate() const;
};

enum class EventKind { Drift, Replace, Discard, CacheDrop, Warning };

std::string to_string(EventKind kind);

struct Event {
  std::uint64_t seq = 0;
  std::string member;
  EventKind kind = EventKind::Warning;
  std::string source;  // trigger description(s) or "shadow"
  std::string score;   // formatted score(s)
};

// WV: proportional to scores, uniform when all scores are zero.
// DS: one-hot at the best score, ties to the lowest member index.
std::vector<double> compute_weights(std::span<const double> scores, Combiner combiner);

// Weighted hard vote; ties go to the lowest class index.
ClassIndex combine_votes(std::span<const ClassIndex> predictions, std::span<const double> weights,
                         std::size_t n_classes);

// Paired shadow/incumbent records over the comparison window.
struct ShadowComparison {
  eval::ConfusionMatrix shadow;
  eval::ConfusionMatrix incumbent;
  std::size_t n = 0;

  explicit ShadowComparison(std::size_t n_classes = 0) : shadow(n_classes), incumbent(n_classes) {}
};

enum class ShadowOutcome { Pending, Replace, Discard };

// Appends one paired record. Once n_comp records are in, the shadow wins only
// with a strictly better score; the window clears either way.
ShadowOutcome shadow_compare_step(ShadowComparison& cmp, ClassIndex truth, ClassIndex incumbent_prediction,
                                  ClassIndex shadow_prediction, std::size_t n_comp, ComparisonMetric metric,
                                  double* shadow_score = nullptr, double* incumbent_score = nullptr);

// Training slice for a retrain: the whole cache for SinceLastReplacement, the
// last s instances for LastWindow.
std::vector<Instance> retrain_slice(const std::deque<Instance>& cache, const drift::DriftStrategy& strategy);

class Member {
 public:
  Member(MemberSpec spec, const Schema& schema, const EnsembleConfig& config);
  Member(const Member& other);
  Member& operator=(const Member& other);
  Member(Member&&) noexcept = default;
  Member& operator=(Member&&) noexcept = default;
  ~Member() = default;

  // Batch members answer with the majority class of their cache until the
  // first fit.
  Prediction predict(std::span<const double> x) const;

  // Everything after the vote: cache, shadow evaluation, first fit, drift
  // check and retraining (batch) or learn_one (online). position is 1-based.
  void learn(const Instance& inst, ClassIndex own_prediction, std::uint64_t position, std::vector<Event>& events);

  void record_score(ClassIndex truth, ClassIndex predicted) { score_window_.push(truth, predicted); }
  double score() const { return score_window_.f1(); }

  const MemberSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return spec_.id; }
  bool is_batch() const noexcept { return spec_.kind == MemberKind::Batch; }
  bool fitted() const noexcept { return fitted_; }
  bool has_shadow() const noexcept { return shadow_ != nullptr; }
  std::uint64_t drift_count() const noexcept { return drift_count_; }
  std::uint64_t replacement_count() const noexcept { return replacement_count_; }
  std::size_t cache_size() const noexcept { return cache_.size(); }
  const std::deque<Instance>& cache() const noexcept { return cache_; }
  std::size_t first_fit_at() const noexcept { return first_fit_at_; }
  const ShadowComparison& shadow_comparison() const noexcept { return comparison_; }
  std::optional<std::uint64_t> shadow_started_at() const noexcept { return shadow_started_at_; }

 private:
  void learn_batch(const Instance& inst, ClassIndex own_prediction, std::uint64_t position, std::vector<Event>& events);
  std::unique_ptr<BatchClassifier> train(std::span<const Instance> slice) const;

  MemberSpec spec_;
  Schema schema_;
  std::size_t n_comp_;
  std::size_t cache_cap_;
  std::size_t n_trees_;
  ComparisonMetric metric_;
  std::uint64_t seed_;
  std::size_t first_fit_at_;

  std::unique_ptr<OnlineClassifier> online_;
  std::unique_ptr<BatchClassifier> batch_;
  std::unique_ptr<BatchClassifier> shadow_;
  ShadowComparison comparison_;
  std::optional<std::uint64_t> shadow_started_at_;

  bool fitted_ = false;
  std::vector<std::int64_t> label_counts_;  // majority model during warm-up
  std::deque<Instance> cache_;
  std::deque<Instance> recent_;               // last 2s instances after the first fit
  std::deque<ClassIndex> recent_predictions_; // this member's predictions for recent_
  std::uint64_t since_first_fit_ = 0;
  std::uint64_t drift_count_ = 0;
  std::uint64_t replacement_count_ = 0;
  bool dropping_ = false;  // cache cap reached since the last reset
  eval::SlidingWindow score_window_;
};

// One instance's predict phase. Built from x alone, so the label cannot leak
// into it.
struct VoteStep {
  std::vector<ClassIndex> member_predictions;
  std::vector<double> weights;
  ClassIndex final_label = 0;
  std::vector<std::string> warnings;
};

class Ensemble {
 public:
  Ensemble(const Schema& schema, EnsembleConfig config);

  VoteStep predict_phase(std::span<const double> x) const;
  void learn_phase(const VoteStep& step, const Instance& inst);
  // predict_phase followed by learn_phase.
  ClassIndex process_instance(const Instance& inst, VoteStep* step_out = nullptr);

  const std::vector<Member>& members() const noexcept { return members_; }
  const std::vector<Event>& events() const noexcept { return events_; }
  const EnsembleConfig& config() const noexcept { return config_; }
  std::uint64_t processed() const noexcept { return processed_; }
  std::uint64_t drift_count() const;
  std::uint64_t replacement_count() const;

 private:
  Schema schema_;
  EnsembleConfig config_;
  std::vector<Member> members_;
  std::vector<Event> events_;
  std::uint64_t processed_ = 0;
};

}  // namespace iebsm::ensemble
