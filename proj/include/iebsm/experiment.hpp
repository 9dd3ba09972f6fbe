#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "iebsm/ensemble.hpp"
#include "iebsm/eval.hpp"
#include "iebsm/ingest.hpp"
#include "iebsm/learners/factory.hpp"

namespace iebsm::experiment {

enum class MethodType { Online, Batch, Iebsm };

// Which members an IEBSM ensemble gets.
enum class IebsmVariant { Full, BatchOnly, OnlineOnly };

struct Overrides {
  std::optional<double> theta;
  std::optional<std::size_t> window_s;
  std::optional<double> alpha;
  std::optional<std::size_t> n_first_fit;
  std::optional<std::size_t> n_comp;
};

struct MethodSpec {
  MethodType type = MethodType::Iebsm;
  std::string id;  // display name used for ranking, e.g. "DS-RF", "RF S3", "HT"
  learners::OnlineKind online = learners::OnlineKind::GaussianNB;   // Online
  learners::BatchKind batch = learners::BatchKind::RandomForest;    // Batch, Iebsm
  std::string strategy = "B1";                                       // Batch
  std::vector<std::string> strategies = {"S4", "S5", "S6", "S7"};  // Iebsm
  std::vector<learners::OnlineKind> online_members = {learners::OnlineKind::GaussianNB,
                                                      learners::OnlineKind::HoeffdingTree,
                                                      learners::OnlineKind::LogisticRegression};
  ensemble::Combiner combiner = ensemble::Combiner::DynamicSwitching;
  IebsmVariant variant = IebsmVariant::Full;
  Overrides overrides;
};

// "DS-RF", "WV-NB", "DS-BATCH", "DS-BATCH-DT", "DS-ONLINE", "RF S3", "RF-B1",
// "HT", "ONB", "OLR".
MethodSpec parse_method_shorthand(const std::string& text);
MethodSpec parse_method(const nlohmann::json& j);
nlohmann::ordered_json method_to_json(const MethodSpec& method);

struct ExperimentConfig {
  std::optional<std::filesystem::path> stream_path;
  std::optional<ingest::SynthConfig> synthetic;
  std::string stream_id;
  MethodSpec method;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "runs";
  std::size_t score_window = 500;
  std::size_t n_trees = 100;

  void validate() const;
};

// Preprocessing config: target, datetime_columns, categorical_columns,
// drop_columns, missing_category_label, datetime_format, missing_markers and
// an optional input path.
struct PreprocessJob {
  ingest::IngestConfig ingest;
  std::optional<std::filesystem::path> input;
};
PreprocessJob parse_preprocess_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

ingest::SynthConfig parse_synth_config(const nlohmann::json& j);
nlohmann::ordered_json synth_to_json(const ingest::SynthConfig& config);

// Relative stream paths resolve against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Everything that determines the run's output (not the output directory).
nlohmann::ordered_json experiment_to_json(const ExperimentConfig& config);
// FNV-1a 64 over the canonical JSON, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

ensemble::EnsembleConfig build_ensemble_config(const ExperimentConfig& config);

struct RunResult {
  eval::RunReport report;
  std::vector<eval::Prequential::TracePoint> trace;
  std::vector<ensemble::Event> events;
  double wall_seconds = 0.0;
};

RunResult run_experiment(const ExperimentConfig& config);
RunResult run_on_instances(const ExperimentConfig& config, const Schema& schema,
                           const std::vector<Instance>& instances);

std::string run_directory_name(const eval::RunReport& report);
// Writes report.jsonl, trace.csv, events.csv and timing.json into dir.
void write_run_outputs(const std::filesystem::path& dir, const RunResult& result);

struct LoadedRun {
  eval::RunReport report;
  std::filesystem::path dir;
};
// Every report.jsonl below root (each line one report).
std::vector<LoadedRun> load_reports(const std::filesystem::path& root);

struct ReportSummary {
  std::vector<eval::RankingRow> ranking;
  std::vector<std::string> methods;
  std::vector<std::string> streams;
};
// Averages final F1 over repeated runs of the same (method, stream) cell and
// ranks. Missing cells raise RankingError naming each of them.
ReportSummary summarize_reports(const std::vector<LoadedRun>& runs);
void write_ranking_csv(const std::filesystem::path& path, const ReportSummary& summary);
// Concatenates per-run trace.csv files: method, stream, run_id, seq, windowed_f1, cumulative_f1.
void write_merged_traces(const std::filesystem::path& path, const std::vector<LoadedRun>& runs);

}  // namespace iebsm::experiment
