#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "iebsm/experiment.hpp"
#include "iebsm/ingest.hpp"

namespace fs = std::filesystem;
using namespace iebsm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void refuse_existing(const fs::path& out, bool force) {
  if (fs::exists(out) && !force) {
    throw ConfigError("output '" + out.string() + "' already exists (use --force to overwrite)");
  }
}

struct Options {
  std::string config;
  std::string out;
  std::string input;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool quiet = false;
};

int cmd_preprocess(const Options& o) {
  if (o.config.empty()) throw ConfigError("preprocess needs --config");
  if (o.out.empty()) throw ConfigError("preprocess needs --out");
  auto job = experiment::parse_preprocess_config(read_json(o.config), fs::path(o.config).parent_path());
  if (!o.input.empty()) job.input = o.input;
  if (!job.input) throw ConfigError("no input file (pass it as an argument or set 'input' in the config)");
  if (!fs::exists(*job.input)) throw IngestError("input '" + job.input->string() + "' does not exist");
  if (fs::exists(o.out) && fs::equivalent(*job.input, o.out)) throw ConfigError("output would overwrite the input");
  refuse_existing(o.out, o.force);
  const auto summary = ingest::preprocess_csv(*job.input, job.ingest, o.out);
  if (!o.quiet) {
    std::cout << "rows " << summary.rows_written << ", features " << summary.schema.n_features() << ", classes "
              << summary.schema.n_classes() << " (dropped " << summary.rows_without_target
              << " rows without target) -> " << o.out << '\n';
  }
  return kExitOk;
}

int cmd_generate(const Options& o) {
  if (o.out.empty()) throw ConfigError("generate needs --out");
  ingest::SynthConfig config;
  if (!o.config.empty()) {
    auto j = read_json(o.config);
    if (j.contains("stream") && j["stream"].is_object() && j["stream"].contains("synthetic")) j = j["stream"]["synthetic"];
    else if (j.contains("synthetic")) j = j["synthetic"];
    config = experiment::parse_synth_config(j);
  }
  if (o.seed) config.seed = *o.seed;
  refuse_existing(o.out, o.force);
  const auto schema = ingest::generate_synthetic(config, o.out);
  if (!o.quiet) {
    std::cout << "rows " << config.n_instances << ", features " << schema.n_features() << ", classes "
              << schema.n_classes() << " -> " << o.out << '\n';
  }
  return kExitOk;
}

int cmd_run(const Options& o) {
  if (o.config.empty()) throw ConfigError("run needs --config");
  auto config = experiment::load_experiment_config(o.config);
  if (o.seed) config.seed = *o.seed;
  if (!o.out.empty()) config.output_dir = o.out;
  config.validate();
  if (config.stream_path && !fs::exists(*config.stream_path)) {
    throw IngestError("stream '" + config.stream_path->string() + "' does not exist");
  }
  const auto result = experiment::run_experiment(config);
  const auto dir = config.output_dir / experiment::run_directory_name(result.report);
  refuse_existing(dir / "report.jsonl", o.force);
  experiment::write_run_outputs(dir, result);
  if (!o.quiet) {
    std::printf("%s: F1 macro %.4f, drifts %llu, replacements %llu, %.1f s -> %s\n", result.report.run_id.c_str(),
                result.report.final_f1, static_cast<unsigned long long>(result.report.drift_count),
                static_cast<unsigned long long>(result.report.replacement_count), result.wall_seconds,
                dir.string().c_str());
  }
  return kExitOk;
}

int cmd_report(const Options& o) {
  if (o.input.empty()) throw ConfigError("report needs a reports directory");
  const auto runs = experiment::load_reports(o.input);
  const auto summary = experiment::summarize_reports(runs);
  if (!o.quiet) {
    std::printf("%-4s %-20s %s\n", "pos", "method", "ranking_score");
    for (const auto& row : summary.ranking) {
      std::printf("%-4zu %-20s %.2f\n", row.position, row.method.c_str(), row.ranking_score);
    }
  }
  if (!o.out.empty()) {
    const fs::path out = o.out;
    fs::create_directories(out);
    refuse_existing(out / "ranking.csv", o.force);
    refuse_existing(out / "traces.csv", o.force);
    experiment::write_ranking_csv(out / "ranking.csv", summary);
    experiment::write_merged_traces(out / "traces.csv", runs);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-aware ensembles of batch and online stream classifiers"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--force", o.force, "Overwrite existing outputs");
    sub->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
  };

  auto* pre = app.add_subcommand("preprocess", "Clean and encode a raw CSV into a stream file");
  pre->add_option("input", o.input, "Raw CSV (overrides 'input' in the config)");
  pre->add_option("--config", o.config, "Preprocessing config (JSON)")->required();
  pre->add_option("--out", o.out, "Stream file to write")->required();
  add_common(pre);

  auto* gen = app.add_subcommand("generate", "Write a synthetic drifting stream");
  gen->add_option("--config", o.config, "Synthetic stream spec (JSON)");
  gen->add_option("--out", o.out, "Stream file to write")->required();
  gen->add_option("--seed", o.seed, "Generator seed");
  add_common(gen);

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("--config", o.config, "Experiment config (JSON)")->required();
  run->add_option("--out", o.out, "Output root (one directory per run is created inside)");
  run->add_option("--seed", o.seed, "Override the config seed");
  add_common(run);

  auto* rep = app.add_subcommand("report", "Rank methods over a directory of run reports");
  rep->add_option("reports", o.input, "Directory searched for report.jsonl files")->required();
  rep->add_option("--out", o.out, "Directory for ranking.csv and traces.csv");
  add_common(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*pre) return cmd_preprocess(o);
    if (*gen) return cmd_generate(o);
    if (*run) return cmd_run(o);
    if (*rep) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
