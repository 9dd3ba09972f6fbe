#include "iebsm/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "iebsm/drift.hpp"

namespace iebsm::experiment {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string online_name(learners::OnlineKind kind) { return learners::short_name(kind); }

std::string default_method_id(const MethodSpec& m) {
  switch (m.type) {
    case MethodType::Online:
      return online_name(m.online);
    case MethodType::Batch:
      return learners::short_name(m.batch) + " " + m.strategy;
    case MethodType::Iebsm: {
      const std::string prefix = ensemble::to_string(m.combiner) + "-";
      if (m.variant == IebsmVariant::OnlineOnly) return prefix + "ONLINE";
      if (m.variant == IebsmVariant::BatchOnly) return prefix + "BATCH";
      return prefix + learners::short_name(m.batch);
    }
  }
  throw InternalError("unknown method type");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

void read_overrides(const json& j, Overrides& o) {
  if (auto v = get_opt<double>(j, "theta")) o.theta = v;
  if (auto v = get_opt<std::size_t>(j, "window_s")) o.window_s = v;
  if (auto v = get_opt<std::size_t>(j, "s")) o.window_s = v;
  if (auto v = get_opt<double>(j, "alpha")) o.alpha = v;
  if (auto v = get_opt<std::size_t>(j, "n_first_fit")) o.n_first_fit = v;
  if (auto v = get_opt<std::size_t>(j, "n_comp")) o.n_comp = v;
}

void check_strategy(const std::string& id) {
  const auto catalog = drift::make_strategy_catalog();
  if (!catalog.count(id)) throw ConfigError("unknown drift strategy '" + id + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) { return ingest::csv_escape(s); }

}  // namespace

MethodSpec parse_method_shorthand(const std::string& raw) {
  const std::string text = upper(trim(raw));
  if (text.empty()) throw ConfigError("empty method name");
  MethodSpec m;
  // "<combiner>-<rest>"
  if (text.rfind("DS-", 0) == 0 || text.rfind("WV-", 0) == 0) {
    m.type = MethodType::Iebsm;
    m.combiner = ensemble::parse_combiner(text.substr(0, 2));
    std::string rest = text.substr(3);
    if (rest == "ONLINE") {
      m.variant = IebsmVariant::OnlineOnly;
    } else if (rest.rfind("BATCH", 0) == 0) {
      m.variant = IebsmVariant::BatchOnly;
      if (rest.size() > 5) {
        if (rest[5] != '-') throw ConfigError("unknown method '" + raw + "'");
        m.batch = learners::parse_batch_kind(rest.substr(6));
      }
    } else {
      m.batch = learners::parse_batch_kind(rest);
    }
    m.id = text;
    return m;
  }
  // "<batch learner> <strategy>" or "<batch learner>-<strategy>"
  const auto sep = text.find_first_of(" -");
  if (sep != std::string::npos) {
    m.type = MethodType::Batch;
    m.batch = learners::parse_batch_kind(text.substr(0, sep));
    m.strategy = trim(text.substr(sep + 1));
    check_strategy(m.strategy);
    m.id = default_method_id(m);
    return m;
  }
  m.type = MethodType::Online;
  m.online = learners::parse_online_kind(text);
  m.id = text;
  return m;
}

MethodSpec parse_method(const json& j) {
  if (j.is_string()) return parse_method_shorthand(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("method must be a string or an object");
  MethodSpec m;
  if (j.contains("name")) m = parse_method_shorthand(get_or<std::string>(j, "name", ""));
  if (j.contains("type")) {
    const auto type = upper(get_or<std::string>(j, "type", ""));
    if (type == "ONLINE") m.type = MethodType::Online;
    else if (type == "BATCH") m.type = MethodType::Batch;
    else if (type == "IEBSM" || type == "ENSEMBLE") m.type = MethodType::Iebsm;
    else throw ConfigError("unknown method type '" + type + "'");
  }
  try {
    if (m.type == MethodType::Online) {
      if (j.contains("learner")) m.online = learners::parse_online_kind(j.at("learner").get<std::string>());
    } else {
      if (j.contains("learner")) m.batch = learners::parse_batch_kind(j.at("learner").get<std::string>());
      if (j.contains("batch")) m.batch = learners::parse_batch_kind(j.at("batch").get<std::string>());
    }
    if (j.contains("strategy")) m.strategy = upper(j.at("strategy").get<std::string>());
    if (j.contains("strategies")) {
      m.strategies.clear();
      for (const auto& s : j.at("strategies")) m.strategies.push_back(upper(s.get<std::string>()));
    }
    if (j.contains("online")) {
      m.online_members.clear();
      for (const auto& s : j.at("online")) m.online_members.push_back(learners::parse_online_kind(s.get<std::string>()));
    }
    if (j.contains("combiner")) m.combiner = ensemble::parse_combiner(upper(j.at("combiner").get<std::string>()));
    if (j.contains("variant")) {
      const auto v = upper(j.at("variant").get<std::string>());
      if (v == "FULL") m.variant = IebsmVariant::Full;
      else if (v == "BATCH") m.variant = IebsmVariant::BatchOnly;
      else if (v == "ONLINE") m.variant = IebsmVariant::OnlineOnly;
      else throw ConfigError("unknown ensemble variant '" + v + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed method: ") + e.what());
  }
  read_overrides(j, m.overrides);
  if (j.contains("overrides")) read_overrides(j.at("overrides"), m.overrides);
  m.id = j.contains("id") ? get_or<std::string>(j, "id", "") : default_method_id(m);
  if (m.type == MethodType::Batch) check_strategy(m.strategy);
  if (m.type == MethodType::Iebsm) {
    for (const auto& s : m.strategies) check_strategy(s);
  }
  return m;
}

ordered_json method_to_json(const MethodSpec& m) {
  ordered_json j;
  j["id"] = m.id;
  switch (m.type) {
    case MethodType::Online:
      j["type"] = "online";
      j["learner"] = online_name(m.online);
      break;
    case MethodType::Batch:
      j["type"] = "batch";
      j["learner"] = learners::short_name(m.batch);
      j["strategy"] = m.strategy;
      break;
    case MethodType::Iebsm: {
      j["type"] = "iebsm";
      j["combiner"] = ensemble::to_string(m.combiner);
      j["variant"] = m.variant == IebsmVariant::Full ? "full" : m.variant == IebsmVariant::BatchOnly ? "batch" : "online";
      j["batch"] = learners::short_name(m.batch);
      j["strategies"] = m.strategies;
      auto online = ordered_json::array();
      for (auto k : m.online_members) online.push_back(online_name(k));
      j["online"] = online;
      break;
    }
  }
  const auto& o = m.overrides;
  if (o.theta) j["theta"] = *o.theta;
  if (o.window_s) j["window_s"] = *o.window_s;
  if (o.alpha) j["alpha"] = *o.alpha;
  if (o.n_first_fit) j["n_first_fit"] = *o.n_first_fit;
  if (o.n_comp) j["n_comp"] = *o.n_comp;
  return j;
}

PreprocessJob parse_preprocess_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("preprocess config must be a JSON object");
  PreprocessJob job;
  auto& c = job.ingest;
  c.target_column = get_or<std::string>(j, "target", "");
  if (c.target_column.empty()) throw ConfigError("preprocess config needs a 'target' column");
  c.datetime_columns = get_or<std::vector<std::string>>(j, "datetime_columns", {});
  c.categorical_columns = get_or<std::vector<std::string>>(j, "categorical_columns", {});
  c.drop_columns = get_or<std::vector<std::string>>(j, "drop_columns", {});
  c.missing_category_label = get_or<std::string>(j, "missing_category_label", c.missing_category_label);
  c.datetime_format = get_opt<std::string>(j, "datetime_format");
  c.missing_markers = get_or<std::vector<std::string>>(j, "missing_markers", c.missing_markers);
  if (auto in = get_opt<std::string>(j, "input")) {
    std::filesystem::path p = *in;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    job.input = p;
  }
  return job;
}

ingest::SynthConfig parse_synth_config(const json& j) {
  if (!j.is_object()) throw ConfigError("synthetic stream spec must be an object");
  ingest::SynthConfig c;
  c.n_instances = get_or<std::size_t>(j, "n_instances", c.n_instances);
  c.n_features = get_or<std::size_t>(j, "n_features", c.n_features);
  c.n_classes = get_or<std::size_t>(j, "n_classes", c.n_classes);
  c.drift_points = get_or<std::vector<std::size_t>>(j, "drift_points", c.drift_points);
  const auto kind = upper(get_or<std::string>(j, "drift_kind", "abrupt"));
  if (kind == "ABRUPT") c.drift_kind = ingest::DriftKind::Abrupt;
  else if (kind == "GRADUAL") c.drift_kind = ingest::DriftKind::Gradual;
  else throw ConfigError("unknown drift kind '" + kind + "'");
  c.gradual_width = get_or<std::size_t>(j, "gradual_width", c.gradual_width);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.separation = get_or<double>(j, "separation", c.separation);
  c.noise = get_or<double>(j, "noise", c.noise);
  c.validate();
  return c;
}

ordered_json synth_to_json(const ingest::SynthConfig& c) {
  ordered_json j;
  j["n_instances"] = c.n_instances;
  j["n_features"] = c.n_features;
  j["n_classes"] = c.n_classes;
  j["drift_points"] = c.drift_points;
  j["drift_kind"] = c.drift_kind == ingest::DriftKind::Abrupt ? "abrupt" : "gradual";
  j["gradual_width"] = c.gradual_width;
  j["seed"] = c.seed;
  j["separation"] = c.separation;
  j["noise"] = c.noise;
  return j;
}

void ExperimentConfig::validate() const {
  if (stream_path.has_value() == synthetic.has_value()) {
    throw ConfigError("config needs exactly one of a stream path or a synthetic spec");
  }
  if (synthetic) synthetic->validate();
  if (score_window == 0) throw ConfigError("score_window must be >= 1");
  if (n_trees == 0) throw ConfigError("n_trees must be >= 1");
  build_ensemble_config(*this).validate();
}

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("stream")) throw ConfigError("config is missing 'stream'");
  const auto& stream = j.at("stream");
  if (stream.is_string()) {
    std::filesystem::path p = stream.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.stream_path = p;
    c.stream_id = p.stem().string();
  } else if (stream.is_object() && stream.contains("synthetic")) {
    c.synthetic = parse_synth_config(stream.at("synthetic"));
    c.stream_id = "synthetic";
  } else if (stream.is_object() && stream.contains("path")) {
    std::filesystem::path p = get_or<std::string>(stream, "path", "");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.stream_path = p;
    c.stream_id = p.stem().string();
  } else {
    throw ConfigError("'stream' must be a path or {\"synthetic\": {...}}");
  }
  c.stream_id = get_or<std::string>(j, "stream_id", c.stream_id);
  if (!j.contains("method")) throw ConfigError("config is missing 'method'");
  c.method = parse_method(j.at("method"));
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (auto out = get_opt<std::string>(j, "output")) {
    std::filesystem::path p = *out;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.output_dir = p;
  }
  c.score_window = get_or<std::size_t>(j, "score_window", c.score_window);
  c.n_trees = get_or<std::size_t>(j, "n_trees", c.n_trees);
  // top-level overrides apply to the method as well
  read_overrides(j, c.method.overrides);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

ordered_json experiment_to_json(const ExperimentConfig& c) {
  ordered_json j;
  if (c.stream_path) j["stream"] = c.stream_path->generic_string();
  else j["stream"] = {{"synthetic", synth_to_json(*c.synthetic)}};
  j["stream_id"] = c.stream_id;
  j["method"] = method_to_json(c.method);
  j["seed"] = c.seed;
  j["score_window"] = c.score_window;
  j["n_trees"] = c.n_trees;
  return j;
}

std::string config_digest(const ExperimentConfig& config) {
  const std::string text = experiment_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ensemble::EnsembleConfig build_ensemble_config(const ExperimentConfig& config) {
  const auto& m = config.method;
  ensemble::EnsembleConfig ec;
  ec.seed = config.seed;
  ec.score_window = config.score_window;
  ec.n_trees = config.n_trees;
  if (m.overrides.n_first_fit) ec.n_first_fit = *m.overrides.n_first_fit;
  if (m.overrides.n_comp) ec.n_comp = *m.overrides.n_comp;
  ec.combiner = m.combiner;

  auto strategy = [&](const std::string& id) {
    auto s = drift::strategy_by_id(id);
    if (!s.train_once) {
      if (m.overrides.theta) s.theta = *m.overrides.theta;
      if (m.overrides.window_s) s.window_s = *m.overrides.window_s;
      if (m.overrides.alpha) s.alpha = *m.overrides.alpha;
    }
    return s;
  };
  auto batch_member = [&](const std::string& id) {
    ensemble::MemberSpec spec;
    spec.kind = ensemble::MemberKind::Batch;
    spec.batch = m.batch;
    spec.strategy = strategy(id);
    spec.id = learners::short_name(m.batch) + " " + id;
    return spec;
  };
  auto online_member = [](learners::OnlineKind kind) {
    ensemble::MemberSpec spec;
    spec.kind = ensemble::MemberKind::Online;
    spec.online = kind;
    spec.id = learners::short_name(kind);
    return spec;
  };

  switch (m.type) {
    case MethodType::Online:
      ec.members.push_back(online_member(m.online));
      break;
    case MethodType::Batch:
      ec.members.push_back(batch_member(m.strategy));
      break;
    case MethodType::Iebsm:
      if (m.variant != IebsmVariant::OnlineOnly) {
        for (const auto& s : m.strategies) ec.members.push_back(batch_member(s));
      }
      if (m.variant != IebsmVariant::BatchOnly) {
        for (auto k : m.online_members) ec.members.push_back(online_member(k));
      }
      break;
  }
  if (ec.members.empty()) throw ConfigError("method '" + m.id + "' has no members");
  return ec;
}

RunResult run_on_instances(const ExperimentConfig& config, const Schema& schema,
                           const std::vector<Instance>& instances) {
  const auto start = std::chrono::steady_clock::now();
  ensemble::Ensemble ens(schema, build_ensemble_config(config));
  eval::Prequential preq(schema.n_classes());
  for (const auto& inst : instances) {
    const auto predicted = ens.process_instance(inst);
    preq.update(inst.y, predicted);
  }

  RunResult result;
  auto& r = result.report;
  r.stream_id = config.stream_id;
  r.method_id = config.method.id;
  r.seed = config.seed;
  r.config_digest = config_digest(config);
  r.run_id = r.method_id + "@" + r.stream_id + "#" + std::to_string(r.seed) + "-" + r.config_digest.substr(0, 8);
  r.n_instances = instances.size();
  r.final_f1 = instances.empty() ? 0.0 : preq.cumulative_f1();
  for (const auto& p : preq.trace()) r.windowed_trace.push_back(p.windowed_f1);
  r.drift_count = ens.drift_count();
  r.replacement_count = ens.replacement_count();
  result.trace = preq.trace();
  result.events = ens.events();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.synthetic) {
    const auto stream = ingest::synthesize(*config.synthetic);
    return run_on_instances(config, stream.schema, stream.instances);
  }
  Schema schema;
  const auto instances = ingest::read_stream(*config.stream_path, &schema);
  return run_on_instances(config, schema, instances);
}

std::string run_directory_name(const eval::RunReport& report) {
  std::string name = report.method_id + "__" + report.stream_id + "__seed" + std::to_string(report.seed) + "__" +
                     report.config_digest.substr(0, 8);
  for (auto& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return name;
}

void write_run_outputs(const std::filesystem::path& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("report.jsonl");
    out << eval::serialize_report(result.report) << '\n';
  }
  {
    auto out = open("trace.csv");
    out << "seq,windowed_f1,cumulative_f1\n";
    for (const auto& p : result.trace) {
      out << p.seq << ',' << format_double(p.windowed_f1) << ',' << format_double(p.cumulative_f1) << '\n';
    }
  }
  {
    auto out = open("events.csv");
    out << "seq,member,event,trigger_source,score\n";
    for (const auto& e : result.events) {
      if (e.kind != ensemble::EventKind::Drift && e.kind != ensemble::EventKind::Replace) continue;
      out << e.seq << ',' << csv_field(e.member) << ',' << ensemble::to_string(e.kind) << ',' << csv_field(e.source)
          << ',' << csv_field(e.score) << '\n';
    }
  }
  {
    auto out = open("timing.json");
    ordered_json j;
    j["run_id"] = result.report.run_id;
    j["wall_seconds"] = result.wall_seconds;
    out << j.dump() << '\n';
  }
}

std::vector<LoadedRun> load_reports(const std::filesystem::path& root) {
  if (!std::filesystem::exists(root)) throw ConfigError("report directory '" + root.string() + "' does not exist");
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_regular_file(root)) {
    files.push_back(root);
  } else {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().filename() == "report.jsonl") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<LoadedRun> runs;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      runs.push_back({eval::parse_report(line), f.parent_path()});
    }
  }
  return runs;
}

ReportSummary summarize_reports(const std::vector<LoadedRun>& runs) {
  if (runs.empty()) throw RankingError("no run reports found");
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> cells;
  std::set<std::string> methods, streams;
  for (const auto& run : runs) {
    auto& cell = cells[{run.report.stream_id, run.report.method_id}];
    cell.first += run.report.final_f1;
    ++cell.second;
    methods.insert(run.report.method_id);
    streams.insert(run.report.stream_id);
  }
  std::map<std::string, std::vector<eval::MethodScore>> per_stream;
  for (const auto& s : streams) per_stream[s];
  for (const auto& [key, cell] : cells) {
    per_stream[key.first].push_back({key.second, cell.first / static_cast<double>(cell.second)});
  }
  ReportSummary summary;
  summary.ranking = eval::rank_methods(per_stream);
  summary.methods.assign(methods.begin(), methods.end());
  summary.streams.assign(streams.begin(), streams.end());
  return summary;
}

void write_ranking_csv(const std::filesystem::path& path, const ReportSummary& summary) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << "method,ranking_score,position\n";
  for (const auto& row : summary.ranking) {
    out << csv_field(row.method) << ',' << format_double(row.ranking_score) << ',' << row.position << '\n';
  }
}

void write_merged_traces(const std::filesystem::path& path, const std::vector<LoadedRun>& runs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << "method,stream,run_id,seq,windowed_f1,cumulative_f1\n";
  for (const auto& run : runs) {
    std::ifstream in(run.dir / "trace.csv");
    if (!in) continue;
    std::string line;
    std::getline(in, line);  // header
    const std::string prefix = csv_field(run.report.method_id) + ',' + csv_field(run.report.stream_id) + ',' +
                               csv_field(run.report.run_id) + ',';
    while (std::getline(in, line)) {
      if (!line.empty()) out << prefix << line << '\n';
    }
  }
}

}  // namespace iebsm::experiment
