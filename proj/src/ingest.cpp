#include "iebsm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace iebsm::ingest {
namespace {

constexpr const char* kManifestPrefix = "# iebsm-stream ";

std::optional<double> parse_number(const std::string& text) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first == last) return std::nullopt;
  if (*first == '+') ++first;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json manifest_json(const Schema& schema) {
  nlohmann::ordered_json j;
  j["target"] = schema.target_name();
  auto features = nlohmann::ordered_json::array();
  for (const auto& f : schema.features()) features.push_back({{"name", f.name}, {"kind", to_string(f.kind)}});
  j["features"] = features;
  j["classes"] = schema.class_labels();
  return j;
}

Schema schema_from_manifest(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<FeatureDescriptor> features;
    for (const auto& f : j.at("features")) {
      features.push_back({f.at("name").get<std::string>(), feature_kind_from_string(f.at("kind").get<std::string>())});
    }
    return Schema(std::move(features), j.at("classes").get<std::vector<std::string>>(),
                  j.at("target").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed stream manifest: ") + e.what());
  }
}

bool is_missing(const std::string& value, const IngestConfig& config) {
  return std::find(config.missing_markers.begin(), config.missing_markers.end(), value) != config.missing_markers.end();
}

bool contains(const std::vector<std::string>& list, const std::string& v) {
  return std::find(list.begin(), list.end(), v) != list.end();
}

// Chronological key for one datetime cell.
std::string datetime_key(const std::string& value, const IngestConfig& config, std::size_t row) {
  if (!config.datetime_format) return value;
  std::tm tm{};
  std::istringstream in(value);
  in >> std::get_time(&tm, config.datetime_format->c_str());
  if (in.fail()) {
    throw IngestError("row " + std::to_string(row) + ": cannot parse datetime '" + value + "' with format '" +
                      *config.datetime_format + "'");
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d%02d%02d%02d%02d%02d", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in_.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line_;
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::istringstream in(line);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) fields.assign(1, "");
  return fields;
}

std::string csv_escape(const std::string& field) {
  const bool needs = field.find_first_of(",\"\n\r") != std::string::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

EncodedTable encode_table(const std::vector<std::string>& header, std::vector<std::vector<std::string>> rows,
                          const IngestConfig& config, const std::vector<FeatureDescriptor>* declared_kinds) {
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto target = column_of(config.target_column);
  if (!target) throw ConfigError("target column '" + config.target_column + "' not found in header");
  if (contains(config.drop_columns, config.target_column)) {
    throw ConfigError("target column '" + config.target_column + "' is listed in drop_columns");
  }
  std::vector<std::size_t> sort_keys;
  for (const auto& name : config.datetime_columns) {
    const auto c = column_of(name);
    if (!c) throw ConfigError("datetime column '" + name + "' not found in header");
    sort_keys.push_back(*c);
  }
  for (const auto& name : config.categorical_columns) {
    if (!column_of(name)) throw ConfigError("categorical column '" + name + "' not found in header");
  }

  EncodedTable table;
  std::vector<std::vector<std::string>> kept;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() != header.size()) {
      throw IngestError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    if (is_missing(row[*target], config)) {
      ++table.rows_without_target;
      continue;
    }
    kept.push_back(std::move(row));
  }
  if (kept.empty()) throw IngestError("no rows left after dropping rows without a target value");

  if (!sort_keys.empty()) {
    std::vector<std::vector<std::string>> keys(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
      for (auto c : sort_keys) keys[r].push_back(datetime_key(kept[r][c], config, r + 1));
    }
    std::vector<std::size_t> order(kept.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<std::vector<std::string>> sorted;
    sorted.reserve(kept.size());
    for (auto i : order) sorted.push_back(std::move(kept[i]));
    kept = std::move(sorted);
  }

  std::map<std::string, FeatureKind> declared;
  if (declared_kinds) {
    for (const auto& f : *declared_kinds) declared[f.name] = f.kind;
  }

  struct OutputColumn {
    std::size_t source;
    bool categorical;
    std::string category;  // one-hot category
    double fill = 0.0;     // numeric imputation value
  };
  std::vector<FeatureDescriptor> features;
  std::vector<OutputColumn> outputs;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (c == *target || contains(config.drop_columns, name) || contains(config.datetime_columns, name)) continue;
    bool categorical = contains(config.categorical_columns, name);
    if (!categorical) {
      for (const auto& row : kept) {
        if (!is_missing(row[c], config) && !parse_number(row[c])) {
          categorical = true;
          break;
        }
      }
    }
    if (categorical) {
      std::set<std::string> categories;
      for (const auto& row : kept) categories.insert(is_missing(row[c], config) ? config.missing_category_label : row[c]);
      for (const auto& cat : categories) {
        features.push_back({name + "=" + cat, FeatureKind::Binary});
        outputs.push_back({c, true, cat, 0.0});
      }
      continue;
    }
    // mode over the whole column, smallest value on ties
    std::map<double, std::size_t> freq;
    bool binary = true;
    for (const auto& row : kept) {
      if (is_missing(row[c], config)) continue;
      const double v = *parse_number(row[c]);
      ++freq[v];
      if (v != 0.0 && v != 1.0) binary = false;
    }
    double mode = 0.0;
    std::size_t best = 0;
    for (const auto& [v, n] : freq) {
      if (n > best) {
        best = n;
        mode = v;
      }
    }
    FeatureKind kind = binary && !freq.empty() ? FeatureKind::Binary : FeatureKind::Numeric;
    if (auto it = declared.find(name); it != declared.end()) kind = it->second;
    features.push_back({name, kind});
    outputs.push_back({c, false, {}, mode});
  }

  std::set<std::string> classes;
  for (const auto& row : kept) classes.insert(row[*target]);
  table.schema = Schema(std::move(features), std::vector<std::string>(classes.begin(), classes.end()), config.target_column);

  table.instances.reserve(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& row = kept[r];
    Instance inst;
    inst.seq = r;
    inst.x.reserve(outputs.size());
    for (const auto& out : outputs) {
      const auto& cell = row[out.source];
      if (out.categorical) {
        const std::string& value = is_missing(cell, config) ? config.missing_category_label : cell;
        inst.x.push_back(value == out.category ? 1.0 : 0.0);
      } else {
        inst.x.push_back(is_missing(cell, config) ? out.fill : *parse_number(cell));
      }
    }
    inst.y = *table.schema.class_index(row[*target]);
    table.instances.push_back(std::move(inst));
  }
  return table;
}

IngestSummary preprocess_csv(const std::filesystem::path& raw_path, const IngestConfig& config,
                             const std::filesystem::path& out_path) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + raw_path.string() + "'");
  std::optional<Schema> manifest;
  // a canonical stream file carries its manifest on the first line
  if (in.peek() == '#') {
    std::string first;
    std::getline(in, first);
    if (first.rfind(kManifestPrefix, 0) == 0) manifest = schema_from_manifest(first.substr(std::string(kManifestPrefix).size()));
  }
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw IngestError("'" + raw_path.string() + "' has no header row");
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    rows.push_back(fields);
  }
  const auto table = encode_table(header, std::move(rows), config, manifest ? &manifest->features() : nullptr);
  write_stream(out_path, table.schema, table.instances);
  return {table.schema, table.instances.size(), table.rows_without_target};
}

StreamWriter::StreamWriter(const std::filesystem::path& path, const Schema& schema)
    : schema_(schema), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IngestError("cannot write '" + path.string() + "'");
  out_ << kManifestPrefix << manifest_json(schema_).dump() << '\n';
  for (const auto& f : schema_.features()) out_ << csv_escape(f.name) << ',';
  out_ << csv_escape(schema_.target_name()) << '\n';
}

void StreamWriter::write(const Instance& inst) {
  if (inst.x.size() != schema_.n_features()) throw SchemaError("instance does not match stream schema");
  if (inst.y >= schema_.n_classes()) throw SchemaError("instance class outside catalogue");
  std::string line;
  for (double v : inst.x) {
    line += format_number(v);
    line += ',';
  }
  line += csv_escape(schema_.class_labels()[inst.y]);
  line += '\n';
  out_ << line;
}

void StreamWriter::close() {
  out_.flush();
  if (!out_) throw IngestError("failed writing stream file");
  out_.close();
}

StreamReader::StreamReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw DecodeError("cannot open stream file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in_, line) || line.rfind(kManifestPrefix, 0) != 0) {
    throw DecodeError("'" + path.string() + "' is not a stream file (missing manifest line)");
  }
  schema_ = schema_from_manifest(line.substr(std::string(kManifestPrefix).size()));
  for (std::size_t c = 0; c < schema_.n_classes(); ++c) labels_.emplace(schema_.class_labels()[c], c);
  if (!std::getline(in_, line)) throw DecodeError("stream file is missing its header row");
  line_ = 2;
}

bool StreamReader::next(Instance& inst) {
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  const auto fields = split_csv_line(line);
  const std::size_t d = schema_.n_features();
  if (fields.size() != d + 1) {
    throw DecodeError("line " + std::to_string(line_) + ": expected " + std::to_string(d + 1) + " fields, got " +
                      std::to_string(fields.size()));
  }
  inst.x.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    const auto v = parse_number(fields[f]);
    if (!v) throw DecodeError("line " + std::to_string(line_) + ": bad number '" + fields[f] + "'");
    inst.x[f] = *v;
  }
  const auto it = labels_.find(fields[d]);
  if (it == labels_.end()) throw DecodeError("line " + std::to_string(line_) + ": unknown class '" + fields[d] + "'");
  inst.y = it->second;
  inst.seq = seq_++;
  return true;
}

std::vector<Instance> read_stream(const std::filesystem::path& path, Schema* schema_out) {
  StreamReader reader(path);
  std::vector<Instance> out;
  Instance inst;
  while (reader.next(inst)) out.push_back(inst);
  if (schema_out) *schema_out = reader.schema();
  return out;
}

void write_stream(const std::filesystem::path& path, const Schema& schema, const std::vector<Instance>& instances) {
  StreamWriter writer(path, schema);
  for (const auto& inst : instances) writer.write(inst);
  writer.close();
}

bool is_stream_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  return in && std::getline(in, line) && line.rfind(kManifestPrefix, 0) == 0;
}

void SynthConfig::validate() const {
  if (n_classes < 2) throw ConfigError("synthetic stream needs at least 2 classes");
  if (n_features < 1) throw ConfigError("synthetic stream needs at least 1 feature");
  for (std::size_t i = 0; i < drift_points.size(); ++i) {
    if (drift_points[i] >= n_instances) throw ConfigError("drift point beyond the end of the stream");
    if (i > 0 && drift_points[i] <= drift_points[i - 1]) throw ConfigError("drift points must be strictly increasing");
  }
  if (drift_kind == DriftKind::Gradual && gradual_width == 0) throw ConfigError("gradual drift width must be >= 1");
}

SyntheticStream synthesize(const SynthConfig& config) {
  config.validate();
  const std::size_t k = config.n_classes;
  const std::size_t d = config.n_features;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> vertices(k * d);
  for (auto& v : vertices) v = config.separation * normal(rng);

  // assignment[stage][f][c] = vertex whose f-th coordinate class c uses
  std::vector<std::vector<std::vector<std::size_t>>> assignment;
  std::vector<std::vector<std::size_t>> identity(d, std::vector<std::size_t>(k));
  for (auto& a : identity) std::iota(a.begin(), a.end(), 0);
  assignment.push_back(identity);
  for (std::size_t p = 0; p < config.drift_points.size(); ++p) {
    auto next = assignment.back();
    for (std::size_t f = 0; f < d; ++f) {
      // Sattolo: uniform cyclic permutation, hence a derangement
      std::vector<std::size_t> cycle(k);
      std::iota(cycle.begin(), cycle.end(), 0);
      for (std::size_t i = k - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(cycle[i], cycle[pick(rng)]);
      }
      const auto prev = next[f];
      for (std::size_t c = 0; c < k; ++c) next[f][c] = prev[cycle[c]];
    }
    assignment.push_back(std::move(next));
  }

  SyntheticStream out;
  for (const auto& stage : assignment) {
    std::vector<double> means(k * d);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t f = 0; f < d; ++f) means[c * d + f] = vertices[stage[f][c] * d + f];
    }
    out.class_means.push_back(std::move(means));
  }

  std::vector<FeatureDescriptor> features;
  for (std::size_t f = 0; f < d; ++f) features.push_back({"x" + std::to_string(f), FeatureKind::Numeric});
  std::vector<std::string> classes;
  for (std::size_t c = 0; c < k; ++c) classes.push_back("c" + std::to_string(c));
  out.schema = Schema(std::move(features), std::move(classes), "class");

  std::uniform_int_distribution<std::size_t> pick_class(0, k - 1);
  out.instances.reserve(config.n_instances);
  std::size_t stage = 0;
  for (std::size_t t = 0; t < config.n_instances; ++t) {
    while (stage < config.drift_points.size() && config.drift_points[stage] <= t) ++stage;
    Instance inst;
    inst.seq = t;
    inst.y = pick_class(rng);
    inst.x.resize(d);
    const auto& now = out.class_means[stage];
    double blend = 1.0;
    if (config.drift_kind == DriftKind::Gradual && stage > 0) {
      const double since = static_cast<double>(t - config.drift_points[stage - 1] + 1);
      blend = std::min(1.0, since / static_cast<double>(config.gradual_width));
    }
    for (std::size_t f = 0; f < d; ++f) {
      double mean = now[inst.y * d + f];
      if (blend < 1.0) mean = blend * mean + (1.0 - blend) * out.class_means[stage - 1][inst.y * d + f];
      inst.x[f] = mean + config.noise * normal(rng);
    }
    out.instances.push_back(std::move(inst));
  }
  return out;
}

Schema generate_synthetic(const SynthConfig& config, const std::filesystem::path& out_path) {
  auto stream = synthesize(config);
  write_stream(out_path, stream.schema, stream.instances);
  return stream.schema;
}

}  // namespace iebsm::ingest
