#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "iebsm/core.hpp"

namespace iebsm::ingest {

struct IngestConfig {
  std::string target_column;
  std::vector<std::string> datetime_columns;  // sort keys, in priority order
  std::vector<std::string> categorical_columns;
  std::vector<std::string> drop_columns;
  std::string missing_category_label = "Don't know / Refuse to answer";
  // strptime-style format for the datetime columns; plain string order when unset.
  std::optional<std::string> datetime_format;
  std::vector<std::string> missing_markers = {"", "?", "NA", "NaN", "nan", "null", "NULL"};
};

struct IngestSummary {
  Schema schema;
  std::size_t rows_written = 0;
  std::size_t rows_without_target = 0;
};

// RFC 4180 style reader: comma separated, double-quoted fields may contain
// commas, quotes ("") and newlines.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}
  // False at end of input.
  bool next(std::vector<std::string>& fields);
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

// Encodes a raw table in memory. Rows are sorted, cleaned and one-hot encoded
// as described by the config.
struct EncodedTable {
  Schema schema;
  std::vector<Instance> instances;
  std::size_t rows_without_target = 0;
};
EncodedTable encode_table(const std::vector<std::string>& header, std::vector<std::vector<std::string>> rows,
                          const IngestConfig& config, const std::vector<FeatureDescriptor>* declared_kinds = nullptr);

IngestSummary preprocess_csv(const std::filesystem::path& raw_path, const IngestConfig& config,
                             const std::filesystem::path& out_path);

// Canonical stream file: a "# iebsm-stream {json}" schema manifest line, a
// CSV header, then one row per instance (features, class label).
class StreamWriter {
 public:
  StreamWriter(const std::filesystem::path& path, const Schema& schema);
  void write(const Instance& inst);
  void close();

 private:
  Schema schema_;
  std::ofstream out_;
};

class StreamReader {
 public:
  explicit StreamReader(const std::filesystem::path& path);

  const Schema& schema() const noexcept { return schema_; }
  // Yields instances in file order with seq = position. False at the end.
  bool next(Instance& inst);

 private:
  std::ifstream in_;
  Schema schema_;
  std::unordered_map<std::string, ClassIndex> labels_;
  std::uint64_t seq_ = 0;
  std::size_t line_ = 0;
};

std::vector<Instance> read_stream(const std::filesystem::path& path, Schema* schema_out = nullptr);
void write_stream(const std::filesystem::path& path, const Schema& schema, const std::vector<Instance>& instances);

bool is_stream_file(const std::filesystem::path& path);

enum class DriftKind { Abrupt, Gradual };

struct SynthConfig {
  std::size_t n_instances = 10000;
  std::size_t n_features = 5;
  std::size_t n_classes = 3;
  std::vector<std::size_t> drift_points;
  DriftKind drift_kind = DriftKind::Abrupt;
  std::size_t gradual_width = 1000;
  std::uint64_t seed = 42;
  double separation = 1.5;  // scale of the class mean coordinates
  double noise = 1.0;       // per-feature standard deviation around a mean

  void validate() const;
};

// Class-conditional Gaussians. At each drift point every feature's
// class-to-mean assignment is re-drawn as a cyclic permutation, so no class
// keeps its old value on any feature.
struct SyntheticStream {
  Schema schema;
  std::vector<Instance> instances;
  // class_means[stage][class * n_features + feature]
  std::vector<std::vector<double>> class_means;
};

SyntheticStream synthesize(const SynthConfig& config);
Schema generate_synthetic(const SynthConfig& config, const std::filesystem::path& out_path);

}  // namespace iebsm::ingest
