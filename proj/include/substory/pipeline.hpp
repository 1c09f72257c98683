#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "substory/clustering.hpp"
#include "substory/corpus.hpp"
#include "substory/eval.hpp"
#include "substory/hdp.hpp"
#include "substory/lsh.hpp"
#include "substory/spectral.hpp"

namespace substory::pipeline {

enum class Method { hdp, sc, lsh, thread_baseline };
enum class Mode { all_tweets, source_only, source_then_propagate };

std::string to_string(Method method);
std::string to_string(Mode mode);
Method method_from_string(const std::string& name);
Mode mode_from_string(const std::string& name);

struct RunConfig {
  std::string input_path;
  Method method = Method::hdp;
  Mode mode = Mode::all_tweets;
  std::string out_dir;  // empty -> no artifacts written
  std::uint64_t seed = 0;

  PreprocessOptions preprocess_options;
  hdp::HdpConfig hdp_config;
  spectral::SpectralConfig sc_config;
  lsh::LshConfig lsh_config;

  std::int64_t bucket_seconds = 3600;  // temporal-profile bucket width
  std::size_t partition_size = 0;      // > 0: run per contiguous-time partition
  std::string label;                   // row label in comparisons

  // compact method-parameter description used in reports
  std::string params_string() const;
};

struct MetricsReport {
  double p_micro = 0.0;
  double r_micro = 0.0;
  double f_micro = 0.0;
  double ami = 0.0;
  double nmi = 0.0;
  double mi = 0.0;
  std::size_t n_clusters = 0;
  eval::AlignmentReport alignment;
};

struct RunResult {
  Clustering clustering;
  std::optional<MetricsReport> metrics;  // present when the corpus has gold labels
  std::map<std::string, double> stage_seconds;
  double total_seconds = 0.0;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
};

// ingest -> preprocess -> (mode) -> method -> (propagation) -> evaluate ->
// artifacts. Writes assignments.csv, timing.json, temporal.csv, and, when
// applicable, metrics.json and topics.json into out_dir. Partial artifacts
// are removed on failure.
RunResult run(const RunConfig& config);

struct ComparisonRow {
  std::string label;
  std::string method;
  std::string params;
  double p_micro = 0.0;
  double r_micro = 0.0;
  double f_micro = 0.0;
  double ami = 0.0;
  std::size_t n_clusters = 0;
  double runtime_seconds = 0.0;
  std::vector<std::string> best;  // metric columns this row wins
};

struct Comparison {
  std::vector<ComparisonRow> rows;
};

// Runs every config on the shared input and writes comparison.csv /
// comparison.json under out_dir, flagging the best value per metric column.
// All configs must share input path and mode.
Comparison compare(const std::vector<RunConfig>& configs, const std::string& out_dir);

}  // namespace substory::pipeline
