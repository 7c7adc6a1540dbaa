#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdp/gibbs.hpp"
#include "cdpclust/config.hpp"
#include "cdpclust/dataset.hpp"

namespace cdpclust {

/// One retained sweep as written to trace.csv.
struct TraceRow {
  int chain = 0;
  int sweep = 0;
  double log_posterior = 0.0;
  /// Colour of each canonical cluster.
  std::vector<int> colours;
  /// Canonical 0-based cluster label of each item.
  std::vector<int> labels;

  cdp::Partition partition() const { return cdp::Partition::from_allocation(labels); }
};

std::vector<TraceRow> to_rows(int chain, const std::vector<cdp::TraceRecord>& trace);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

void write_trace_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                     const std::vector<TraceRow>& rows);
/// Reads trace.csv back; `ids` receives the item ids from its header.
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path, std::vector<std::string>& ids);

struct PipelineResult {
  std::filesystem::path output;
  std::vector<std::string> files;
  int degree = 0;
  std::vector<std::string> warnings;
};

/// Validates the config, checks the output directory is writable, loads data
/// and design, runs cfg.chains chains concurrently (chain c uses RNG stream
/// c), then writes trace.csv, similarity.csv, partition.csv,
/// cluster_summaries.csv, one crosstab_<column>.csv per annotation column and
/// manifest.json.
PipelineResult run_pipeline(const RunConfig& cfg);

/// Recomputes the estimation outputs of an earlier run from its trace.csv and
/// manifest.json, writing them to `output` (the run directory if empty).
PipelineResult summarize_run(const std::filesystem::path& run_dir, const std::filesystem::path& output = {});

/// Accepts either a plain config or a run manifest (whose "config" entry is
/// used).
RunConfig load_config_or_manifest(const std::filesystem::path& path);

}  // namespace cdpclust
