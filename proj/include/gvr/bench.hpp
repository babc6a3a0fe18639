#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvr/baselines.hpp"
#include "gvr/gvr_select.hpp"
#include "gvr/metrics.hpp"
#include "gvr/rope_prior.hpp"

namespace gvr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchConfig {
  std::uint64_t seed = 0;
  std::vector<std::size_t> n_values = {8192, 32768, 70690, 131072};
  std::size_t rows_per_n = 4;
  GvrParams gvr;
  RadixParams radix;
  RopeConfig rope;
  double amplitude = 0.1;
  std::vector<std::string> algorithms = {"gvr", "radix", "oracle"};
  std::vector<Provenance> provenances = {Provenance::kPreviousStep, Provenance::kStaticPrior,
                                         Provenance::kRandom};
  std::filesystem::path output_dir = "bench_out";
  // When set, rows come from a recorded trace instead of fresh generation.
  std::optional<std::filesystem::path> trace_dir;
  std::size_t stride = 1;  // trace steps sampled every `stride`

  /// Throws ConfigError.
  void validate() const;
};

struct GenConfig {
  std::uint64_t seed = 0;
  std::size_t n0 = 70690;
  std::size_t steps = 256;
  std::size_t k = 2048;
  double amplitude = 0.1;
  RopeConfig rope;
  std::filesystem::path output_dir = "trace";

  void validate() const;
};

struct BenchReport {
  std::vector<MetricsRecord> records;
  std::size_t mismatches = 0;
};

/// Runs every (row, algorithm, provenance) cell. GVR runs once per
/// provenance; radix and oracle run once per row with provenance none.
BenchReport run_bench(const BenchConfig& cfg);

/// Markdown report computed from CSV records only.
std::string bench_summary(const std::vector<MetricsRecord>& records);

// The cmd_* entry points return a process exit code for the non-throwing
// outcomes (0, or 2 on an exactness violation). Config problems throw
// ConfigError, file problems IoError/FormatError.

/// Oracle-driven decode trace written as row files plus manifest.
int cmd_gen(const GenConfig& cfg);

/// bench.csv and summary.md under cfg.output_dir.
int cmd_bench(const BenchConfig& cfg);

struct SelectConfig {
  std::filesystem::path row_path;
  std::string algorithm = "gvr";
  Provenance provenance = Provenance::kStaticPrior;
  std::size_t k = 2048;
  std::uint64_t seed = 0;
  GvrParams gvr;
  RadixParams radix;
  RopeConfig rope;
  std::filesystem::path output;  // empty: no pair dump
};

/// Selects from one row file; prints the metrics line to stdout and, when
/// cfg.output is set, writes rank,index,value.
int cmd_select(const SelectConfig& cfg);

inline constexpr std::size_t kMovingAverageWindow = 25;

struct CorrelationRow {
  std::size_t step = 0;
  double raw = 0.0;
  double shifted = 0.0;
  double raw_avg = 0.0;
  double shifted_avg = 0.0;
};

/// Hit ratios of consecutive exact Top-K sets, from step 1 on. The average
/// at step s covers the last min(25, s) ratios.
std::vector<CorrelationRow> correlate(const std::vector<ScoreRow>& rows, std::size_t k);

int cmd_correlate(const std::filesystem::path& trace_dir, std::size_t k,
                  const std::filesystem::path& out_csv);

/// g_table.csv, prior.csv and peaks.csv under out_dir.
int cmd_rope(const RopeConfig& rope, std::size_t n, std::size_t k,
             const std::filesystem::path& out_dir);

std::string replay_report(const std::vector<MetricsRecord>& records);

int cmd_replay_stats(const std::filesystem::path& csv, const std::filesystem::path& out_md);

}  // namespace gvr
