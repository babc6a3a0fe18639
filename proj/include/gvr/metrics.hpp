#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gvr/baselines.hpp"
#include "gvr/gvr_select.hpp"
#include "gvr/scan_ledger.hpp"
#include "gvr/selection.hpp"
#include "gvr/workload_synth.hpp"

namespace gvr {

inline constexpr std::uint64_t kBytesPerElement = 4;

/// Bytes read under the flat 4-bytes-per-element model (no cache reuse).
struct TrafficReport {
  std::uint64_t bytes_read = 0;
  std::uint64_t full_row_bytes = 0;
  std::uint64_t scattered_bytes = 0;
  std::uint64_t candidate_bytes = 0;
  std::size_t full_row_scans = 0;
  std::size_t candidate_scans = 0;
  std::size_t scattered_reads = 0;
};

TrafficReport traffic_bytes(const ScanLedger& ledger);

/// baseline.bytes_read / gvr.bytes_read. Throws std::domain_error when the
/// denominator is zero.
double speedup_proxy(const TrafficReport& gvr, const TrafficReport& baseline);

struct IterationHistogram {
  std::size_t total = 0;
  std::map<int, std::size_t> secant;  // value -> count
  std::map<int, std::size_t> snap;
  std::map<DoneKind, std::size_t> done;

  /// Fraction of samples with secant_iters <= v.
  double secant_cdf(int v) const;
  double snap_cdf(int v) const;
};

/// Throws std::invalid_argument on empty input.
IterationHistogram iteration_histogram(std::span<const PhaseStats> stats);

struct AblationRow {
  Provenance provenance = Provenance::kNone;
  double mean_alpha = 0.0;
  double mean_full_row_scans = 0.0;
  double mean_bytes = 0.0;
  double mean_secant_iters = 0.0;
  std::size_t samples = 0;
};

/// Replays every step >= 1 of a trace under each prediction source. The
/// none source is the radix baseline; the others run GVR with the previous
/// step's Top-K, a fresh random set, or the static prior. Rows come back
/// in provenance order none, random, previous-step, static-prior.
std::vector<AblationRow> ablation_run(const DecodeTrace& trace, std::span<const Provenance> sources,
                                      const GvrParams& gvr_params, const RadixParams& radix_params,
                                      std::uint64_t seed, const RopeConfig& rope = {});

// ---- CSV schema ----------------------------------------------------------

/// One selection. Column order is fixed by kCsvColumns.
struct MetricsRecord {
  std::string row_id;
  std::size_t n = 0;
  std::size_t k = 0;
  Provenance provenance = Provenance::kNone;
  std::string algorithm;  // gvr | radix | oracle
  int secant_iters = 0;
  int snap_iters = 0;
  std::size_t candidate_count = 0;
  std::string done_kind;  // converged | tie-fill | fallback-sort | none
  std::size_t full_row_scans = 0;
  std::size_t candidate_scans = 0;
  std::uint64_t bytes_read = 0;
  double hit_ratio_raw = 0.0;
  double hit_ratio_shifted = 0.0;
  bool exact_match = false;
};

inline constexpr const char* kCsvColumns[] = {
    "row_id",          "n",           "k",               "provenance",     "algorithm",
    "secant_iters",    "snap_iters",  "candidate_count", "done_kind",      "full_row_scans",
    "candidate_scans", "bytes_read",  "hit_ratio_raw",   "hit_ratio_shifted", "exact_match"};

std::string csv_header();
/// Floats use 9 significant digits ("%.9g").
std::string to_csv_line(const MetricsRecord& r);
std::string format_float(double v);

void write_metrics_csv(std::ostream& os, std::span<const MetricsRecord> records);
/// Throws FormatError on a missing/misordered header or malformed field.
std::vector<MetricsRecord> read_metrics_csv(std::istream& is);

}  // namespace gvr
