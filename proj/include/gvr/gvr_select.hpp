#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gvr/scan_ledger.hpp"
#include "gvr/score_row.hpp"
#include "gvr/selection.hpp"

namespace gvr {

struct GvrParams {
  std::size_t k = 2048;
  std::size_t max_candidates = 6144;  // C
  std::size_t num_bins = 2048;
  std::size_t num_chunks = 512;       // P, one cached count per chunk
  int max_secant_iters = 16;
  double first_step_damping = 0.5;

  void validate() const;
};

// ---- Phase 1 -------------------------------------------------------------

struct PredStats {
  float pmin = 0.0f;
  float pmax = 0.0f;
  double pmean = 0.0;
};

/// min/max/mean of the row values at the predicted positions. Records one
/// scattered read of |pred| elements.
PredStats preidx_stats(const ScoreRow& row, std::span<const Index> pred, ScanLedger& ledger);

/// Evenly strided sample used when no prediction is available:
/// floor(i * n / m) for i in [0, m), m = min(kPredictionSize, n).
std::vector<Index> stride_sample(std::size_t n);

// ---- Phase 2 -------------------------------------------------------------

struct CountResult {
  std::size_t total = 0;
  std::vector<std::size_t> chunk_counts;
  float row_min = 0.0f;
  float row_max = 0.0f;
};

/// f(t) = |{i : row[i] >= t}| with per-chunk partial counts over num_chunks
/// contiguous ranges. The row min/max reduction rides along in the same
/// pass. Records one full-row scan. Throws on non-finite t.
CountResult count_ge(const ScoreRow& row, float t, std::size_t num_chunks, ScanLedger& ledger);

/// Half-open range [begin, end) covered by chunk c of n elements.
std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t num_chunks,
                                                std::size_t c);

struct ThresholdProbe {
  float threshold;
  std::size_t count;
};

/// Secant bracket over the counting function. The lo anchor counts more
/// than C, the hi anchor fewer than k, unless still at its seed.
struct ThresholdBracket {
  float val_lo = 0.0f;
  std::size_t cnt_lo = 0;
  float val_hi = 0.0f;
  std::size_t cnt_hi = 0;
  bool lo_is_seed = true;
  bool hi_is_seed = true;
  std::vector<ThresholdProbe> evaluated;
};

struct SecantOutcome {
  float threshold = 0.0f;
  std::size_t count = 0;
  std::vector<std::size_t> chunk_counts;  // cache from the last count_ge
  int iterations = 0;
  DoneKind done_kind = DoneKind::kConverged;
  ThresholdBracket bracket;
};

/// Inverse interpolation toward f_target between (t_lo, f_lo) and (t_hi, f_hi).
double secant_proposal(double t_lo, double f_lo, double t_hi, double f_hi, double f_target);

/// Limits a move from `from` (one end of [t_lo, t_hi]) to damping * width.
double damp_step(double proposal, double from, double t_lo, double t_hi, double damping);

/// Threshold search starting at pmean toward f_target = (k + C) / 2.
/// Each iteration costs one count_ge. Never throws for a valid row; every
/// exit is classified in done_kind.
SecantOutcome secant_search(const ScoreRow& row, const PredStats& stats, const GvrParams& params,
                            ScanLedger& ledger);

// ---- Phase 3 -------------------------------------------------------------

/// Writes every (value, index) with value >= t at offsets prefix-summed from
/// the cached chunk counts; the buffer comes out in ascending index order.
/// One full-row scan, no recount. Throws std::logic_error if the cache does
/// not match t or exceeds cap.
std::vector<ScoredIndex> collect_candidates(const ScoreRow& row, float t,
                                            std::span<const std::size_t> cache, std::size_t cap,
                                            ScanLedger& ledger);

// ---- Phase 4 -------------------------------------------------------------

struct RefineOutcome {
  float threshold = 0.0f;
  int snap_iters = 0;
  bool skipped = false;
  std::vector<ScoredIndex> selected;
};

/// Exact selection inside the candidate buffer: min/max, histogram, snap
/// to the k-th value, then partition (> T* first, then ties in ascending
/// index). Every buffer scan is ledgered as a candidate-buffer pass.
RefineOutcome refine_exact(std::span<const ScoredIndex> cands, std::size_t k,
                           const GvrParams& params, ScanLedger& ledger);

/// Degenerate path for a bracket collapsed onto adjacent floats: everything
/// >= val_hi, then the lowest-index elements equal to val_lo. Two full-row scans.
std::vector<ScoredIndex> tie_fill_select(const ScoreRow& row, const ThresholdBracket& bracket,
                                         std::size_t k, ScanLedger& ledger);

// ---- Pipeline ------------------------------------------------------------

/// Guess-Verify-Refine exact Top-K. `pred` may be null, in which case a
/// stride sample stands in for Phase 1. The result's value multiset always
/// equals the oracle's.
SelectionResult gvr_select(const ScoreRow& row, const PredictionSet* pred,
                           const GvrParams& params = {});

}  // namespace gvr
