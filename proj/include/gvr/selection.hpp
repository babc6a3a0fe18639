#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "gvr/scan_ledger.hpp"
#include "gvr/score_row.hpp"

namespace gvr {

/// How a GVR selection finished.
///   converged      a threshold with k <= f(T) <= C was found
///   tie-fill       massive ties left no such threshold; selected by partition
///   fallback-sort  the secant iteration cap was hit; full oracle sort
enum class DoneKind { kConverged, kTieFill, kFallbackSort };

std::string_view to_string(DoneKind kind);
DoneKind done_kind_from_string(std::string_view s);

struct PhaseStats {
  float pmin = 0.0f;
  float pmax = 0.0f;
  double pmean = 0.0;
  int secant_iters = 0;
  int snap_iters = 0;
  std::size_t candidate_count = 0;
  DoneKind done_kind = DoneKind::kConverged;
  bool phase4_skipped = false;
};

/// Output of any selector. indices and values are parallel; their order is
/// the selector's natural emission order, not necessarily sorted.
struct SelectionResult {
  std::vector<Index> indices;
  std::vector<float> values;
  PhaseStats stats;
  ScanLedger ledger;
};

/// Splits pairs into a SelectionResult's parallel arrays.
void assign_pairs(SelectionResult& result, const std::vector<ScoredIndex>& pairs);

}  // namespace gvr
