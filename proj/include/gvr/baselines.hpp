#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gvr/score_row.hpp"
#include "gvr/selection.hpp"

namespace gvr {

/// Order-preserving map from finite floats to unsigned keys: negative values
/// flip every bit, non-negative values flip only the sign bit.
/// Throws std::invalid_argument on NaN/Inf.
std::uint32_t sortable_key(float x);

/// Reference semantics: descending by value, ties by ascending index; first k.
std::vector<ScoredIndex> oracle_pairs(const ScoreRow& row, std::size_t k);

/// oracle_pairs wrapped as a selector result (one ledgered full-row pass).
SelectionResult oracle_topk(const ScoreRow& row, std::size_t k);

struct RadixParams {
  // Bit widths consumed per round, most significant first; sums to 32.
  std::vector<int> digit_schedule{16, 11, 5};
  std::size_t early_exit_threshold = 2048;

  void validate() const;
};

/// Radix select over sortable keys with one histogram scan and one filter
/// scan of the whole row per round, and a final collection scan once the
/// threshold bucket holds at most early_exit_threshold elements (or the key
/// is exhausted). The finisher sorts only the collected candidates.
SelectionResult radix_select(const ScoreRow& row, std::size_t k, const RadixParams& params = {});

/// Sorted-multiset comparison of selected values against the oracle's.
bool same_value_multiset(std::span<const float> a, std::span<const float> b);

/// Throws ExactnessError unless `result` holds k distinct in-range indices
/// whose values match the row and whose value multiset equals the oracle's.
void verify_exact(const ScoreRow& row, std::size_t k, const SelectionResult& result);

}  // namespace gvr
