#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gvr/score_row.hpp"

namespace gvr {

/// Rotary embedding parameters. Defaults are the DeepSeek-V3.2 indexer's
/// 64-dim YaRN setup.
struct RopeConfig {
  int d_rope = 64;
  double base = 10000.0;
  double scaling_factor = 40.0;
  int orig_max_pos = 4096;
  double beta_fast = 32.0;
  double beta_slow = 1.0;
  bool yarn_enabled = true;

  /// Throws std::invalid_argument on odd/non-positive d_rope, base <= 1,
  /// scaling_factor < 1, beta_fast <= beta_slow, or non-finite values.
  void validate() const;
};

/// Angular frequency per rotated pair, radians per position. Length d_rope/2.
struct FrequencyTable {
  std::vector<double> inv_freq;

  std::size_t pairs() const { return inv_freq.size(); }
  int d_rope() const { return static_cast<int>(2 * inv_freq.size()); }
};

/// Standard RoPE frequencies base^(-2i/d) or, with YaRN enabled, the
/// ramp blend of extrapolated and interpolated frequencies.
FrequencyTable yarn_inv_freq(const RopeConfig& cfg);

/// Positional score between two positions delta apart:
/// 2 * sum_i cos(delta * inv_freq[i]), evaluated in double precision.
double g_delta(const FrequencyTable& freqs, std::uint64_t delta);

/// [g(0), g(1), ..., g(n-1)]. Throws on n == 0.
std::vector<double> g_table(const FrequencyTable& freqs, std::size_t n);

/// The k offsets in [0, n) with the largest g; ties go to the smaller offset.
/// Returned in rank order (largest g first), provenance static-prior.
PredictionSet static_pre_idx(const FrequencyTable& freqs, std::size_t n, std::size_t k);

/// Same selection over an already computed table.
PredictionSet static_pre_idx(std::span<const double> table, std::size_t k);

/// Maps prior offsets to key positions for a query at position n - 1
/// (offset d lands on key n - 1 - d). Offsets >= n are dropped.
PredictionSet prior_positions(const PredictionSet& offsets, std::size_t n);

/// Strict discrete local maxima: j with v[j] > v[j-1] and v[j] > v[j+1],
/// ascending. Plateaus produce no peak. Throws when values.size() < 3.
std::vector<std::size_t> local_maxima(std::span<const double> values);

/// Local maxima of g over [0, n).
std::vector<std::size_t> peak_indices(const FrequencyTable& freqs, std::size_t n);

/// The k peaks with the largest g (ties to the smaller offset), rank order,
/// provenance static-prior. Fewer than k when g has fewer peaks.
PredictionSet peak_prior(const FrequencyTable& freqs, std::size_t n, std::size_t k);

/// |prior ∩ truth| / |truth|. Throws on empty truth.
double prior_overlap(std::span<const Index> prior, std::span<const Index> truth);

}  // namespace gvr
