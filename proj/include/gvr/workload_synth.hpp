#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gvr/rng.hpp"
#include "gvr/rope_prior.hpp"
#include "gvr/score_row.hpp"
#include "gvr/selection.hpp"

namespace gvr {

struct SynthConfig {
  std::size_t n0 = 70690;
  std::size_t steps = 1;
  std::size_t k = 2048;
  double amplitude = 0.1;  // Am
  std::uint64_t seed = 0;
  RopeConfig rope;

  void validate() const;
};

/// Rotates `vec` (length d_rope) to `position`: with x1 = even elements and
/// x2 = odd elements, returns [x1*c - x2*s, x2*c + x1*s] where
/// c, s = cos, sin(position * inv_freq).
std::vector<double> rope_rotate(std::span<const double> vec, std::int64_t position,
                                const FrequencyTable& freqs);

/// Raw (unrotated) vector 1 + Am * N(0, 1) per component.
std::vector<double> draw_head_vector(Rng& rng, int d_rope, double amplitude);

/// Keys and queries of the synthetic indexer. Keys are drawn once, in
/// position order, from the key stream (seed) and stay fixed; each query is
/// drawn from the query stream (mix_seed(seed)) at the newest position.
class SyntheticWorkload {
 public:
  explicit SyntheticWorkload(const SynthConfig& cfg);

  std::size_t num_keys() const { return num_keys_; }
  const FrequencyTable& freqs() const { return freqs_; }

  /// Appends keys until num_keys() == n.
  void extend_to(std::size_t n);

  /// Draws the next query at position num_keys() - 1 and scores every key:
  /// score[j] = <rope(q, n-1), rope(k_j, j)>, rounded to 32 bits.
  ScoreRow next_row(std::optional<std::int64_t> step_id = std::nullopt);

 private:
  SynthConfig cfg_;
  FrequencyTable freqs_;
  Rng key_rng_;
  Rng query_rng_;
  std::size_t num_keys_ = 0;
  std::vector<double> rotated_keys_;  // num_keys_ x d_rope, row-major
};

/// One synthetic row of length n plus the static prior mapped onto key
/// positions (provenance static-prior). Equal to step 0 of a decode trace
/// with the same config and n0 = n.
std::pair<ScoreRow, PredictionSet> generate_score_row(const SynthConfig& cfg, std::size_t n);

/// |prev ∩ curr| / k. Throws std::invalid_argument on size mismatch.
double hit_ratio(std::span<const Index> prev, std::span<const Index> curr, std::size_t k);

/// |{p + 1 : p ∈ prev} ∩ curr| / k.
double shifted_hit_ratio(std::span<const Index> prev, std::span<const Index> curr, std::size_t k);

/// k distinct positions drawn uniformly from [0, n) (Floyd's algorithm).
PredictionSet random_prediction(std::size_t n, std::size_t k, Rng& rng);

using Selector = std::function<SelectionResult(const ScoreRow&, const PredictionSet*)>;

struct DecodeTrace {
  std::size_t k = 0;
  std::vector<ScoreRow> rows;               // step t has length n0 + t
  std::vector<PredictionSet> predictions;   // preIdx used at each step
  std::vector<std::vector<Index>> topk_per_step;  // ascending
  std::vector<PhaseStats> stats;
  std::vector<ScanLedger> ledgers;
  // Ratio series start at step 1; entry s - 1 describes step s.
  std::vector<double> hit_ratio_raw;
  std::vector<double> hit_ratio_shifted;
  std::vector<double> prediction_alpha;     // |preIdx ∩ topk| / k, steps >= 1
};

/// Raised when the selector fails mid-trace; carries the failing step.
class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t step, const std::string& what)
      : std::runtime_error("decode step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Runs cfg.steps decode steps. Step 0 is predicted by the static prior;
/// later steps by the previous step's Top-K, or by fresh random sets when
/// `feedback` is Provenance::kRandom.
DecodeTrace simulate_decode(const SynthConfig& cfg, const Selector& selector,
                            Provenance feedback = Provenance::kPreviousStep);

}  // namespace gvr
