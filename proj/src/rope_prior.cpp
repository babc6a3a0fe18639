#include "gvr/rope_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace gvr {

void RopeConfig::validate() const {
  if (d_rope <= 0 || d_rope % 2 != 0) {
    throw std::invalid_argument("RopeConfig: d_rope must be even and positive");
  }
  for (double v : {base, scaling_factor, beta_fast, beta_slow}) {
    if (!std::isfinite(v)) throw std::invalid_argument("RopeConfig: non-finite parameter");
  }
  if (!(base > 1.0)) throw std::invalid_argument("RopeConfig: base must exceed 1");
  if (!(scaling_factor >= 1.0)) throw std::invalid_argument("RopeConfig: scaling_factor must be >= 1");
  if (!(beta_fast > beta_slow)) throw std::invalid_argument("RopeConfig: beta_fast must exceed beta_slow");
  if (beta_slow <= 0.0) throw std::invalid_argument("RopeConfig: beta_slow must be positive");
  if (orig_max_pos <= 0) throw std::invalid_argument("RopeConfig: orig_max_pos must be positive");
}

FrequencyTable yarn_inv_freq(const RopeConfig& cfg) {
  cfg.validate();
  const int dim = cfg.d_rope;
  const std::size_t pairs = static_cast<std::size_t>(dim / 2);
  FrequencyTable table;
  table.inv_freq.resize(pairs);

  if (!cfg.yarn_enabled) {
    for (std::size_t i = 0; i < pairs; ++i) {
      table.inv_freq[i] = std::pow(cfg.base, -2.0 * static_cast<double>(i) / dim);
    }
    return table;
  }

  // Correction range in pair-index units.
  const double two_pi = 2.0 * std::numbers::pi;
  const double log_base = std::log(cfg.base);
  const double orig = static_cast<double>(cfg.orig_max_pos);
  const double lo = std::max(
      std::trunc(dim * std::log(orig / (cfg.beta_fast * two_pi)) / (2.0 * log_base)), 0.0);
  const double hi = std::min(
      std::ceil(dim * std::log(orig / (cfg.beta_slow * two_pi)) / (2.0 * log_base)),
      static_cast<double>(dim - 1));
  const double span = std::max(hi - lo, 1e-3);

  for (std::size_t i = 0; i < pairs; ++i) {
    const double pos_f = std::pow(cfg.base, 2.0 * static_cast<double>(i) / dim);
    const double freq_extra = 1.0 / pos_f;
    const double freq_inter = 1.0 / (cfg.scaling_factor * pos_f);
    const double ramp = std::clamp((static_cast<double>(i) - lo) / span, 0.0, 1.0);
    table.inv_freq[i] = freq_inter * ramp + freq_extra * (1.0 - ramp);
  }
  return table;
}

double g_delta(const FrequencyTable& freqs, std::uint64_t delta) {
  const double d = static_cast<double>(delta);
  double sum = 0.0;
  for (double theta : freqs.inv_freq) sum += std::cos(d * theta);
  return 2.0 * sum;
}

std::vector<double> g_table(const FrequencyTable& freqs, std::size_t n) {
  if (n == 0) throw std::invalid_argument("g_table: n must be positive");
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = g_delta(freqs, j);
  return out;
}

namespace {

// Rank order: larger value first, smaller position on ties.
std::vector<Index> top_positions(std::span<const double> values, std::span<const Index> pool,
                                 std::size_t k) {
  std::vector<Index> order(pool.begin(), pool.end());
  const auto better = [&](Index a, Index b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  order.resize(k);
  return order;
}

}  // namespace

PredictionSet static_pre_idx(std::span<const double> table, std::size_t k) {
  if (k == 0) throw std::invalid_argument("static_pre_idx: k must be positive");
  if (table.size() < k) throw std::invalid_argument("static_pre_idx: n must be >= k");
  std::vector<Index> pool(table.size());
  for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = static_cast<Index>(j);
  return PredictionSet(top_positions(table, pool, k), Provenance::kStaticPrior);
}

PredictionSet static_pre_idx(const FrequencyTable& freqs, std::size_t n, std::size_t k) {
  if (n < k) throw std::invalid_argument("static_pre_idx: n must be >= k");
  const auto table = g_table(freqs, n);
  return static_pre_idx(table, k);
}

PredictionSet prior_positions(const PredictionSet& offsets, std::size_t n) {
  std::vector<Index> out;
  out.reserve(offsets.size());
  for (Index d : offsets.indices()) {
    if (d < n) out.push_back(static_cast<Index>(n - 1 - d));
  }
  return PredictionSet(std::move(out), offsets.provenance());
}

std::vector<std::size_t> local_maxima(std::span<const double> values) {
  if (values.size() < 3) throw std::invalid_argument("local_maxima: need at least 3 values");
  std::vector<std::size_t> peaks;
  for (std::size_t j = 1; j + 1 < values.size(); ++j) {
    if (values[j] > values[j - 1] && values[j] > values[j + 1]) peaks.push_back(j);
  }
  return peaks;
}

std::vector<std::size_t> peak_indices(const FrequencyTable& freqs, std::size_t n) {
  if (n < 3) throw std::invalid_argument("peak_indices: n must be >= 3");
  const auto table = g_table(freqs, n);
  return local_maxima(table);
}

PredictionSet peak_prior(const FrequencyTable& freqs, std::size_t n, std::size_t k) {
  if (n < 3) throw std::invalid_argument("peak_prior: n must be >= 3");
  const auto table = g_table(freqs, n);
  const auto peaks = local_maxima(table);
  std::vector<Index> pool(peaks.begin(), peaks.end());
  return PredictionSet(top_positions(table, pool, k), Provenance::kStaticPrior);
}

double prior_overlap(std::span<const Index> prior, std::span<const Index> truth) {
  if (truth.empty()) throw std::invalid_argument("prior_overlap: truth set is empty");
  const std::unordered_set<Index> truth_set(truth.begin(), truth.end());
  std::size_t hits = 0;
  for (Index i : prior) hits += truth_set.count(i);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace gvr
