#include "gvr/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gvr {

namespace {

inline std::uint32_t key_bits(float x) {
  const auto bits = std::bit_cast<std::uint32_t>(x);
  return (bits & 0x80000000u) ? ~bits : (bits | 0x80000000u);
}

bool rank_before(const ScoredIndex& a, const ScoredIndex& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.index < b.index;
}

}  // namespace

std::uint32_t sortable_key(float x) {
  if (!std::isfinite(x)) throw std::invalid_argument("sortable_key: non-finite input");
  return key_bits(x);
}

std::vector<ScoredIndex> oracle_pairs(const ScoreRow& row, std::size_t k) {
  const std::size_t n = row.size();
  if (k == 0) throw std::invalid_argument("oracle_topk: k must be positive");
  if (n < k) throw std::invalid_argument("oracle_topk: row shorter than k");
  std::vector<ScoredIndex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = {row[i], static_cast<Index>(i)};
  const auto kth = all.begin() + static_cast<std::ptrdiff_t>(k);
  if (k < n) std::nth_element(all.begin(), kth - 1, all.end(), rank_before);
  all.resize(k);
  std::sort(all.begin(), all.end(), rank_before);
  return all;
}

SelectionResult oracle_topk(const ScoreRow& row, std::size_t k) {
  SelectionResult res;
  assign_pairs(res, oracle_pairs(row, k));
  res.ledger.record(PassKind::kFullRow, row.size(), "oracle-sort");
  return res;
}

void RadixParams::validate() const {
  if (digit_schedule.empty()) throw std::invalid_argument("RadixParams: empty digit schedule");
  int total = 0;
  for (int w : digit_schedule) {
    if (w < 1 || w > 24) throw std::invalid_argument("RadixParams: digit widths must be in [1, 24]");
    total += w;
  }
  if (total != 32) throw std::invalid_argument("RadixParams: digit widths must sum to 32");
}

SelectionResult radix_select(const ScoreRow& row, std::size_t k, const RadixParams& params) {
  params.validate();
  const auto xs = row.scores();
  const std::size_t n = xs.size();
  if (k == 0) throw std::invalid_argument("radix_select: k must be positive");
  if (n < k) throw std::invalid_argument("radix_select: row shorter than k");

  SelectionResult res;
  std::vector<ScoredIndex> emitted;
  emitted.reserve(k);
  std::size_t remaining = k;
  std::uint32_t prefix = 0;
  int consumed = 0;
  std::size_t candidates = n;

  const auto matches = [&](std::uint32_t key) {
    return consumed == 0 || (key >> (32 - consumed)) == prefix;
  };

  for (int width : params.digit_schedule) {
    if (candidates <= params.early_exit_threshold) break;
    const int shift = 32 - consumed - width;
    const std::uint32_t mask = (1u << width) - 1u;

    std::vector<std::size_t> hist(std::size_t{1} << width, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t key = key_bits(xs[i]);
      if (matches(key)) hist[(key >> shift) & mask]++;
    }
    res.ledger.record(PassKind::kFullRow, n, "radix-histogram");

    // Bucket holding the remaining-th largest key.
    std::size_t above = 0;
    std::uint32_t bucket = 0;
    for (std::size_t b = hist.size(); b-- > 0;) {
      if (above + hist[b] >= remaining) {
        bucket = static_cast<std::uint32_t>(b);
        break;
      }
      above += hist[b];
    }

    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t key = key_bits(xs[i]);
      if (matches(key) && ((key >> shift) & mask) > bucket) {
        emitted.push_back({xs[i], static_cast<Index>(i)});
      }
    }
    res.ledger.record(PassKind::kFullRow, n, "radix-filter");

    remaining -= above;
    prefix = (consumed == 0 ? 0u : (prefix << width)) | bucket;
    consumed += width;
    candidates = hist[bucket];
  }

  if (emitted.size() >= k || emitted.size() + candidates < k) {
    throw std::logic_error("radix_select: early-exit invariant violated");
  }

  std::vector<ScoredIndex> pool;
  pool.reserve(candidates);
  for (std::size_t i = 0; i < n; ++i) {
    if (matches(key_bits(xs[i]))) pool.push_back({xs[i], static_cast<Index>(i)});
  }
  res.ledger.record(PassKind::kFullRow, n, "radix-collect");
  std::sort(pool.begin(), pool.end(), rank_before);
  pool.resize(remaining);
  emitted.insert(emitted.end(), pool.begin(), pool.end());

  assign_pairs(res, emitted);
  return res;
}

bool same_value_multiset(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) return false;
  std::vector<float> sa(a.begin(), a.end());
  std::vector<float> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

void verify_exact(const ScoreRow& row, std::size_t k, const SelectionResult& result) {
  if (result.indices.size() != k || result.values.size() != k) {
    throw ExactnessError("selection returned " + std::to_string(result.indices.size()) +
                         " indices, expected " + std::to_string(k));
  }
  std::vector<Index> idx = result.indices;
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw ExactnessError("selection contains duplicate indices");
  }
  for (std::size_t j = 0; j < k; ++j) {
    const Index i = result.indices[j];
    if (i >= row.size() || row[i] != result.values[j]) {
      throw ExactnessError("selection value/index mismatch at position " + std::to_string(j));
    }
  }
  const auto expected = oracle_pairs(row, k);
  std::vector<float> ev(k);
  for (std::size_t j = 0; j < k; ++j) ev[j] = expected[j].value;
  if (!same_value_multiset(result.values, ev)) {
    throw ExactnessError("selected value multiset differs from the oracle");
  }
}

}  // namespace gvr
