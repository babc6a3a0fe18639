#include "gvr/gvr_select.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gvr/baselines.hpp"

namespace gvr {

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

// Midpoint by representable-value count; used when the value-space midpoint
// rounds onto a bracket end or overflows.
float key_midpoint(float lo, float hi) {
  auto to_key = [](float x) {
    const auto bits = std::bit_cast<std::uint32_t>(x);
    return (bits & 0x80000000u) ? ~bits : (bits | 0x80000000u);
  };
  auto from_key = [](std::uint32_t key) {
    const std::uint32_t bits = (key & 0x80000000u) ? (key & 0x7FFFFFFFu) : ~key;
    return std::bit_cast<float>(bits);
  };
  const std::uint32_t a = to_key(lo);
  const std::uint32_t b = to_key(hi);
  return from_key(a + (b - a) / 2);
}

float bracket_midpoint(float lo, float hi) {
  const double mid = 0.5 * (static_cast<double>(lo) + static_cast<double>(hi));
  const auto m = static_cast<float>(mid);
  if (m > lo && m < hi) return m;
  return key_midpoint(lo, hi);
}

// Largest float not above x.
float float_at_or_below(double x) {
  float f = static_cast<float>(x);
  if (static_cast<double>(f) > x) f = std::nextafter(f, -kInf);
  return f;
}

}  // namespace

void GvrParams::validate() const {
  if (k == 0) throw std::invalid_argument("GvrParams: k must be positive");
  if (k > max_candidates) throw std::invalid_argument("GvrParams: k must not exceed max_candidates");
  if (num_bins < 2) throw std::invalid_argument("GvrParams: num_bins must be >= 2");
  if (num_chunks < 1) throw std::invalid_argument("GvrParams: num_chunks must be >= 1");
  if (max_secant_iters < 1) throw std::invalid_argument("GvrParams: max_secant_iters must be >= 1");
  if (!(first_step_damping > 0.0 && first_step_damping <= 1.0)) {
    throw std::invalid_argument("GvrParams: first_step_damping must be in (0, 1]");
  }
}

PredStats preidx_stats(const ScoreRow& row, std::span<const Index> pred, ScanLedger& ledger) {
  if (pred.empty()) throw std::invalid_argument("preidx_stats: empty prediction set");
  PredStats s;
  s.pmin = kInf;
  s.pmax = -kInf;
  double sum = 0.0;
  for (Index i : pred) {
    if (i >= row.size()) {
      throw std::out_of_range("preidx_stats: predicted index " + std::to_string(i) +
                              " out of range");
    }
    const float x = row[i];
    s.pmin = std::min(s.pmin, x);
    s.pmax = std::max(s.pmax, x);
    sum += x;
  }
  s.pmean = sum / static_cast<double>(pred.size());
  ledger.record(PassKind::kScatteredPred, pred.size(), "phase1-preidx");
  return s;
}

std::vector<Index> stride_sample(std::size_t n) {
  const std::size_t m = std::min(kPredictionSize, n);
  std::vector<Index> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<Index>(i * n / m);
  return out;
}

std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t num_chunks,
                                                std::size_t c) {
  return {c * n / num_chunks, (c + 1) * n / num_chunks};
}

CountResult count_ge(const ScoreRow& row, float t, std::size_t num_chunks, ScanLedger& ledger) {
  if (!std::isfinite(t)) throw std::invalid_argument("count_ge: threshold must be finite");
  if (num_chunks == 0) throw std::invalid_argument("count_ge: num_chunks must be positive");
  if (row.empty()) throw std::invalid_argument("count_ge: empty row");
  const auto xs = row.scores();
  const std::size_t n = xs.size();
  CountResult r;
  r.chunk_counts.assign(num_chunks, 0);
  float lo = xs[0];
  float hi = xs[0];
  for (std::size_t c = 0; c < num_chunks; ++c) {
    const auto [b, e] = chunk_range(n, num_chunks, c);
    std::size_t cnt = 0;
    for (std::size_t i = b; i < e; ++i) {
      const float x = xs[i];
      cnt += static_cast<std::size_t>(x >= t);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    r.chunk_counts[c] = cnt;
    r.total += cnt;
  }
  r.row_min = lo;
  r.row_max = hi;
  ledger.record(PassKind::kFullRow, n, "phase2-count");
  return r;
}

double secant_proposal(double t_lo, double f_lo, double t_hi, double f_hi, double f_target) {
  if (!std::isfinite(t_lo) || !std::isfinite(t_hi) || f_lo == f_hi) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return t_lo + (f_lo - f_target) / (f_lo - f_hi) * (t_hi - t_lo);
}

double damp_step(double proposal, double from, double t_lo, double t_hi, double damping) {
  const double width = t_hi - t_lo;
  if (from == t_lo) return std::min(proposal, t_lo + damping * width);
  return std::max(proposal, t_hi - damping * width);
}

SecantOutcome secant_search(const ScoreRow& row, const PredStats& stats, const GvrParams& params,
                            ScanLedger& ledger) {
  params.validate();
  const std::size_t n = row.size();
  const std::size_t k = params.k;
  const std::size_t cap = params.max_candidates;
  if (n < k) throw std::invalid_argument("secant_search: row shorter than k");

  SecantOutcome out;
  ThresholdBracket& br = out.bracket;

  // The whole row already fits the window: every chunk is fully counted
  // without touching the data.
  if (n <= cap) {
    out.threshold = std::numeric_limits<float>::lowest();
    out.count = n;
    out.chunk_counts.resize(params.num_chunks);
    for (std::size_t c = 0; c < params.num_chunks; ++c) {
      const auto [b, e] = chunk_range(n, params.num_chunks, c);
      out.chunk_counts[c] = e - b;
    }
    out.iterations = 0;
    out.done_kind = DoneKind::kConverged;
    return out;
  }

  const double target = 0.5 * static_cast<double>(k + cap);
  float t = static_cast<float>(stats.pmean);
  bool seeded = false;

  for (int iter = 1; iter <= params.max_secant_iters; ++iter) {
    CountResult cr = count_ge(row, t, params.num_chunks, ledger);
    out.iterations = iter;
    br.evaluated.push_back({t, cr.total});
    if (!seeded) {
      br.val_lo = std::nextafter(cr.row_min, -kInf);
      br.cnt_lo = n;
      br.val_hi = std::nextafter(cr.row_max, kInf);
      br.cnt_hi = 0;
      seeded = true;
    }

    if (cr.total >= k && cr.total <= cap) {
      out.threshold = t;
      out.count = cr.total;
      out.chunk_counts = std::move(cr.chunk_counts);
      out.done_kind = DoneKind::kConverged;
      return out;
    }

    const bool probe_is_lo = cr.total > cap;
    if (probe_is_lo) {
      br.val_lo = t;
      br.cnt_lo = cr.total;
      br.lo_is_seed = false;
    } else {
      br.val_hi = t;
      br.cnt_hi = cr.total;
      br.hi_is_seed = false;
    }

    // No float lies strictly between the anchors, so no threshold can land
    // in [k, C].
    if (std::nextafter(br.val_lo, kInf) >= br.val_hi) {
      out.threshold = br.val_hi;
      out.count = br.cnt_hi;
      out.done_kind = DoneKind::kTieFill;
      return out;
    }
    if (iter == params.max_secant_iters) break;

    double proposal = secant_proposal(br.val_lo, static_cast<double>(br.cnt_lo), br.val_hi,
                                      static_cast<double>(br.cnt_hi), target);
    if (iter == 1) {
      proposal = damp_step(proposal, t, br.val_lo, br.val_hi, params.first_step_damping);
    }
    float next = static_cast<float>(proposal);
    const bool inside = next > br.val_lo && next < br.val_hi;
    const bool seen = std::any_of(br.evaluated.begin(), br.evaluated.end(),
                                  [&](const ThresholdProbe& p) { return p.threshold == next; });
    if (!inside || seen) next = bracket_midpoint(br.val_lo, br.val_hi);
    t = next;
  }

  out.threshold = t;
  out.count = br.evaluated.back().count;
  out.done_kind = DoneKind::kFallbackSort;
  return out;
}

std::vector<ScoredIndex> collect_candidates(const ScoreRow& row, float t,
                                            std::span<const std::size_t> cache, std::size_t cap,
                                            ScanLedger& ledger) {
  if (cache.empty()) throw std::logic_error("collect_candidates: empty count cache");
  std::size_t total = 0;
  for (std::size_t c : cache) total += c;
  if (total > cap) throw std::logic_error("collect_candidates: cached count exceeds capacity");

  const auto xs = row.scores();
  const std::size_t n = xs.size();
  std::vector<ScoredIndex> buffer(total);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < cache.size(); ++c) {
    const auto [b, e] = chunk_range(n, cache.size(), c);
    std::size_t pos = offset;
    const std::size_t end = offset + cache[c];
    for (std::size_t i = b; i < e; ++i) {
      if (xs[i] >= t) {
        if (pos == end) throw std::logic_error("collect_candidates: cache/threshold mismatch");
        buffer[pos++] = {xs[i], static_cast<Index>(i)};
      }
    }
    if (pos != end) throw std::logic_error("collect_candidates: cache/threshold mismatch");
    offset = end;
  }
  ledger.record(PassKind::kFullRow, n, "phase3-collect");
  return buffer;
}

namespace {

// Emit all candidates above t, then ties at t by ascending index.
std::vector<ScoredIndex> partition_at(std::span<const ScoredIndex> cands, float t, std::size_t k,
                                      ScanLedger& ledger) {
  std::vector<ScoredIndex> out;
  std::vector<ScoredIndex> ties;
  out.reserve(k);
  for (const auto& c : cands) {
    if (c.value > t) {
      out.push_back(c);
    } else if (c.value == t) {
      ties.push_back(c);
    }
  }
  ledger.record(PassKind::kCandidateBuffer, cands.size(), "phase4-partition");
  if (out.size() > k || out.size() + ties.size() < k) {
    throw std::logic_error("refine_exact: threshold does not bracket the k-th value");
  }
  std::sort(ties.begin(), ties.end(),
            [](const ScoredIndex& a, const ScoredIndex& b) { return a.index < b.index; });
  ties.resize(k - out.size());
  out.insert(out.end(), ties.begin(), ties.end());
  return out;
}

}  // namespace

RefineOutcome refine_exact(std::span<const ScoredIndex> cands, std::size_t k,
                           const GvrParams& params, ScanLedger& ledger) {
  if (k == 0) throw std::invalid_argument("refine_exact: k must be positive");
  if (cands.size() < k) throw std::logic_error("refine_exact: fewer candidates than k");
  if (cands.size() > params.max_candidates) {
    throw std::logic_error("refine_exact: candidate buffer exceeds capacity");
  }

  RefineOutcome out;
  if (cands.size() == k) {
    out.skipped = true;
    out.selected.assign(cands.begin(), cands.end());
    out.threshold = std::min_element(cands.begin(), cands.end(), [](auto& a, auto& b) {
                      return a.value < b.value;
                    })->value;
    return out;
  }

  // (a) range
  float lo = cands[0].value;
  float hi = cands[0].value;
  for (const auto& c : cands) {
    lo = std::min(lo, c.value);
    hi = std::max(hi, c.value);
  }
  ledger.record(PassKind::kCandidateBuffer, cands.size(), "phase4-minmax");

  if (lo == hi) {
    out.threshold = lo;
    out.selected = partition_at(cands, lo, k, ledger);
    return out;
  }

  // (b) histogram; bin b's lower edge is min + b * width / bins, the max
  // value is clamped into the top bin.
  const std::size_t bins = params.num_bins;
  const double dlo = lo;
  const double width = static_cast<double>(hi) - dlo;
  std::vector<std::size_t> hist(bins, 0);
  for (const auto& c : cands) {
    auto b = static_cast<std::size_t>(std::floor((c.value - dlo) / width * static_cast<double>(bins)));
    hist[std::min(b, bins - 1)]++;
  }
  ledger.record(PassKind::kCandidateBuffer, cands.size(), "phase4-histogram");

  std::size_t cum = 0;
  std::size_t kth_bin = 0;
  for (std::size_t b = bins; b-- > 0;) {
    cum += hist[b];
    if (cum >= k) {
      kth_bin = b;
      break;
    }
  }
  float t = float_at_or_below(dlo + width * static_cast<double>(kth_bin) / static_cast<double>(bins));

  // (c) snap onto the k-th value: n_>(T) < k <= n_>=(T)
  for (;;) {
    ++out.snap_iters;
    std::size_t ge = 0;
    std::size_t gt = 0;
    float snap_up = kInf;
    float snap_down = -kInf;
    for (const auto& c : cands) {
      const float x = c.value;
      ge += static_cast<std::size_t>(x >= t);
      gt += static_cast<std::size_t>(x > t);
      if (x > t) snap_up = std::min(snap_up, x);
      if (x < t) snap_down = std::max(snap_down, x);
    }
    ledger.record(PassKind::kCandidateBuffer, cands.size(), "phase4-snap");
    if (ge < k) {
      t = snap_down;
    } else if (gt >= k) {
      t = snap_up;
    } else {
      break;
    }
  }

  // (d)
  out.threshold = t;
  out.selected = partition_at(cands, t, k, ledger);
  return out;
}

std::vector<ScoredIndex> tie_fill_select(const ScoreRow& row, const ThresholdBracket& bracket,
                                         std::size_t k, ScanLedger& ledger) {
  const auto xs = row.scores();
  const std::size_t n = xs.size();
  std::vector<ScoredIndex> out;
  out.reserve(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] >= bracket.val_hi) out.push_back({xs[i], static_cast<Index>(i)});
  }
  ledger.record(PassKind::kFullRow, n, "tie-fill-above");
  if (out.size() >= k) {
    throw std::logic_error("tie_fill_select: upper anchor already holds k elements");
  }
  for (std::size_t i = 0; i < n && out.size() < k; ++i) {
    if (xs[i] == bracket.val_lo) out.push_back({xs[i], static_cast<Index>(i)});
  }
  ledger.record(PassKind::kFullRow, n, "tie-fill-ties");
  if (out.size() < k) {
    throw std::logic_error("tie_fill_select: fewer than k elements at or above the lower anchor");
  }
  return out;
}

SelectionResult gvr_select(const ScoreRow& row, const PredictionSet* pred, const GvrParams& params) {
  params.validate();
  const std::size_t n = row.size();
  if (n < params.k) {
    throw std::invalid_argument("gvr_select: row length " + std::to_string(n) +
                                " is shorter than k = " + std::to_string(params.k));
  }

  SelectionResult res;
  std::vector<Index> sample;
  std::span<const Index> guess;
  if (pred != nullptr) {
    if (pred->empty()) throw std::invalid_argument("gvr_select: empty prediction set");
    pred->check_range(n);
    guess = pred->indices();
  } else {
    sample = stride_sample(n);
    guess = sample;
  }

  // Guess
  const PredStats ps = preidx_stats(row, guess, res.ledger);
  res.stats.pmin = ps.pmin;
  res.stats.pmax = ps.pmax;
  res.stats.pmean = ps.pmean;

  SecantOutcome so = secant_search(row, ps, params, res.ledger);
  res.stats.secant_iters = so.iterations;
  res.stats.done_kind = so.done_kind;

  std::vector<ScoredIndex> selected;
  switch (so.done_kind) {
    case DoneKind::kConverged: {
      // Verify
      const auto cands = collect_candidates(row, so.threshold, so.chunk_counts,
                                            params.max_candidates, res.ledger);
      res.stats.candidate_count = cands.size();
      // Refine
      RefineOutcome ro = refine_exact(cands, params.k, params, res.ledger);
      res.stats.snap_iters = ro.snap_iters;
      res.stats.phase4_skipped = ro.skipped;
      selected = std::move(ro.selected);
      break;
    }
    case DoneKind::kTieFill:
      selected = tie_fill_select(row, so.bracket, params.k, res.ledger);
      break;
    case DoneKind::kFallbackSort:
      selected = oracle_pairs(row, params.k);
      res.ledger.record(PassKind::kFullRow, n, "fallback-sort");
      break;
  }
  assign_pairs(res, selected);
  return res;
}

}  // namespace gvr
