#include "gvr/workload_synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace gvr {

void SynthConfig::validate() const {
  rope.validate();
  if (k == 0) throw std::invalid_argument("SynthConfig: k must be positive");
  if (n0 < k) throw std::invalid_argument("SynthConfig: n0 must be >= k");
  if (steps < 1) throw std::invalid_argument("SynthConfig: steps must be >= 1");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("SynthConfig: amplitude must be finite and >= 0");
  }
}

std::vector<double> rope_rotate(std::span<const double> vec, std::int64_t position,
                                const FrequencyTable& freqs) {
  const std::size_t half = freqs.pairs();
  if (vec.size() != 2 * half) {
    throw std::invalid_argument("rope_rotate: vector length " + std::to_string(vec.size()) +
                                " does not match d_rope " + std::to_string(2 * half));
  }
  std::vector<double> out(vec.size());
  const double pos = static_cast<double>(position);
  for (std::size_t i = 0; i < half; ++i) {
    const double angle = pos * freqs.inv_freq[i];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x1 = vec[2 * i];
    const double x2 = vec[2 * i + 1];
    out[i] = x1 * c - x2 * s;
    out[half + i] = x2 * c + x1 * s;
  }
  return out;
}

std::vector<double> draw_head_vector(Rng& rng, int d_rope, double amplitude) {
  std::vector<double> v(static_cast<std::size_t>(d_rope));
  for (auto& x : v) x = 1.0 + amplitude * rng.normal();
  return v;
}

SyntheticWorkload::SyntheticWorkload(const SynthConfig& cfg)
    : cfg_(cfg), freqs_(yarn_inv_freq(cfg.rope)), key_rng_(cfg.seed),
      query_rng_(mix_seed(cfg.seed)) {}

void SyntheticWorkload::extend_to(std::size_t n) {
  const auto d = static_cast<std::size_t>(cfg_.rope.d_rope);
  rotated_keys_.reserve(n * d);
  for (std::size_t j = num_keys_; j < n; ++j) {
    const auto raw = draw_head_vector(key_rng_, cfg_.rope.d_rope, cfg_.amplitude);
    const auto rot = rope_rotate(raw, static_cast<std::int64_t>(j), freqs_);
    rotated_keys_.insert(rotated_keys_.end(), rot.begin(), rot.end());
  }
  num_keys_ = std::max(num_keys_, n);
}

ScoreRow SyntheticWorkload::next_row(std::optional<std::int64_t> step_id) {
  if (num_keys_ == 0) throw std::logic_error("SyntheticWorkload: no keys");
  const auto d = static_cast<std::size_t>(cfg_.rope.d_rope);
  const auto q = draw_head_vector(query_rng_, cfg_.rope.d_rope, cfg_.amplitude);
  const auto qr = rope_rotate(q, static_cast<std::int64_t>(num_keys_ - 1), freqs_);
  std::vector<float> scores(num_keys_);
  for (std::size_t j = 0; j < num_keys_; ++j) {
    const double* key = rotated_keys_.data() + j * d;
    double acc = 0.0;
    for (std::size_t e = 0; e < d; ++e) acc += qr[e] * key[e];
    scores[j] = static_cast<float>(acc);
  }
  return ScoreRow(std::move(scores), step_id);
}

std::pair<ScoreRow, PredictionSet> generate_score_row(const SynthConfig& cfg, std::size_t n) {
  SynthConfig c = cfg;
  c.n0 = n;
  c.validate();
  SyntheticWorkload workload(c);
  workload.extend_to(n);
  ScoreRow row = workload.next_row(0);
  PredictionSet prior = prior_positions(static_pre_idx(workload.freqs(), n, c.k), n);
  return {std::move(row), std::move(prior)};
}

namespace {

void check_sizes(std::span<const Index> prev, std::span<const Index> curr, std::size_t k) {
  if (k == 0) throw std::invalid_argument("hit ratio: k must be positive");
  if (prev.size() != k || curr.size() != k) {
    throw std::invalid_argument("hit ratio: both sets must have exactly k elements");
  }
}

}  // namespace

double hit_ratio(std::span<const Index> prev, std::span<const Index> curr, std::size_t k) {
  check_sizes(prev, curr, k);
  const std::unordered_set<Index> c(curr.begin(), curr.end());
  std::size_t hits = 0;
  for (Index p : prev) hits += c.count(p);
  return static_cast<double>(hits) / static_cast<double>(k);
}

double shifted_hit_ratio(std::span<const Index> prev, std::span<const Index> curr, std::size_t k) {
  check_sizes(prev, curr, k);
  const std::unordered_set<Index> c(curr.begin(), curr.end());
  std::size_t hits = 0;
  for (Index p : prev) hits += c.count(p + 1);
  return static_cast<double>(hits) / static_cast<double>(k);
}

PredictionSet random_prediction(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw std::invalid_argument("random_prediction: k exceeds n");
  std::vector<char> chosen(n, 0);
  std::vector<Index> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    auto t = static_cast<std::size_t>(rng.below(j + 1));
    if (chosen[t]) t = j;
    chosen[t] = 1;
    out.push_back(static_cast<Index>(t));
  }
  return PredictionSet(std::move(out), Provenance::kRandom);
}

DecodeTrace simulate_decode(const SynthConfig& cfg, const Selector& selector, Provenance feedback) {
  cfg.validate();
  const std::size_t k = cfg.k;
  SyntheticWorkload workload(cfg);
  Rng pred_rng(mix_seed(mix_seed(cfg.seed)));
  const auto table = g_table(workload.freqs(), cfg.n0 + cfg.steps);

  DecodeTrace trace;
  trace.k = k;
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    const std::size_t n = cfg.n0 + t;
    workload.extend_to(n);
    ScoreRow row = workload.next_row(static_cast<std::int64_t>(t));

    const auto static_prior = [&] {
      return prior_positions(static_pre_idx(std::span(table).first(n), k), n);
    };
    PredictionSet pred;
    if (t == 0 || feedback == Provenance::kStaticPrior) {
      pred = static_prior();
    } else if (feedback == Provenance::kPreviousStep) {
      pred = PredictionSet(trace.topk_per_step.back(), Provenance::kPreviousStep);
    } else if (feedback == Provenance::kRandom) {
      pred = random_prediction(n, k, pred_rng);
    }

    SelectionResult res;
    try {
      res = selector(row, pred.empty() ? nullptr : &pred);
    } catch (const std::exception& e) {
      throw TraceError(t, e.what());
    }
    std::vector<Index> topk = res.indices;
    std::sort(topk.begin(), topk.end());
    if (topk.size() != k || std::adjacent_find(topk.begin(), topk.end()) != topk.end() ||
        (!topk.empty() && topk.back() >= n)) {
      throw TraceError(t, "selector returned an invalid Top-K set");
    }

    if (t > 0) {
      trace.hit_ratio_raw.push_back(hit_ratio(trace.topk_per_step.back(), topk, k));
      trace.hit_ratio_shifted.push_back(shifted_hit_ratio(trace.topk_per_step.back(), topk, k));
      trace.prediction_alpha.push_back(pred.empty() ? 0.0 : prior_overlap(pred.indices(), topk));
    }
    trace.rows.push_back(std::move(row));
    trace.predictions.push_back(std::move(pred));
    trace.topk_per_step.push_back(std::move(topk));
    trace.stats.push_back(res.stats);
    trace.ledgers.push_back(std::move(res.ledger));
  }
  return trace;
}

}  // namespace gvr
