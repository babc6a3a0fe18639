#include "gvr/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gvr {

// ---- ledger --------------------------------------------------------------

std::string_view to_string(PassKind kind) {
  switch (kind) {
    case PassKind::kFullRow: return "full-row";
    case PassKind::kScatteredPred: return "scattered-pred";
    case PassKind::kCandidateBuffer: return "candidate-buffer";
  }
  return "full-row";
}

void ScanLedger::record(PassKind kind, std::size_t element_count, std::string phase) {
  if (element_count == 0) throw std::invalid_argument("ScanLedger: element count must be positive");
  entries_.push_back({kind, element_count, std::move(phase)});
}

std::size_t ScanLedger::count(PassKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [&](const ScanEntry& e) { return e.kind == kind; }));
}

std::size_t ScanLedger::count(PassKind kind, std::string_view phase) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [&](const ScanEntry& e) { return e.kind == kind && e.phase == phase; }));
}

void ScanLedger::append(const ScanLedger& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

// ---- selection plumbing ---------------------------------------------------

std::string_view to_string(DoneKind kind) {
  switch (kind) {
    case DoneKind::kConverged: return "converged";
    case DoneKind::kTieFill: return "tie-fill";
    case DoneKind::kFallbackSort: return "fallback-sort";
  }
  return "converged";
}

DoneKind done_kind_from_string(std::string_view s) {
  if (s == "converged") return DoneKind::kConverged;
  if (s == "tie-fill") return DoneKind::kTieFill;
  if (s == "fallback-sort") return DoneKind::kFallbackSort;
  throw std::invalid_argument("unknown done_kind '" + std::string(s) + "'");
}

void assign_pairs(SelectionResult& result, const std::vector<ScoredIndex>& pairs) {
  result.indices.resize(pairs.size());
  result.values.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    result.indices[i] = pairs[i].index;
    result.values[i] = pairs[i].value;
  }
}

// ---- traffic --------------------------------------------------------------

TrafficReport traffic_bytes(const ScanLedger& ledger) {
  TrafficReport r;
  for (const auto& e : ledger.entries()) {
    const std::uint64_t bytes = e.element_count * kBytesPerElement;
    r.bytes_read += bytes;
    switch (e.kind) {
      case PassKind::kFullRow:
        r.full_row_bytes += bytes;
        ++r.full_row_scans;
        break;
      case PassKind::kScatteredPred:
        r.scattered_bytes += bytes;
        ++r.scattered_reads;
        break;
      case PassKind::kCandidateBuffer:
        r.candidate_bytes += bytes;
        ++r.candidate_scans;
        break;
    }
  }
  return r;
}

double speedup_proxy(const TrafficReport& gvr, const TrafficReport& baseline) {
  if (gvr.bytes_read == 0) throw std::domain_error("speedup_proxy: zero traffic in denominator");
  return static_cast<double>(baseline.bytes_read) / static_cast<double>(gvr.bytes_read);
}

// ---- iteration statistics ---------------------------------------------------

namespace {

double cdf_at(const std::map<int, std::size_t>& counts, std::size_t total, int v) {
  if (total == 0) return 0.0;
  std::size_t below = 0;
  for (const auto& [value, c] : counts) {
    if (value > v) break;
    below += c;
  }
  return static_cast<double>(below) / static_cast<double>(total);
}

}  // namespace

double IterationHistogram::secant_cdf(int v) const { return cdf_at(secant, total, v); }
double IterationHistogram::snap_cdf(int v) const { return cdf_at(snap, total, v); }

IterationHistogram iteration_histogram(std::span<const PhaseStats> stats) {
  if (stats.empty()) throw std::invalid_argument("iteration_histogram: empty input");
  IterationHistogram h;
  for (const auto& s : stats) {
    ++h.total;
    ++h.secant[s.secant_iters];
    ++h.snap[s.snap_iters];
    ++h.done[s.done_kind];
  }
  return h;
}

// ---- ablation -------------------------------------------------------------

std::vector<AblationRow> ablation_run(const DecodeTrace& trace, std::span<const Provenance> sources,
                                      const GvrParams& gvr_params, const RadixParams& radix_params,
                                      std::uint64_t seed, const RopeConfig& rope) {
  if (sources.empty()) throw std::invalid_argument("ablation_run: no prediction sources");
  if (trace.rows.size() < 2) throw std::invalid_argument("ablation_run: trace needs >= 2 steps");
  const std::set<Provenance> ordered(sources.begin(), sources.end());
  const std::size_t k = trace.k;
  GvrParams params = gvr_params;
  params.k = k;

  std::vector<double> table;
  if (ordered.count(Provenance::kStaticPrior)) {
    table = g_table(yarn_inv_freq(rope), trace.rows.back().size());
  }

  std::vector<AblationRow> out;
  for (Provenance source : ordered) {
    AblationRow row;
    row.provenance = source;
    Rng rng(mix_seed(seed ^ static_cast<std::uint64_t>(source)));
    for (std::size_t t = 1; t < trace.rows.size(); ++t) {
      const ScoreRow& scores = trace.rows[t];
      const std::size_t n = scores.size();
      SelectionResult res;
      double alpha = 0.0;
      if (source == Provenance::kNone) {
        res = radix_select(scores, k, radix_params);
      } else {
        PredictionSet pred;
        if (source == Provenance::kRandom) {
          pred = random_prediction(n, k, rng);
        } else if (source == Provenance::kPreviousStep) {
          pred = PredictionSet(trace.topk_per_step[t - 1], Provenance::kPreviousStep);
        } else {
          pred = prior_positions(static_pre_idx(std::span(table).first(n), k), n);
        }
        res = gvr_select(scores, &pred, params);
        alpha = prior_overlap(pred.indices(), trace.topk_per_step[t]);
      }
      verify_exact(scores, k, res);
      const TrafficReport tr = traffic_bytes(res.ledger);
      row.mean_alpha += alpha;
      row.mean_full_row_scans += static_cast<double>(tr.full_row_scans);
      row.mean_bytes += static_cast<double>(tr.bytes_read);
      row.mean_secant_iters += res.stats.secant_iters;
      ++row.samples;
    }
    const auto s = static_cast<double>(row.samples);
    row.mean_alpha /= s;
    row.mean_full_row_scans /= s;
    row.mean_bytes /= s;
    row.mean_secant_iters /= s;
    out.push_back(row);
  }
  return out;
}

// ---- CSV ------------------------------------------------------------------

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string csv_header() {
  std::string h;
  for (const char* c : kCsvColumns) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

std::string to_csv_line(const MetricsRecord& r) {
  std::ostringstream os;
  os << r.row_id << ',' << r.n << ',' << r.k << ',' << to_string(r.provenance) << ','
     << r.algorithm << ',' << r.secant_iters << ',' << r.snap_iters << ',' << r.candidate_count
     << ',' << r.done_kind << ',' << r.full_row_scans << ',' << r.candidate_scans << ','
     << r.bytes_read << ',' << format_float(r.hit_ratio_raw) << ','
     << format_float(r.hit_ratio_shifted) << ',' << (r.exact_match ? "true" : "false");
  return os.str();
}

void write_metrics_csv(std::ostream& os, std::span<const MetricsRecord> records) {
  os << csv_header() << '\n';
  for (const auto& r : records) os << to_csv_line(r) << '\n';
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_int(const std::string& s, const char* column) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw FormatError(std::string("CSV: bad integer in column ") + column + ": '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError(std::string("CSV: bad number in column ") + column + ": '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<MetricsRecord> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw FormatError("CSV: header does not match the metrics schema");

  constexpr std::size_t kColumns = std::size(kCsvColumns);
  std::vector<MetricsRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line);
    if (f.size() != kColumns) {
      throw FormatError("CSV: line " + std::to_string(line_no) + " has " +
                        std::to_string(f.size()) + " fields, expected " +
                        std::to_string(kColumns));
    }
    MetricsRecord r;
    try {
      r.row_id = f[0];
      r.n = parse_int<std::size_t>(f[1], "n");
      r.k = parse_int<std::size_t>(f[2], "k");
      r.provenance = provenance_from_string(f[3]);
      r.algorithm = f[4];
      r.secant_iters = parse_int<int>(f[5], "secant_iters");
      r.snap_iters = parse_int<int>(f[6], "snap_iters");
      r.candidate_count = parse_int<std::size_t>(f[7], "candidate_count");
      r.done_kind = f[8];
      r.full_row_scans = parse_int<std::size_t>(f[9], "full_row_scans");
      r.candidate_scans = parse_int<std::size_t>(f[10], "candidate_scans");
      r.bytes_read = parse_int<std::uint64_t>(f[11], "bytes_read");
      r.hit_ratio_raw = parse_double(f[12], "hit_ratio_raw");
      r.hit_ratio_shifted = parse_double(f[13], "hit_ratio_shifted");
      if (f[14] != "true" && f[14] != "false") throw FormatError("CSV: exact_match must be true/false");
      r.exact_match = f[14] == "true";
      if (r.done_kind != "none") done_kind_from_string(r.done_kind);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError("CSV: line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r.algorithm != "gvr" && r.algorithm != "radix" && r.algorithm != "oracle") {
      throw FormatError("CSV: unknown algorithm '" + r.algorithm + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gvr
