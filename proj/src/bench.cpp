#include "gvr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gvr/row_io.hpp"
#include "gvr/workload_synth.hpp"

namespace gvr {

namespace {

const std::set<std::string> kAlgorithms = {"gvr", "radix", "oracle"};

template <typename F>
void as_config_error(F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Index> sorted_topk(const ScoreRow& row, std::size_t k) {
  std::vector<Index> out;
  out.reserve(k);
  for (const auto& p : oracle_pairs(row, k)) out.push_back(p.index);
  std::sort(out.begin(), out.end());
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// One input row of the bench with everything the cells need.
struct BenchRow {
  std::string id;
  ScoreRow row;
  std::vector<Index> previous_topk;  // exact Top-K of the preceding step
  std::vector<Index> truth;          // exact Top-K of this row, ascending
  std::uint64_t seed = 0;
};

MetricsRecord base_record(const BenchRow& br, std::size_t k, const std::string& algorithm,
                          Provenance prov, const SelectionResult& res) {
  MetricsRecord r;
  r.row_id = br.id;
  r.n = br.row.size();
  r.k = k;
  r.provenance = prov;
  r.algorithm = algorithm;
  const TrafficReport tr = traffic_bytes(res.ledger);
  r.full_row_scans = tr.full_row_scans;
  r.candidate_scans = tr.candidate_scans;
  r.bytes_read = tr.bytes_read;
  return r;
}

class Cells {
 public:
  Cells(const BenchConfig& cfg, BenchReport& report) : cfg_(cfg), report_(report) {}

  void run(const BenchRow& br, std::span<const double> g) {
    const std::size_t k = cfg_.gvr.k;
    const std::size_t n = br.row.size();
    for (const auto& algorithm : cfg_.algorithms) {
      if (algorithm != "gvr") {
        SelectionResult res = algorithm == "radix" ? radix_select(br.row, k, cfg_.radix)
                                                   : oracle_topk(br.row, k);
        MetricsRecord r = base_record(br, k, algorithm, Provenance::kNone, res);
        r.done_kind = "none";
        finish(br, res, r);
        continue;
      }
      for (Provenance prov : cfg_.provenances) {
        std::optional<PredictionSet> pred;
        if (prov == Provenance::kPreviousStep) {
          pred.emplace(br.previous_topk, prov);
        } else if (prov == Provenance::kStaticPrior) {
          pred = prior_positions(static_pre_idx(g.first(n), k), n);
        } else if (prov == Provenance::kRandom) {
          Rng rng(mix_seed(br.seed ^ 0xA5A5A5A5A5A5A5A5ULL));
          pred = random_prediction(n, k, rng);
        }
        SelectionResult res = gvr_select(br.row, pred ? &*pred : nullptr, cfg_.gvr);
        MetricsRecord r = base_record(br, k, "gvr", prov, res);
        r.secant_iters = res.stats.secant_iters;
        r.snap_iters = res.stats.snap_iters;
        r.candidate_count = res.stats.candidate_count;
        r.done_kind = std::string(to_string(res.stats.done_kind));
        if (pred) {
          r.hit_ratio_raw = prior_overlap(pred->indices(), br.truth);
          r.hit_ratio_shifted = shifted_hit_ratio(pred->indices(), br.truth, k);
        }
        finish(br, res, r);
      }
    }
  }

 private:
  void finish(const BenchRow& br, const SelectionResult& res, MetricsRecord& r) {
    try {
      verify_exact(br.row, cfg_.gvr.k, res);
      r.exact_match = true;
    } catch (const ExactnessError& e) {
      std::cerr << "exactness violation: " << r.row_id << ' ' << r.algorithm << ' '
                << to_string(r.provenance) << ": " << e.what() << '\n';
      r.exact_match = false;
      ++report_.mismatches;
    }
    report_.records.push_back(std::move(r));
  }

  const BenchConfig& cfg_;
  BenchReport& report_;
};

std::uint64_t row_seed(std::uint64_t seed, std::size_t n, std::size_t r) {
  return mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(n) * 1000003ULL + r));
}

}  // namespace

void BenchConfig::validate() const {
  if (algorithms.empty()) throw ConfigError("bench: at least one algorithm is required");
  for (const auto& a : algorithms) {
    if (!kAlgorithms.count(a)) throw ConfigError("bench: unknown algorithm '" + a + "'");
  }
  if (rows_per_n < 1) throw ConfigError("bench: rows_per_n must be >= 1");
  if (stride < 1) throw ConfigError("bench: stride must be >= 1");
  if (!trace_dir) {
    if (n_values.empty()) throw ConfigError("bench: no row lengths given");
    for (std::size_t n : n_values) {
      if (n < gvr.k) throw ConfigError("bench: n = " + std::to_string(n) + " is below k");
    }
  }
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw ConfigError("bench: amplitude must be finite and non-negative");
  }
  if (std::count(algorithms.begin(), algorithms.end(), "gvr") && provenances.empty()) {
    throw ConfigError("bench: gvr needs at least one provenance");
  }
  as_config_error([&] {
    gvr.validate();
    radix.validate();
    rope.validate();
  });
}

void GenConfig::validate() const {
  if (steps < 1) throw ConfigError("gen: steps must be >= 1");
  if (n0 < k) throw ConfigError("gen: n0 is below k");
  as_config_error([&] {
    SynthConfig sc{n0, steps, k, amplitude, seed, rope};
    sc.validate();
  });
}

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  Cells cells(cfg, report);
  const std::size_t k = cfg.gvr.k;
  const FrequencyTable freqs = yarn_inv_freq(cfg.rope);

  if (cfg.trace_dir) {
    const TraceFiles tf = read_trace(*cfg.trace_dir);
    if (tf.rows.size() < 2) throw ConfigError("bench: trace needs at least 2 steps");
    for (const auto& e : tf.manifest) {
      if (e.k != k) throw ConfigError("bench: trace k differs from configured k");
    }
    const auto g = g_table(freqs, tf.rows.back().size());
    for (std::size_t s = cfg.stride; s < tf.rows.size(); s += cfg.stride) {
      BenchRow br{"step" + std::to_string(s), tf.rows[s], sorted_topk(tf.rows[s - 1], k),
                  sorted_topk(tf.rows[s], k), row_seed(cfg.seed, tf.rows[s].size(), s)};
      cells.run(br, g);
    }
    return report;
  }

  for (std::size_t n : cfg.n_values) {
    const auto g = g_table(freqs, n);
    for (std::size_t r = 0; r < cfg.rows_per_n; ++r) {
      SynthConfig sc;
      sc.n0 = n - 1;
      sc.steps = 2;
      sc.k = k;
      sc.amplitude = cfg.amplitude;
      sc.seed = row_seed(cfg.seed, n, r);
      sc.rope = cfg.rope;
      const Selector oracle = [k](const ScoreRow& row, const PredictionSet*) {
        return oracle_topk(row, k);
      };
      DecodeTrace trace = simulate_decode(sc, oracle);
      BenchRow br{"n" + std::to_string(n) + "-r" + std::to_string(r), std::move(trace.rows[1]),
                  std::move(trace.topk_per_step[0]), std::move(trace.topk_per_step[1]), sc.seed};
      cells.run(br, g);
    }
  }
  return report;
}

std::string bench_summary(const std::vector<MetricsRecord>& records) {
  std::ostringstream md;
  md << "# Bench summary\n\n";
  if (records.empty()) {
    md << "No records.\n";
    return md.str();
  }

  struct Agg {
    std::size_t rows = 0;
    double scans = 0.0;
    double bytes = 0.0;
    double iters = 0.0;
    double alpha = 0.0;
    std::size_t exact = 0;
  };
  using Cell = std::pair<std::string, Provenance>;
  std::map<std::size_t, std::map<Cell, Agg>> by_n;
  for (const auto& r : records) {
    Agg& a = by_n[r.n][{r.algorithm, r.provenance}];
    ++a.rows;
    a.scans += static_cast<double>(r.full_row_scans);
    a.bytes += static_cast<double>(r.bytes_read);
    a.iters += r.secant_iters;
    a.alpha += r.hit_ratio_raw;
    a.exact += r.exact_match;
  }

  md << "Speedup proxy = baseline bytes / bytes, summed over rows of the same n. "
        "Baseline is radix when present, otherwise oracle.\n\n";
  md << "| n | algorithm | provenance | rows | mean full-row scans | mean bytes | mean I | "
        "mean alpha | proxy | exact |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [n, cells] : by_n) {
    const Agg* base = nullptr;
    if (auto it = cells.find({"radix", Provenance::kNone}); it != cells.end()) {
      base = &it->second;
    } else if (auto jt = cells.find({"oracle", Provenance::kNone}); jt != cells.end()) {
      base = &jt->second;
    }
    for (const auto& [cell, a] : cells) {
      const double rows = static_cast<double>(a.rows);
      std::string proxy = "n/a";
      if (base && a.bytes > 0.0) {
        proxy = fixed((base->bytes / static_cast<double>(base->rows)) / (a.bytes / rows));
      }
      md << "| " << n << " | " << cell.first << " | " << to_string(cell.second) << " | " << a.rows
         << " | " << fixed(a.scans / rows, 2) << " | " << fixed(a.bytes / rows, 0) << " | "
         << fixed(a.iters / rows, 2) << " | " << fixed(a.alpha / rows) << " | " << proxy << " | "
         << a.exact << "/" << a.rows << " |\n";
    }
  }

  std::vector<MetricsRecord> gvr_rows;
  for (const auto& r : records) {
    if (r.algorithm == "gvr") gvr_rows.push_back(r);
  }
  if (!gvr_rows.empty()) md << '\n' << replay_report(gvr_rows);
  return md.str();
}

int cmd_gen(const GenConfig& cfg) {
  cfg.validate();
  SynthConfig sc{cfg.n0, cfg.steps, cfg.k, cfg.amplitude, cfg.seed, cfg.rope};
  const std::size_t k = cfg.k;
  const Selector oracle = [k](const ScoreRow& row, const PredictionSet*) {
    return oracle_topk(row, k);
  };
  write_trace(cfg.output_dir, simulate_decode(sc, oracle));
  return 0;
}

int cmd_bench(const BenchConfig& cfg) {
  const BenchReport report = run_bench(cfg);
  ensure_dir(cfg.output_dir);
  const auto csv_path = cfg.output_dir / "bench.csv";
  {
    auto os = open_out(csv_path);
    write_metrics_csv(os, report.records);
    if (!os) throw IoError("write failed for " + csv_path.string());
  }
  std::ifstream is(csv_path);
  if (!is) throw IoError("cannot reopen " + csv_path.string());
  const auto records = read_metrics_csv(is);
  auto md = open_out(cfg.output_dir / "summary.md");
  md << bench_summary(records);
  if (!md) throw IoError("summary write failed");
  return report.mismatches == 0 ? 0 : 2;
}

int cmd_select(const SelectConfig& cfg) {
  as_config_error([&] {
    cfg.gvr.validate();
    cfg.radix.validate();
  });
  if (!kAlgorithms.count(cfg.algorithm)) {
    throw ConfigError("select: unknown algorithm '" + cfg.algorithm + "'");
  }
  const ScoreRow row = read_row(cfg.row_path);
  const std::size_t n = row.size();
  const std::size_t k = cfg.k;
  if (n < k) throw ConfigError("select: row shorter than k");

  GvrParams params = cfg.gvr;
  params.k = k;
  std::optional<PredictionSet> pred;
  if (cfg.provenance == Provenance::kStaticPrior) {
    pred = prior_positions(static_pre_idx(yarn_inv_freq(cfg.rope), n, k), n);
  } else if (cfg.provenance == Provenance::kRandom) {
    Rng rng(cfg.seed);
    pred = random_prediction(n, k, rng);
  } else if (cfg.provenance == Provenance::kPreviousStep) {
    throw ConfigError("select: previous-step predictions need a trace; use bench --trace");
  }

  SelectionResult res;
  if (cfg.algorithm == "gvr") {
    res = gvr_select(row, pred ? &*pred : nullptr, params);
  } else if (cfg.algorithm == "radix") {
    res = radix_select(row, k, cfg.radix);
  } else {
    res = oracle_topk(row, k);
  }

  MetricsRecord r;
  r.row_id = cfg.row_path.filename().string();
  r.n = n;
  r.k = k;
  r.provenance = cfg.algorithm == "gvr" ? cfg.provenance : Provenance::kNone;
  r.algorithm = cfg.algorithm;
  r.done_kind = "none";
  if (cfg.algorithm == "gvr") {
    r.secant_iters = res.stats.secant_iters;
    r.snap_iters = res.stats.snap_iters;
    r.candidate_count = res.stats.candidate_count;
    r.done_kind = std::string(to_string(res.stats.done_kind));
  }
  const TrafficReport tr = traffic_bytes(res.ledger);
  r.full_row_scans = tr.full_row_scans;
  r.candidate_scans = tr.candidate_scans;
  r.bytes_read = tr.bytes_read;
  int status = 0;
  try {
    verify_exact(row, k, res);
    r.exact_match = true;
  } catch (const ExactnessError& e) {
    std::cerr << "exactness violation: " << e.what() << '\n';
    status = 2;
  }
  if (pred) {
    const auto truth = sorted_topk(row, k);
    r.hit_ratio_raw = prior_overlap(pred->indices(), truth);
    r.hit_ratio_shifted = shifted_hit_ratio(pred->indices(), truth, k);
  }
  std::cout << csv_header() << '\n' << to_csv_line(r) << '\n';

  if (!cfg.output.empty()) {
    auto os = open_out(cfg.output);
    os << "rank,index,value\n";
    for (std::size_t j = 0; j < res.indices.size(); ++j) {
      os << j << ',' << res.indices[j] << ',' << format_float(res.values[j]) << '\n';
    }
    if (!os) throw IoError("write failed for " + cfg.output.string());
  }
  return status;
}

std::vector<CorrelationRow> correlate(const std::vector<ScoreRow>& rows, std::size_t k) {
  if (rows.size() < 2) throw ConfigError("correlate: trace needs at least 2 steps");
  std::vector<std::vector<Index>> topk;
  topk.reserve(rows.size());
  for (const auto& row : rows) topk.push_back(sorted_topk(row, k));

  std::vector<CorrelationRow> out;
  for (std::size_t s = 1; s < rows.size(); ++s) {
    CorrelationRow c;
    c.step = s;
    c.raw = hit_ratio(topk[s - 1], topk[s], k);
    c.shifted = shifted_hit_ratio(topk[s - 1], topk[s], k);
    out.push_back(c);
    const std::size_t w = std::min(kMovingAverageWindow, s);
    double raw = 0.0;
    double shifted = 0.0;
    for (std::size_t j = out.size() - w; j < out.size(); ++j) {
      raw += out[j].raw;
      shifted += out[j].shifted;
    }
    out.back().raw_avg = raw / static_cast<double>(w);
    out.back().shifted_avg = shifted / static_cast<double>(w);
  }
  return out;
}

int cmd_correlate(const std::filesystem::path& trace_dir, std::size_t k,
                  const std::filesystem::path& out_csv) {
  const TraceFiles tf = read_trace(trace_dir);
  if (k == 0 && !tf.manifest.empty()) k = tf.manifest.front().k;
  const auto rows = correlate(tf.rows, k);
  if (out_csv.has_parent_path()) ensure_dir(out_csv.parent_path());
  auto os = open_out(out_csv);
  os << "step,hit_ratio_raw,hit_ratio_shifted,moving_avg_raw,moving_avg_shifted\n";
  for (const auto& c : rows) {
    os << c.step << ',' << format_float(c.raw) << ',' << format_float(c.shifted) << ','
       << format_float(c.raw_avg) << ',' << format_float(c.shifted_avg) << '\n';
  }
  if (!os) throw IoError("write failed for " + out_csv.string());
  return 0;
}

int cmd_rope(const RopeConfig& rope, std::size_t n, std::size_t k,
             const std::filesystem::path& out_dir) {
  if (n < 3 || n < k) throw ConfigError("rope: n must be >= max(k, 3)");
  FrequencyTable yarn;
  FrequencyTable standard;
  as_config_error([&] {
    RopeConfig plain = rope;
    plain.yarn_enabled = false;
    RopeConfig scaled = rope;
    scaled.yarn_enabled = true;
    yarn = yarn_inv_freq(scaled);
    standard = yarn_inv_freq(plain);
  });
  ensure_dir(out_dir);
  const auto gy = g_table(yarn, n);
  const auto gs = g_table(standard, n);
  const double gy0 = gy[0];
  const double gs0 = gs[0];

  auto g = open_out(out_dir / "g_table.csv");
  g << "delta,g_yarn,g_standard,g_yarn_norm,g_standard_norm\n";
  for (std::size_t d = 0; d < n; ++d) {
    g << d << ',' << format_float(gy[d]) << ',' << format_float(gs[d]) << ','
      << format_float(gy[d] / gy0) << ',' << format_float(gs[d] / gs0) << '\n';
  }

  auto p = open_out(out_dir / "prior.csv");
  p << "rank,delta,g\n";
  const auto prior = static_pre_idx(gy, k);
  for (std::size_t r = 0; r < prior.size(); ++r) {
    const Index d = prior.indices()[r];
    p << r << ',' << d << ',' << format_float(gy[d]) << '\n';
  }

  auto pk = open_out(out_dir / "peaks.csv");
  pk << "delta,g\n";
  for (std::size_t d : local_maxima(gy)) pk << d << ',' << format_float(gy[d]) << '\n';

  if (!g || !p || !pk) throw IoError("rope: write failed in " + out_dir.string());
  return 0;
}

std::string replay_report(const std::vector<MetricsRecord>& records) {
  std::ostringstream md;
  if (records.empty()) throw FormatError("replay: no records");

  const auto section = [&md](const std::string& title, const std::vector<MetricsRecord>& rs) {
    std::vector<PhaseStats> stats;
    for (const auto& r : rs) {
      PhaseStats s;
      s.secant_iters = r.secant_iters;
      s.snap_iters = r.snap_iters;
      if (r.done_kind != "none") s.done_kind = done_kind_from_string(r.done_kind);
      stats.push_back(s);
    }
    const IterationHistogram h = iteration_histogram(stats);
    md << "## " << title << " (" << h.total << " rows)\n\n";
    md << "| I | rows | CDF |\n|---|---|---|\n";
    for (const auto& [v, c] : h.secant) {
      md << "| " << v << " | " << c << " | " << pct(h.secant_cdf(v)) << " |\n";
    }
    md << "\n| S | rows | CDF |\n|---|---|---|\n";
    for (const auto& [v, c] : h.snap) {
      md << "| " << v << " | " << c << " | " << pct(h.snap_cdf(v)) << " |\n";
    }
    std::map<std::string, std::size_t> done;
    for (const auto& r : rs) ++done[r.done_kind];
    md << "\n| done_kind | rows | share |\n|---|---|---|\n";
    for (const auto& [kind, c] : done) {
      md << "| " << kind << " | " << c << " | "
         << pct(static_cast<double>(c) / static_cast<double>(rs.size())) << " |\n";
    }
    md << '\n';
  };

  md << "# Iteration statistics\n\n";
  section("all rows", records);
  std::map<std::pair<std::string, Provenance>, std::vector<MetricsRecord>> groups;
  for (const auto& r : records) groups[{r.algorithm, r.provenance}].push_back(r);
  if (groups.size() > 1) {
    for (const auto& [key, rs] : groups) {
      section(key.first + " / " + std::string(to_string(key.second)), rs);
    }
  }
  return md.str();
}

int cmd_replay_stats(const std::filesystem::path& csv, const std::filesystem::path& out_md) {
  std::ifstream is(csv);
  if (!is) throw IoError("cannot open " + csv.string());
  const auto records = read_metrics_csv(is);
  const std::string report = replay_report(records);
  if (out_md.empty()) {
    std::cout << report;
    return 0;
  }
  if (out_md.has_parent_path()) ensure_dir(out_md.parent_path());
  auto os = open_out(out_md);
  os << report;
  if (!os) throw IoError("write failed for " + out_md.string());
  return 0;
}

}  // namespace gvr
