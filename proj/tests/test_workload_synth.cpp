#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "gvr/baselines.hpp"
#include "gvr/row_io.hpp"
#include "gvr/workload_synth.hpp"
#include "oracles.hpp"

using namespace gvr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gvr_test_" + name);
  fs::remove_all(p);
  return p;
}

Selector oracle_selector(std::size_t k) {
  return [k](const ScoreRow& row, const PredictionSet*) { return oracle_topk(row, k); };
}

}  // namespace

TEST_CASE("rng stream is pinned") {
  Rng a(1), b(1);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
  std::mt19937_64 ref(99);
  Rng c(99);
  const std::uint64_t x = ref();
  CHECK(c.uniform() == static_cast<double>(x >> 11) * 0x1.0p-53);
  Rng d(5);
  for (int i = 0; i < 1000; ++i) CHECK(d.below(7) < 7);
  CHECK(mix_seed(1) != mix_seed(2));
}

TEST_CASE("rotation keeps norm and is identity at zero") {
  const auto f = yarn_inv_freq({});
  Rng rng(3);
  const auto v = draw_head_vector(rng, 64, 0.5);
  const auto same = rope_rotate(v, 0, f);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(same[i] == v[2 * i]);
    CHECK(same[32 + i] == v[2 * i + 1]);
  }
  double n0 = 0, n1 = 0;
  const auto r = rope_rotate(v, 12345, f);
  for (std::size_t i = 0; i < 64; ++i) {
    n0 += v[i] * v[i];
    n1 += r[i] * r[i];
  }
  CHECK(std::sqrt(n1) == doctest::Approx(std::sqrt(n0)).epsilon(1e-5));
  CHECK_THROWS(rope_rotate(std::vector<double>(10, 1.0), 1, f));
}

TEST_CASE("all-ones rotated dot product is g of the offset") {
  const auto f = yarn_inv_freq({});
  const std::vector<double> ones(64, 1.0);
  for (auto [a, b] : {std::pair{100, 40}, std::pair{5000, 4999}, std::pair{70000, 3}}) {
    const auto q = rope_rotate(ones, a, f);
    const auto k = rope_rotate(ones, b, f);
    double dot = 0;
    for (int i = 0; i < 64; ++i) dot += q[i] * k[i];
    CHECK(dot == doctest::Approx(static_cast<double>(oracle::g(oracle::yarn(), a - b))).epsilon(1e-9));
  }
}

TEST_CASE("noise-free rows equal the g table in 32 bits") {
  SynthConfig cfg;
  cfg.amplitude = 0.0;
  const std::size_t n = 6000;
  const auto [row, pred] = generate_score_row(cfg, n);
  const auto ref = oracle::yarn();
  for (std::size_t j = 0; j < n; ++j) {
    const float want = static_cast<float>(oracle::g(ref, static_cast<long double>(n - 1 - j)));
    CHECK(std::abs(row[j] - want) <= oracle::float_tolerance(want));
  }
  CHECK(pred.size() == 2048);
  CHECK(pred.provenance() == Provenance::kStaticPrior);
}

TEST_CASE("generation is deterministic in the seed") {
  SynthConfig cfg;
  cfg.seed = 17;
  const auto a = generate_score_row(cfg, 4096);
  const auto b = generate_score_row(cfg, 4096);
  CHECK(std::equal(a.first.scores().begin(), a.first.scores().end(), b.first.scores().begin()));
  cfg.seed = 18;
  const auto c = generate_score_row(cfg, 4096);
  CHECK_FALSE(std::equal(a.first.scores().begin(), a.first.scores().end(), c.first.scores().begin()));
  CHECK_THROWS(generate_score_row(cfg, 100));
}

TEST_CASE("static prior beats a random set on synthetic rows") {
  SynthConfig cfg;
  cfg.seed = 4;
  const auto [row, pred] = generate_score_row(cfg, 70690);
  const auto truth = oracle::topk_indices(std::vector<float>(row.scores().begin(), row.scores().end()), 2048);
  Rng rng(1);
  const auto rnd = random_prediction(70690, 2048, rng);
  const double s = prior_overlap(pred.indices(), truth);
  const double r = prior_overlap(rnd.indices(), truth);
  CHECK(s > r);
  CHECK(r < 0.06);
}

TEST_CASE("hit ratios") {
  const std::vector<Index> a = {1, 2, 3, 4};
  CHECK(hit_ratio(a, a, 4) == 1.0);
  CHECK(hit_ratio(a, std::vector<Index>{5, 6, 7, 8}, 4) == 0.0);
  CHECK(hit_ratio(a, std::vector<Index>{3, 4, 5, 6}, 4) == 0.5);
  CHECK(shifted_hit_ratio(std::vector<Index>{0, 1}, std::vector<Index>{1, 2}, 2) == 1.0);
  CHECK(shifted_hit_ratio(std::vector<Index>{0}, std::vector<Index>{0}, 1) == 0.0);
  CHECK_THROWS_AS(hit_ratio(a, std::vector<Index>{1}, 4), std::invalid_argument);
}

TEST_CASE("random prediction") {
  Rng rng(2);
  const auto p = random_prediction(10000, 2048, rng);
  CHECK(p.size() == 2048);
  CHECK(p.provenance() == Provenance::kRandom);
  CHECK_NOTHROW(p.check_range(10000));
}

TEST_CASE("decode trace shape") {
  SynthConfig cfg;
  cfg.n0 = 4096;
  cfg.steps = 1;
  cfg.seed = 3;
  auto one = simulate_decode(cfg, oracle_selector(2048));
  CHECK(one.hit_ratio_raw.empty());
  CHECK(one.predictions[0].provenance() == Provenance::kStaticPrior);

  cfg.steps = 6;
  auto tr = simulate_decode(cfg, oracle_selector(2048));
  REQUIRE(tr.rows.size() == 6);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(tr.rows[t].size() == 4096 + t);
    CHECK(tr.topk_per_step[t].size() == 2048);
    CHECK(tr.topk_per_step[t].back() < tr.rows[t].size());
  }
  CHECK(tr.hit_ratio_raw.size() == 5);
  CHECK(tr.predictions[1].provenance() == Provenance::kPreviousStep);
  for (double h : tr.hit_ratio_shifted) {
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
  }
}

TEST_CASE("keys persist across decode steps") {
  SynthConfig cfg;
  cfg.n0 = 3000;
  cfg.steps = 1;
  cfg.seed = 8;
  SyntheticWorkload w(cfg);
  w.extend_to(3000);
  CHECK(w.num_keys() == 3000);
  w.extend_to(3001);
  CHECK(w.num_keys() == 3001);
}

TEST_CASE("noise-free traces shift exactly by one") {
  SynthConfig cfg;
  cfg.n0 = 5000;
  cfg.steps = 5;
  cfg.amplitude = 0.0;
  const auto tr = simulate_decode(cfg, oracle_selector(2048));
  // Each step exposes one new offset (key 0); every other Top-K member is
  // the previous step's shifted by one.
  for (std::size_t s = 1; s < tr.rows.size(); ++s) {
    const std::set<Index> prev(tr.topk_per_step[s - 1].begin(), tr.topk_per_step[s - 1].end());
    for (Index i : tr.topk_per_step[s]) {
      if (i != 0) CHECK(prev.count(i - 1) == 1);
    }
    CHECK(tr.hit_ratio_shifted[s - 1] >= 1.0 - 1.0 / 2048);
  }
  // Query at p+1 over keys 0..p equals the query at p, one offset further out.
  const auto& a = tr.rows[0];
  const auto& b = tr.rows[1];
  for (std::size_t j = 0; j < a.size(); j += 7) {
    CHECK(std::abs(b[j + 1] - a[j]) <= oracle::float_tolerance(a[j]));
  }
}

TEST_CASE("previous-step feedback beats random feedback") {
  SynthConfig cfg;
  cfg.n0 = 8192;
  cfg.steps = 8;
  cfg.seed = 6;
  const auto prev = simulate_decode(cfg, oracle_selector(2048), Provenance::kPreviousStep);
  const auto rnd = simulate_decode(cfg, oracle_selector(2048), Provenance::kRandom);
  double mp = 0, mr = 0;
  for (double a : prev.prediction_alpha) mp += a;
  for (double a : rnd.prediction_alpha) mr += a;
  CHECK(mp > mr);
}

TEST_CASE("selector failures name the step") {
  SynthConfig cfg;
  cfg.n0 = 4096;
  cfg.steps = 4;
  int calls = 0;
  const Selector bad = [&](const ScoreRow& row, const PredictionSet*) {
    if (++calls == 3) throw std::runtime_error("boom");
    return oracle_topk(row, 2048);
  };
  try {
    simulate_decode(cfg, bad);
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    CHECK(e.step() == 2);
  }
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.n0 = 10;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.steps = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.amplitude = -1;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("row files round-trip bit-exactly") {
  const auto dir = scratch("rows");
  fs::create_directories(dir);
  std::vector<float> xs = {1.5f, -0.0f, 3.25e-30f, -7.0f, 0.1f};
  write_row(dir / "a.row", ScoreRow(xs));
  const auto back = read_row(dir / "a.row");
  REQUIRE(back.size() == xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(oracle::bits(back[i]) == oracle::bits(xs[i]));
  CHECK(fs::file_size(dir / "a.row") == 8 + 4 + 4 * xs.size());

  auto bytes = encode_row(ScoreRow(xs));
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "GVRROW01");
  CHECK(static_cast<unsigned char>(bytes[8]) == 5);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_row(bad), FormatError);
  auto cut = bytes;
  cut.pop_back();
  CHECK_THROWS_AS(decode_row(cut), TruncationError);
  auto nan = bytes;
  const float q = NAN;
  std::memcpy(nan.data() + 12, &q, 4);
  CHECK_THROWS_AS(decode_row(nan), FormatError);
  CHECK_THROWS_AS(read_row(dir / "missing.row"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("trace files round-trip with manifest") {
  SynthConfig cfg;
  cfg.n0 = 4096;
  cfg.steps = 3;
  cfg.seed = 2;
  const auto tr = simulate_decode(cfg, oracle_selector(2048));
  const auto dir = scratch("trace");
  write_trace(dir, tr);
  CHECK(fs::exists(dir / "step_00002.row"));
  const auto back = read_trace(dir);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.manifest[0].provenance == Provenance::kStaticPrior);
  CHECK(back.manifest[2].provenance == Provenance::kPreviousStep);
  CHECK(back.manifest[1].n == 4097);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(std::equal(back.rows[t].scores().begin(), back.rows[t].scores().end(),
                     tr.rows[t].scores().begin()));
  }
  std::ofstream(dir / kManifestName, std::ios::app) << "{not json\n";
  CHECK_THROWS_AS(read_trace(dir), FormatError);
  fs::remove_all(dir);
}
