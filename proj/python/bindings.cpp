#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gvr/baselines.hpp"
#include "gvr/gvr_select.hpp"
#include "gvr/metrics.hpp"
#include "gvr/rope_prior.hpp"
#include "gvr/workload_synth.hpp"

namespace py = pybind11;
using namespace gvr;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<Index, py::array::c_style | py::array::forcecast>;

ScoreRow to_row(const FloatArray& a) {
  if (a.ndim() != 1) throw std::invalid_argument("scores must be one-dimensional");
  return ScoreRow(std::vector<float>(a.data(), a.data() + a.size()));
}

template <class T>
py::array_t<T> to_numpy(std::vector<T> v) {
  auto* heap = new std::vector<T>(std::move(v));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<T>*>(p); });
  return py::array_t<T>(heap->size(), heap->data(), owner);
}

template <class T>
py::array_t<T> to_numpy(std::span<const T> s) {
  return to_numpy(std::vector<T>(s.begin(), s.end()));
}

py::dict traffic_dict(const ScanLedger& ledger) {
  const auto t = traffic_bytes(ledger);
  py::dict d;
  d["bytes_read"] = t.bytes_read;
  d["full_row_bytes"] = t.full_row_bytes;
  d["scattered_bytes"] = t.scattered_bytes;
  d["candidate_bytes"] = t.candidate_bytes;
  d["full_row_scans"] = t.full_row_scans;
  d["candidate_scans"] = t.candidate_scans;
  return d;
}

RopeConfig rope_config(bool yarn) {
  RopeConfig c;
  c.yarn_enabled = yarn;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact Top-K selection with scan accounting";

  py::register_exception<ExactnessError>(m, "ExactnessError");
  py::register_exception<FormatError>(m, "FormatError");

  py::class_<PhaseStats>(m, "PhaseStats")
      .def_readonly("pmin", &PhaseStats::pmin)
      .def_readonly("pmax", &PhaseStats::pmax)
      .def_readonly("pmean", &PhaseStats::pmean)
      .def_readonly("secant_iters", &PhaseStats::secant_iters)
      .def_readonly("snap_iters", &PhaseStats::snap_iters)
      .def_readonly("candidate_count", &PhaseStats::candidate_count)
      .def_readonly("phase4_skipped", &PhaseStats::phase4_skipped)
      .def_property_readonly("done_kind",
                             [](const PhaseStats& s) { return std::string(to_string(s.done_kind)); });

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_property_readonly("indices", [](const SelectionResult& r) { return to_numpy(r.indices); })
      .def_property_readonly("values", [](const SelectionResult& r) { return to_numpy(r.values); })
      .def_readonly("stats", &SelectionResult::stats)
      .def_property_readonly("full_row_scans",
                             [](const SelectionResult& r) { return r.ledger.full_row_scans(); })
      .def_property_readonly("passes",
                             [](const SelectionResult& r) {
                               py::list out;
                               for (const auto& e : r.ledger.entries()) {
                                 out.append(py::make_tuple(std::string(to_string(e.kind)),
                                                           e.element_count, e.phase));
                               }
                               return out;
                             })
      .def("traffic", [](const SelectionResult& r) { return traffic_dict(r.ledger); });

  m.def(
      "gvr_select",
      [](const FloatArray& scores, std::optional<IndexArray> pred, std::size_t k,
         std::size_t max_candidates, std::size_t num_bins, std::size_t num_chunks,
         int max_secant_iters) {
        GvrParams p;
        p.k = k;
        p.max_candidates = max_candidates;
        p.num_bins = num_bins;
        p.num_chunks = num_chunks;
        p.max_secant_iters = max_secant_iters;
        const auto row = to_row(scores);
        std::optional<PredictionSet> ps;
        if (pred) {
          ps.emplace(std::vector<Index>(pred->data(), pred->data() + pred->size()),
                     Provenance::kStaticPrior);
        }
        py::gil_scoped_release nogil;
        return gvr_select(row, ps ? &*ps : nullptr, p);
      },
      py::arg("scores"), py::arg("pred") = py::none(), py::arg("k") = 2048,
      py::arg("max_candidates") = 6144, py::arg("num_bins") = 2048, py::arg("num_chunks") = 512,
      py::arg("max_secant_iters") = 16);

  m.def(
      "radix_select",
      [](const FloatArray& scores, std::size_t k, std::vector<int> schedule,
         std::size_t early_exit) {
        RadixParams p;
        p.digit_schedule = std::move(schedule);
        p.early_exit_threshold = early_exit;
        const auto row = to_row(scores);
        py::gil_scoped_release nogil;
        return radix_select(row, k, p);
      },
      py::arg("scores"), py::arg("k") = 2048, py::arg("schedule") = std::vector<int>{16, 11, 5},
      py::arg("early_exit") = 2048);

  m.def(
      "oracle_topk", [](const FloatArray& scores, std::size_t k) { return oracle_topk(to_row(scores), k); },
      py::arg("scores"), py::arg("k") = 2048);

  m.def(
      "verify_exact",
      [](const FloatArray& scores, std::size_t k, const SelectionResult& r) {
        verify_exact(to_row(scores), k, r);
      },
      py::arg("scores"), py::arg("k"), py::arg("result"));

  m.def(
      "speedup_proxy",
      [](const SelectionResult& gvr, const SelectionResult& base) {
        return speedup_proxy(traffic_bytes(gvr.ledger), traffic_bytes(base.ledger));
      },
      py::arg("gvr"), py::arg("baseline"));

  m.def(
      "g_table",
      [](std::size_t n, bool yarn) { return to_numpy(g_table(yarn_inv_freq(rope_config(yarn)), n)); },
      py::arg("n"), py::arg("yarn") = true);

  // Offsets from the query, strongest first.
  m.def(
      "static_prior_offsets",
      [](std::size_t n, std::size_t k, bool yarn) {
        return to_numpy(static_pre_idx(yarn_inv_freq(rope_config(yarn)), n, k).indices());
      },
      py::arg("n"), py::arg("k") = 2048, py::arg("yarn") = true);

  m.def(
      "static_prior_positions",
      [](std::size_t n, std::size_t k, bool yarn) {
        const auto off = static_pre_idx(yarn_inv_freq(rope_config(yarn)), n, k);
        return to_numpy(prior_positions(off, n).indices());
      },
      py::arg("n"), py::arg("k") = 2048, py::arg("yarn") = true);

  m.def(
      "generate_score_row",
      [](std::size_t n, std::uint64_t seed, double amplitude, std::size_t k) {
        SynthConfig c;
        c.seed = seed;
        c.amplitude = amplitude;
        c.k = k;
        auto [row, prior] = generate_score_row(c, n);
        return py::make_tuple(to_numpy(row.scores()), to_numpy(prior.indices()));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("amplitude") = 0.1, py::arg("k") = 2048);

  m.def(
      "prior_overlap",
      [](const IndexArray& prior, const IndexArray& truth) {
        return prior_overlap(std::span<const Index>(prior.data(), prior.size()),
                             std::span<const Index>(truth.data(), truth.size()));
      },
      py::arg("prior"), py::arg("truth"));
}
