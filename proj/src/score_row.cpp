#include "gvr/score_row.hpp"

#include <algorithm>
#include <cmath>

namespace gvr {

ScoreRow::ScoreRow(std::vector<float> scores, std::optional<std::int64_t> step_id,
                   std::optional<std::int32_t> layer_id)
    : scores_(std::move(scores)), step_id_(step_id), layer_id_(layer_id) {
  if (scores_.size() > std::size_t{UINT32_MAX}) {
    throw std::invalid_argument("ScoreRow: length exceeds 32-bit index range");
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (!std::isfinite(scores_[i])) {
      throw std::invalid_argument("ScoreRow: non-finite score at index " + std::to_string(i));
    }
  }
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kNone: return "none";
    case Provenance::kRandom: return "random";
    case Provenance::kPreviousStep: return "previous-step";
    case Provenance::kStaticPrior: return "static-prior";
  }
  return "none";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "none") return Provenance::kNone;
  if (s == "random") return Provenance::kRandom;
  if (s == "previous-step") return Provenance::kPreviousStep;
  if (s == "static-prior") return Provenance::kStaticPrior;
  throw std::invalid_argument("unknown provenance '" + std::string(s) + "'");
}

PredictionSet::PredictionSet(std::vector<Index> indices, Provenance provenance)
    : indices_(std::move(indices)), provenance_(provenance) {
  std::vector<Index> sorted = indices_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("PredictionSet: indices must be distinct");
  }
}

void PredictionSet::check_range(std::size_t n) const {
  for (Index i : indices_) {
    if (i >= n) {
      throw std::out_of_range("PredictionSet: index " + std::to_string(i) +
                              " out of range for row of length " + std::to_string(n));
    }
  }
}

}  // namespace gvr
