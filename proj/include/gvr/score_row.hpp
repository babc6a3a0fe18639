#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gvr {

using Index = std::uint32_t;

/// Size of a prediction set (the number of predicted positions read in Phase 1).
inline constexpr std::size_t kPredictionSize = 2048;

/// Raised when a file or CSV payload does not match its declared format.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payload shorter or longer than the header declares.
class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Raised when a selector's output disagrees with the sort oracle.
class ExactnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One decode step's indexer scores. All values are finite.
class ScoreRow {
 public:
  ScoreRow() = default;
  explicit ScoreRow(std::vector<float> scores,
                    std::optional<std::int64_t> step_id = std::nullopt,
                    std::optional<std::int32_t> layer_id = std::nullopt);

  std::span<const float> scores() const { return scores_; }
  std::size_t size() const { return scores_.size(); }
  bool empty() const { return scores_.empty(); }
  float operator[](std::size_t i) const { return scores_[i]; }

  std::optional<std::int64_t> step_id() const { return step_id_; }
  std::optional<std::int32_t> layer_id() const { return layer_id_; }

 private:
  std::vector<float> scores_;
  std::optional<std::int64_t> step_id_;
  std::optional<std::int32_t> layer_id_;
};

/// Where a prediction set came from.
enum class Provenance { kNone, kRandom, kPreviousStep, kStaticPrior };

std::string_view to_string(Provenance p);
/// Accepts "none", "random", "previous-step", "static-prior".
Provenance provenance_from_string(std::string_view s);

/// Distinct predicted positions plus provenance. Range checks against a row
/// happen at use, since the same set may be applied to rows of varying length.
class PredictionSet {
 public:
  PredictionSet() = default;
  PredictionSet(std::vector<Index> indices, Provenance provenance);

  std::span<const Index> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  Provenance provenance() const { return provenance_; }

  /// Throws std::out_of_range if any index is >= n.
  void check_range(std::size_t n) const;

 private:
  std::vector<Index> indices_;
  Provenance provenance_ = Provenance::kNone;
};

struct ScoredIndex {
  float value;
  Index index;

  friend bool operator==(const ScoredIndex&, const ScoredIndex&) = default;
};

}  // namespace gvr
