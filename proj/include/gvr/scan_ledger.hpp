#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gvr {

enum class PassKind { kFullRow, kScatteredPred, kCandidateBuffer };

std::string_view to_string(PassKind kind);

struct ScanEntry {
  PassKind kind;
  std::size_t element_count;
  std::string phase;
};

/// Append-only record of every logical data pass a selector performs.
/// This stands in for wall-clock measurement: traffic and pass-count claims
/// are all read off the ledger.
class ScanLedger {
 public:
  /// Throws std::invalid_argument when element_count is zero.
  void record(PassKind kind, std::size_t element_count, std::string phase);

  const std::vector<ScanEntry>& entries() const { return entries_; }
  std::size_t count(PassKind kind) const;
  std::size_t count(PassKind kind, std::string_view phase) const;
  std::size_t full_row_scans() const { return count(PassKind::kFullRow); }
  std::size_t candidate_scans() const { return count(PassKind::kCandidateBuffer); }

  void append(const ScanLedger& other);

 private:
  std::vector<ScanEntry> entries_;
};

}  // namespace gvr
