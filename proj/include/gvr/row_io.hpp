#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gvr/score_row.hpp"
#include "gvr/workload_synth.hpp"

namespace gvr {

/// Row file: 8-byte ASCII magic "GVRROW01", little-endian uint32 N, then N
/// little-endian IEEE-754 binary32 scores.
inline constexpr char kRowMagic[8] = {'G', 'V', 'R', 'R', 'O', 'W', '0', '1'};

/// Raised on filesystem failures (open, write, missing paths).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<char> encode_row(const ScoreRow& row);
/// Throws FormatError on bad magic or non-finite scores, TruncationError
/// when N disagrees with the payload length.
ScoreRow decode_row(const std::vector<char>& bytes);

void write_row(const std::filesystem::path& path, const ScoreRow& row);
ScoreRow read_row(const std::filesystem::path& path);

/// One manifest line per step.
struct ManifestEntry {
  std::size_t step = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  Provenance provenance = Provenance::kNone;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// "step_%05d.row"
std::string step_file_name(std::size_t step);

/// Writes step_%05d.row for every step plus manifest.jsonl into `dir`
/// (created if needed).
void write_trace(const std::filesystem::path& dir, const DecodeTrace& trace);

struct TraceFiles {
  std::vector<ManifestEntry> manifest;
  std::vector<ScoreRow> rows;
};

/// Reads the manifest and every row it lists; validates n per row.
TraceFiles read_trace(const std::filesystem::path& dir);

}  // namespace gvr
