#include "gvr/row_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace gvr {

namespace {

void put_u32(char* out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out[b] = static_cast<char>((v >> (8 * b)) & 0xFFu);
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  return v;
}

}  // namespace

std::vector<char> encode_row(const ScoreRow& row) {
  constexpr std::size_t header = sizeof(kRowMagic) + 4;
  std::vector<char> out(header + 4 * row.size());
  std::memcpy(out.data(), kRowMagic, sizeof(kRowMagic));
  put_u32(out.data() + sizeof(kRowMagic), static_cast<std::uint32_t>(row.size()));
  char* p = out.data() + header;
  for (float x : row.scores()) {
    put_u32(p, std::bit_cast<std::uint32_t>(x));
    p += 4;
  }
  return out;
}

ScoreRow decode_row(const std::vector<char>& bytes) {
  constexpr std::size_t header = sizeof(kRowMagic) + 4;
  if (bytes.size() < sizeof(kRowMagic) ||
      std::memcmp(bytes.data(), kRowMagic, sizeof(kRowMagic)) != 0) {
    throw FormatError("row file: bad magic");
  }
  if (bytes.size() < header) throw TruncationError("row file: truncated header");
  const std::uint32_t n = get_u32(bytes.data() + sizeof(kRowMagic));
  const std::size_t payload = bytes.size() - header;
  if (payload != 4 * static_cast<std::size_t>(n)) {
    throw TruncationError("row file: header declares " + std::to_string(n) +
                          " scores but payload holds " + std::to_string(payload) + " bytes");
  }
  std::vector<float> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
    if (!std::isfinite(scores[i])) {
      throw FormatError("row file: non-finite score at index " + std::to_string(i));
    }
  }
  return ScoreRow(std::move(scores));
}

void write_row(const std::filesystem::path& path, const ScoreRow& row) {
  const auto bytes = encode_row(row);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

ScoreRow read_row(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_row(bytes);
}

std::string step_file_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%05zu.row", step);
  return buf;
}

void write_trace(const std::filesystem::path& dir, const DecodeTrace& trace) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream manifest(dir / kManifestName, std::ios::trunc);
  if (!manifest) throw IoError("cannot open manifest in " + dir.string());
  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    write_row(dir / step_file_name(t), trace.rows[t]);
    nlohmann::json line = {
        {"step", t},
        {"n", trace.rows[t].size()},
        {"k", trace.k},
        {"provenance", std::string(to_string(trace.predictions[t].provenance()))},
    };
    manifest << line.dump() << '\n';
  }
  if (!manifest) throw IoError("manifest write failed in " + dir.string());
}

TraceFiles read_trace(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / kManifestName);
  if (!manifest) throw IoError("no manifest in " + dir.string());
  TraceFiles out;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    ManifestEntry e;
    try {
      const auto j = nlohmann::json::parse(line);
      e.step = j.at("step").get<std::size_t>();
      e.n = j.at("n").get<std::size_t>();
      e.k = j.at("k").get<std::size_t>();
      e.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    } catch (const std::exception& ex) {
      throw FormatError("manifest: malformed line: " + std::string(ex.what()));
    }
    ScoreRow row = read_row(dir / step_file_name(e.step));
    if (row.size() != e.n) throw FormatError("manifest: length mismatch at step " + std::to_string(e.step));
    out.rows.emplace_back(std::vector<float>(row.scores().begin(), row.scores().end()),
                          static_cast<std::int64_t>(e.step));
    out.manifest.push_back(e);
  }
  return out;
}

}  // namespace gvr
