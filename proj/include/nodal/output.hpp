#pragma once

// Reproducible CSV and JSON artifacts. Every file carries the code version,
// the seed and a hash of the canonical run configuration so that it can be
// checked later with verify_file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nodal {

inline constexpr std::string_view kVersion = "nodal_lab 0.1.0";

// The configuration of one run. Keys are kept sorted so the dump is
// canonical; the worker count is never part of it.
struct RunConfig {
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;

  std::string canonical() const;
  std::string hash() const;  // 16 hex digits of FNV-1a 64 over canonical()
};

std::uint64_t fnv1a64(std::string_view bytes);

// Fixed-format decimal rendering used by every writer, so identical values
// always produce identical bytes.
std::string format_number(double value);

// RFC 4180 field quoting.
std::string csv_field(std::string_view raw);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(std::string_view v) { return std::string(v); }

  // First line: "# <version> config_hash=<hash> seed=<seed> config=<json>".
  std::string render(const RunConfig& run) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// {"config", "config_hash", "results", "seed", "version"} with sorted keys.
std::string render_json(const RunConfig& run, const nlohmann::json& results);

// Writes `contents` to `path`, throwing IoError naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

struct VerifyResult {
  bool ok = false;
  std::string stored_hash;
  std::string derived_hash;
};

// Re-derives the config hash from the config embedded in a CSV or JSON
// artifact and compares it with the stored one. Throws IoError or
// ParseError on unreadable or malformed files.
VerifyResult verify_file(const std::filesystem::path& path);

}  // namespace nodal
