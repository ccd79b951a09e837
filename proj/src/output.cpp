#include "nodal/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nodal/errors.hpp"

namespace nodal {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::canonical() const {
  const nlohmann::json doc = {{"config", config}, {"seed", seed}};
  return doc.dump();
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string csv_field(std::string_view raw) {
  if (raw.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(raw);
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw Error(ErrorCode::InvalidArgument, "CSV row width does not match the header");
  rows_.push_back(std::move(cells));
  return *this;
}

namespace {

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += csv_field(cells[i]);
  }
  out += "\r\n";
}

}  // namespace

std::string CsvTable::render(const RunConfig& run) const {
  std::string out = "# ";
  out += kVersion;
  out += " config_hash=" + run.hash() + " seed=" + std::to_string(run.seed) +
         " config=" + run.config.dump() + "\r\n";
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

std::string render_json(const RunConfig& run, const nlohmann::json& results) {
  const nlohmann::json doc = {{"version", kVersion},
                              {"config", run.config},
                              {"config_hash", run.hash()},
                              {"seed", run.seed},
                              {"results", results}};
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value of "key=" in a space-separated header; the config is always last.
std::string header_value(const std::string& line, const std::string& key, bool to_end) {
  const auto pos = line.find(" " + key + "=");
  if (pos == std::string::npos) throw Error(ErrorCode::ParseError, "missing " + key + " in header");
  const auto start = pos + key.size() + 2;
  if (to_end) return line.substr(start);
  return line.substr(start, line.find(' ', start) - start);
}

}  // namespace

VerifyResult verify_file(const std::filesystem::path& path) {
  const std::string text = read_all(path);
  RunConfig run;
  VerifyResult res;
  try {
    if (text.rfind("# ", 0) == 0) {
      std::string line = text.substr(0, text.find('\n'));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      res.stored_hash = header_value(line, "config_hash", false);
      run.seed = std::stoull(header_value(line, "seed", false));
      run.config = nlohmann::json::parse(header_value(line, "config", true));
    } else {
      const auto doc = nlohmann::json::parse(text);
      res.stored_hash = doc.at("config_hash").get<std::string>();
      run.seed = doc.at("seed").get<std::uint64_t>();
      run.config = doc.at("config");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": malformed seed");
  }
  res.derived_hash = run.hash();
  res.ok = res.derived_hash == res.stored_hash;
  return res;
}

}  // namespace nodal
