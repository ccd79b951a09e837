#include "nodal/measure_io.hpp"

#include <charconv>
#include <fstream>
#include <vector>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

double parse_real(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last)
    throw Error(ErrorCode::ParseError, what + ": expected a real number, got '" + text + "'");
  return value;
}

long long parse_integer(const std::string& text, const std::string& what) {
  long long value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last)
    throw Error(ErrorCode::ParseError, what + ": expected an integer, got '" + text + "'");
  return value;
}

nlohmann::json measure_to_json(const SpectralMeasure& mu) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"angle", a.angle}, {"weight", a.weight}});
  return {{"atoms", atoms}};
}

SpectralMeasure measure_from_json(const nlohmann::json& doc, SymmetryCheck check) {
  if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_array())
    throw Error(ErrorCode::ParseError, "measure document needs an \"atoms\" array");
  std::vector<Atom> atoms;
  for (const auto& item : doc["atoms"]) {
    if (!item.is_object() || !item.contains("angle") || !item.contains("weight") ||
        !item["angle"].is_number() || !item["weight"].is_number())
      throw Error(ErrorCode::ParseError, "each atom needs numeric \"angle\" and \"weight\"");
    atoms.push_back({item["angle"].get<double>(), item["weight"].get<double>()});
  }
  return SpectralMeasure(std::move(atoms), check);
}

SpectralMeasure load_measure_file(const std::filesystem::path& path, SymmetryCheck check) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open measure file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return measure_from_json(doc, check);
}

void save_measure_file(const SpectralMeasure& mu, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << measure_to_json(mu).dump(2) << '\n';
}

NamedMeasure resolve_measure(const std::string& spec, SymmetryCheck check) {
  if (spec == "cilleruelo") return {cilleruelo_measure(), MeasureKind::Cilleruelo, spec};
  if (spec == "tilted") return {tilted_cilleruelo_measure(), MeasureKind::Tilted, spec};

  const auto parts = split(spec, ':');
  const std::string& head = parts.front();
  if (head == "uniform") {
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "expected uniform:<n>");
    const auto n = parse_integer(parts[1], "uniform atom count");
    if (n < 4 || n % 4 != 0 || n > 1'000'000)
      throw Error(ErrorCode::InvalidArgument, "uniform:<n> needs n a positive multiple of 4");
    return {uniform_measure(static_cast<int>(n)), MeasureKind::Uniform, spec};
  }
  if (head == "sigma") {
    if (parts.size() != 3) throw Error(ErrorCode::ParseError, "expected sigma:<theta>:<n>");
    const double theta = parse_real(parts[1], "sigma theta");
    const auto n = parse_integer(parts[2], "sigma atoms per arc");
    if (n < 1 || n > 1'000'000)
      throw Error(ErrorCode::InvalidArgument, "sigma atoms per arc must be in [1, 1e6]");
    return {sigma_theta(theta, static_cast<int>(n)), MeasureKind::Sigma, spec};
  }
  if (head == "lattice") {
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "expected lattice:<m>");
    const auto m = parse_integer(parts[1], "lattice m");
    return {spectral_measure_of(enumerate_lattice_points(m)), MeasureKind::Lattice, spec};
  }
  if (!std::filesystem::exists(spec))
    throw Error(ErrorCode::ParseError, "unknown measure '" + spec + "' (not a builtin name or file)");
  return {load_measure_file(spec, check), MeasureKind::File, spec};
}

}  // namespace nodal
