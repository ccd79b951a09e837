#pragma once

// Measure specs: builtin names and the JSON atom-list format.
//
// Builtin grammar:
//   cilleruelo | tilted | uniform:<n> | sigma:<theta>:<n> | lattice:<m>
// Anything else is read as a path to {"atoms":[{"angle":..,"weight":..},..]}.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nodal/lattice_spectral.hpp"

namespace nodal {

enum class MeasureKind { Cilleruelo, Tilted, Uniform, Sigma, Lattice, File };

struct NamedMeasure {
  SpectralMeasure measure;
  MeasureKind kind;
  std::string spec;
};

nlohmann::json measure_to_json(const SpectralMeasure& mu);
SpectralMeasure measure_from_json(const nlohmann::json& doc,
                                  SymmetryCheck check = SymmetryCheck::Required);

SpectralMeasure load_measure_file(const std::filesystem::path& path,
                                  SymmetryCheck check = SymmetryCheck::Required);
void save_measure_file(const SpectralMeasure& mu, const std::filesystem::path& path);

// Throws ParseError for malformed builtin specs and IoError for unreadable
// files.
NamedMeasure resolve_measure(const std::string& spec,
                             SymmetryCheck check = SymmetryCheck::Required);

// Parses the whole string as a number; throws ParseError naming `what`.
double parse_real(const std::string& text, const std::string& what);
long long parse_integer(const std::string& text, const std::string& what);

}  // namespace nodal
