#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nodal/errors.hpp"
#include "nodal/measure_io.hpp"

using namespace nodal;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a nodal::Error");
  return ErrorCode::InvalidArgument;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nodal_io_" + name);
}

}  // namespace

TEST_CASE("builtin measure names") {
  CHECK(resolve_measure("cilleruelo").kind == MeasureKind::Cilleruelo);
  CHECK(resolve_measure("tilted").measure.size() == 4);
  CHECK(resolve_measure("uniform:64").measure.size() == 64);
  CHECK(resolve_measure("sigma:0.2:16").measure.size() == 64);
  const auto lat = resolve_measure("lattice:25");
  CHECK(lat.kind == MeasureKind::Lattice);
  CHECK(lat.measure.size() == 12);
}

TEST_CASE("malformed measure specs") {
  CHECK(code_of([] { resolve_measure("uniform"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { resolve_measure("uniform:6"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { resolve_measure("uniform:x"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { resolve_measure("sigma:0.2"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { resolve_measure("sigma:2:4"); }) == ErrorCode::InvalidTheta);
  CHECK(code_of([] { resolve_measure("lattice:3"); }) == ErrorCode::NotRepresentable);
  CHECK(code_of([] { resolve_measure("lattice:1.5"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { resolve_measure("no_such_measure_file.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("number parsing consumes the whole token") {
  CHECK(parse_real("0.25", "x") == 0.25);
  CHECK(parse_real("-1e-3", "x") == -1e-3);
  CHECK(parse_integer("42", "n") == 42);
  CHECK(code_of([] { parse_real("0.25abc", "x"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_integer("4 2", "n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_real("", "x"); }) == ErrorCode::ParseError);
}

TEST_CASE("measure files round trip") {
  const auto mu = sigma_theta(0.15, 5);
  const auto path = temp_path("sigma.json");
  save_measure_file(mu, path);
  const auto back = resolve_measure(path.string());
  CHECK(back.kind == MeasureKind::File);
  REQUIRE(back.measure.size() == mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(back.measure.atoms()[i].angle == mu.atoms()[i].angle);
    CHECK(back.measure.atoms()[i].weight == mu.atoms()[i].weight);
  }
  std::filesystem::remove(path);
}

TEST_CASE("bad measure documents") {
  CHECK(code_of([] { measure_from_json(nlohmann::json::object()); }) == ErrorCode::ParseError);
  CHECK(code_of([] {
          measure_from_json(nlohmann::json{{"atoms", {{{"angle", 0.0}}}}});
        }) == ErrorCode::ParseError);
  const auto path = temp_path("broken.json");
  {
    std::ofstream(path) << "{ not json";
  }
  CHECK(code_of([&] { load_measure_file(path); }) == ErrorCode::ParseError);
  std::filesystem::remove(path);
  CHECK(code_of([] { load_measure_file("/nonexistent/dir/m.json"); }) == ErrorCode::IoError);

  // A lone antipodal pair is rejected unless symmetry checking is skipped.
  const nlohmann::json pair = {{"atoms", {{{"angle", 0.0}, {"weight", 0.5}},
                                          {{"angle", kPi}, {"weight", 0.5}}}}};
  CHECK(code_of([&] { measure_from_json(pair); }) == ErrorCode::AsymmetricMeasure);
  CHECK(measure_from_json(pair, SymmetryCheck::Skip).size() == 2);
}
