#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nodal/gaussian_fields.hpp"
#include "nodal/zero_counter.hpp"

using namespace nodal;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + NODAL_LAB_PATH + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "nodal_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("lattice summary") {
  const auto r = run_cli("lattice --m 2917");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("r2=8") != std::string::npos);
  CHECK(r.output.find("nu4=0.997258") != std::string::npos);
}

TEST_CASE("validation failures exit with status 1 and name the flag") {
  struct Case {
    const char* args;
    const char* needle;
  };
  const Case cases[] = {
      {"moments --L -1", "--L"},
      {"sample --grid --resolution 16", "--resolution"},
      {"--workers 0 moments", "--workers"},
      {"lattice", "--m"},
      {"lattice --m abc", "--m"},
      {"lattice --m 3", "3"},
      {"moments --measure uniform:6", "uniform"},
      {"persistence --samples 0", "--samples"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.args);
    const auto r = run_cli(c.args);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find(c.needle) != std::string::npos);
  }
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("numerical failures exit with status 2") {
  const auto r = run_cli("kacrice --measure cilleruelo --u 0 --L 7");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("DegenerateCovariance") != std::string::npos);
}

TEST_CASE("output does not depend on the worker count") {
  const std::string common =
      "moments --measure lattice:65 --u 0.41 --L 1.3 --samples 2000 --seed 11 --out ";
  const auto base = scratch("w1.csv");
  REQUIRE(run_cli("--workers 1 " + common + base.string()).exit_code == 0);
  const std::string reference = slurp(base);
  CHECK(reference.rfind("# nodal_lab 0.1.0 config_hash=", 0) == 0);
  for (int w : {4, 16}) {
    const auto p = scratch("w" + std::to_string(w) + ".csv");
    REQUIRE(run_cli("--workers " + std::to_string(w) + " " + common + p.string()).exit_code == 0);
    CHECK(slurp(p) == reference);
  }
  const auto env = scratch("env.csv");
  REQUIRE(run_cli(common + env.string(), "NODAL_LAB_WORKERS=8").exit_code == 0);
  CHECK(slurp(env) == reference);

  const auto json_a = scratch("a.json");
  const auto json_b = scratch("b.json");
  const std::string pers = "persistence --measure cilleruelo --u 0,0.785398163397448 --L 3,9 "
                           "--samples 3000 --seed 2 --out ";
  REQUIRE(run_cli("--workers 1 " + pers + json_a.string()).exit_code == 0);
  REQUIRE(run_cli("--workers 16 " + pers + json_b.string()).exit_code == 0);
  CHECK(slurp(json_a) == slurp(json_b));
}

TEST_CASE("hash verification of written artifacts") {
  const auto p = scratch("verify.csv");
  REQUIRE(run_cli("moments --measure cilleruelo --u 0 --L 5 --samples 300 --out " + p.string())
              .exit_code == 0);
  auto r = run_cli("--verify " + p.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verified") != std::string::npos);

  std::string text = slurp(p);
  const auto pos = text.find("\"samples\":300");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 13, "\"samples\":301");
  std::ofstream(p, std::ios::binary) << text;
  r = run_cli("--verify " + p.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("MISMATCH") != std::string::npos);

  r = run_cli("--verify " + scratch("missing.csv").string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("missing.csv") != std::string::npos);
}

TEST_CASE("persistence table for the axis direction") {
  const auto p = scratch("persist.csv");
  const auto r = run_cli("persistence --measure cilleruelo --u 0 --L 10 --samples 100000 --seed 7 "
                         "--out " + p.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(slurp(p));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == "u");
  CHECK(rows[0][2] == "persistence");
  const double value = std::stod(rows[1][2]);
  const double se = std::stod(rows[1][3]);
  CHECK(std::fabs(value - (1.0 - kSqrt2 / 2)) <= 3.0 * se);
  CHECK(std::stod(rows[1][6]) == doctest::Approx(1.0 - kSqrt2 / 2));
}

TEST_CASE("Kac-Rice table in the degenerate direction") {
  const auto p = scratch("kr.csv");
  const auto r = run_cli("kacrice --measure lattice:1 --u 0.7853981634 --L 0.05 --out " + p.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(slurp(p));
  REQUIRE(rows.size() == 2);
  const auto& head = rows[0];
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return i;
    FAIL("missing column " << name);
    return std::size_t{0};
  };
  CHECK(std::stod(rows[1][col("second_factorial")]) == 0.0);
  CHECK(std::stod(rows[1][col("degenerate_asymptotic")]) ==
        doctest::Approx(std::pow(0.05, 5) * kSqrt2 * std::pow(kPi, 4) / 450.0));
}

TEST_CASE("nodal grids") {
  const auto p = scratch("grid.csv");
  auto r = run_cli("sample --measure cilleruelo --grid --resolution 64 --seed 3 --out " +
                   p.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(slurp(p));
  REQUIRE(rows.size() == 1 + 64 * 64);
  CHECK(rows[0] == std::vector<std::string>{"x", "y", "value"});
  const auto doc = nlohmann::json::parse(slurp(p.string() + ".meta.json"));
  CHECK(doc["seed"] == 3);
  const auto& meta = doc["results"];
  REQUIRE(meta.contains("crossing_lines"));
  // The reported crossing line keeps the field's sign along its whole length.
  const auto field = field_from_json(meta["field"]);
  const double pos = meta["crossing_lines"]["alpha_positive"].get<double>();
  const bool vertical = meta["crossing_lines"]["orientation"] == "vertical";
  for (int j = 0; j < 100; ++j) {
    const double s = kTwoPi * j / 100.0;
    CHECK(field.evaluate(vertical ? Vec2{pos, s} : Vec2{s, pos}) > 0.0);
  }

  const auto zero_field = scratch("zero_field.json");
  std::ofstream(zero_field) << field_to_json(cilleruelo_field(0.0, 0.0, 0.0, 0.0)).dump();
  const auto zp = scratch("zero_grid.csv");
  r = run_cli("sample --field " + zero_field.string() + " --grid --resolution 32 --out " +
              zp.string());
  REQUIRE(r.exit_code == 0);
  const auto zrows = csv_rows(slurp(zp));
  REQUIRE(zrows.size() == 1 + 32 * 32);
  for (std::size_t i = 1; i < zrows.size(); ++i) CHECK(std::stod(zrows[i][2]) == 0.0);

  r = run_cli("sample --grid --out /nonexistent/dir/grid.csv");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("/nonexistent/dir/grid.csv") != std::string::npos);
}

TEST_CASE("zero locations export") {
  const auto p = scratch("zeros.csv");
  const auto r = run_cli("sample --measure cilleruelo --u 0.785398163397448 --L 5 --samples 50 "
                         "--out " + p.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(slurp(p));
  CHECK(rows[0] == std::vector<std::string>{"sample_id", "t"});
  std::vector<int> per_sample(50, 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][1]);
    CHECK(t >= 0.0);
    CHECK(t <= 5.0);
    ++per_sample[static_cast<std::size_t>(std::stoi(rows[i][0]))];
  }
  for (int c : per_sample) CHECK((c == 1 || c == 2));
}

TEST_CASE("coupling modes") {
  const auto p = scratch("tail.csv");
  auto r = run_cli("coupling --samples 200 --R 5,10 --out " + p.string());
  REQUIRE(r.exit_code == 0);
  CHECK(csv_rows(slurp(p)).size() == 3);
  r = run_cli("coupling --transfer --kernel-gap");
  CHECK(r.exit_code == 1);
  r = run_cli("coupling --transfer --u 0.3 --L 10 --samples 10");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("RegimeViolation") != std::string::npos);
  r = run_cli("coupling --grid-step 0.5 --samples 10");
  CHECK(r.exit_code == 1);
}
