#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nodal/errors.hpp"
#include "nodal/output.hpp"

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
  return std::filesystem::temp_directory_path() / ("nodal_out_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig sample_run() {
  RunConfig run;
  run.config = {{"measure", "cilleruelo"}, {"u", 0.0}, {"L", 10.0}, {"samples", 1000}};
  run.seed = 42;
  return run;
}

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config hash is canonical and sensitive") {
  const auto run = sample_run();
  CHECK(run.hash().size() == 16);
  RunConfig reordered;
  reordered.seed = 42;
  reordered.config = nlohmann::json::object();
  reordered.config["samples"] = 1000;
  reordered.config["L"] = 10.0;
  reordered.config["u"] = 0.0;
  reordered.config["measure"] = "cilleruelo";
  CHECK(reordered.hash() == run.hash());
  auto other_seed = run;
  other_seed.seed = 43;
  CHECK(other_seed.hash() != run.hash());
  auto other_value = run;
  other_value.config["L"] = 10.5;
  CHECK(other_value.hash() != run.hash());
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(0.1 + 0.2) == "0.3");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(2.2508) == "2.2508");
}

TEST_CASE("CSV quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_field("") == "");
}

TEST_CASE("CSV tables") {
  CsvTable table({"quantity", "value"});
  table.row({"mean", CsvTable::cell(2.25)}).row({"P(Z=0), exact", CsvTable::cell(3LL)});
  CHECK(code_of([&] { table.row({"only one"}); }) == ErrorCode::InvalidArgument);
  const auto run = sample_run();
  const auto text = table.render(run);
  const std::string expected_first = "# nodal_lab 0.1.0 config_hash=" + run.hash() +
                                     " seed=42 config=" + run.config.dump() + "\r\n";
  CHECK(text.rfind(expected_first, 0) == 0);
  CHECK(text.substr(expected_first.size()) ==
        "quantity,value\r\nmean,2.25\r\n\"P(Z=0), exact\",3\r\n");
}

TEST_CASE("JSON documents have sorted top-level keys") {
  const auto run = sample_run();
  const auto doc = nlohmann::json::parse(render_json(run, {{"mean", 1.0}}));
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"config", "config_hash", "results", "seed", "version"});
  CHECK(doc["version"] == std::string(kVersion));
  CHECK(doc["config_hash"] == run.hash());
}

TEST_CASE("artifacts verify and detect tampering") {
  const auto run = sample_run();
  const auto csv = temp_path("table.csv");
  CsvTable table({"k", "p"});
  table.row({"0", CsvTable::cell(0.5)});
  write_text_file(csv, table.render(run));
  auto res = verify_file(csv);
  CHECK(res.ok);
  CHECK(res.stored_hash == run.hash());

  std::string text = slurp(csv);
  const auto pos = text.find("\"L\":10.0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"L\":11.0");
  write_text_file(csv, text);
  res = verify_file(csv);
  CHECK_FALSE(res.ok);
  CHECK(res.derived_hash != res.stored_hash);

  const auto js = temp_path("result.json");
  write_text_file(js, render_json(run, nlohmann::json::array({1, 2})));
  CHECK(verify_file(js).ok);
  auto doc = nlohmann::json::parse(slurp(js));
  doc["seed"] = 7;
  write_text_file(js, doc.dump());
  CHECK_FALSE(verify_file(js).ok);

  write_text_file(js, "# nodal_lab 0.1.0 seed=1\r\n");
  CHECK(code_of([&] { verify_file(js); }) == ErrorCode::ParseError);
  write_text_file(js, "{\"seed\": 1}");
  CHECK(code_of([&] { verify_file(js); }) == ErrorCode::ParseError);
  CHECK(code_of([] { verify_file("/nonexistent/file.csv"); }) == ErrorCode::IoError);
  CHECK(code_of([&] { write_text_file("/nonexistent/dir/x.csv", "x"); }) == ErrorCode::IoError);
  std::filesystem::remove(csv);
  std::filesystem::remove(js);
}
