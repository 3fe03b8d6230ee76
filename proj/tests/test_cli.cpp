#include "gaugelab/cli.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gauge_lab");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = gaugelab::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / "gauge_lab_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

} // namespace

TEST_CASE("reports carry the schema fields", "[cli]") {
  unsetenv("GIL_SEED");
  auto r = cli({"integrate", "--fn", "t", "--tol", "2^-10", "--deterministic"});
  REQUIRE(r.code == 0);
  auto j = r.report();
  for (const char *key : {"schema", "op", "params", "seed", "residuals", "verdict", "result"}) REQUIRE(j.contains(key));
  REQUIRE(j["schema"] == "gauge-lab/1");
  REQUIRE(j["op"] == "integrate");
  REQUIRE(j["verdict"] == "pass");
  REQUIRE(!j.contains("timestamp"));
  REQUIRE(cli({"integrate", "--fn", "t", "--tol", "2^-10"}).report().contains("timestamp"));
}

TEST_CASE("usage errors exit with 2", "[cli]") {
  unsetenv("GIL_SEED");
  REQUIRE(cli({}).code == 2);
  REQUIRE(cli({"nonsense"}).code == 2);
  REQUIRE(cli({"integrate", "--fn", "nope"}).code == 2);
  REQUIRE(cli({"integrate", "--tol", "0.1"}).code == 2);
  REQUIRE(cli({"integrate", "--R", "0"}).code == 2);
  REQUIRE(cli({"gallery", "3x"}).code == 2);
  // Seeded commands need a seed.
  REQUIRE(cli({"lln", "--fn", "t", "--draws", "100", "--batches", "10"}).code == 2);
  setenv("GIL_SEED", "banana", 1);
  REQUIRE(cli({"integrate", "--fn", "t"}).code == 2);
  unsetenv("GIL_SEED");
}

TEST_CASE("failed checks exit with 1", "[cli]") {
  // A single coarse gauge cannot reach a tiny tolerance.
  auto r = cli({"integrate", "--fn", "t", "--gauge", "const:1/4", "--tol", "2^-30", "--deterministic"});
  REQUIRE(r.code == 1);
  REQUIRE(r.report()["verdict"] == "fail");
}

TEST_CASE("seeded runs are deterministic", "[cli]") {
  unsetenv("GIL_SEED");
  std::vector<std::string> args{"lln", "--fn", "t", "--draws", "500", "--batches", "10", "--seed", "4", "--deterministic"};
  auto a = cli(args), b = cli(args);
  REQUIRE(a.code == b.code);
  REQUIRE(a.out == b.out);
  REQUIRE(a.report()["seed"] == 4);
  setenv("GIL_SEED", "4", 1);
  auto c = cli({"lln", "--fn", "t", "--draws", "500", "--batches", "10", "--deterministic"});
  unsetenv("GIL_SEED");
  REQUIRE(c.report()["result"] == a.report()["result"]);
  auto d = cli({"lln", "--fn", "t", "--draws", "500", "--batches", "10", "--seed", "5", "--deterministic"});
  REQUIRE(d.report()["result"] != a.report()["result"]);
}

TEST_CASE("config files are overridden by flags", "[cli]") {
  auto cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"fn": "poly:0,1", "tol": "2^-8", "R": 4})";
  auto r = cli({"integrate", "--config", cfg.string(), "--tol", "2^-10", "--deterministic"});
  REQUIRE(r.code == 0);
  auto params = r.report()["params"];
  REQUIRE(params["fn"] == "poly:0,1");
  REQUIRE(params["tol"] == "2^-10");
  std::ofstream(cfg) << R"({"colour": "blue"})";
  REQUIRE(cli({"integrate", "--config", cfg.string()}).code == 2);
  REQUIRE(cli({"integrate", "--config", scratch("missing.json").string()}).code == 2);
}

TEST_CASE("out and csv files are written", "[cli]") {
  auto out = scratch("report.json"), csv = scratch("trace.csv");
  fs::remove(out);
  fs::remove(csv);
  auto r = cli({"integrate", "--fn", "t", "--tol", "2^-10", "--out", out.string(), "--csv", csv.string(), "--deterministic"});
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("integrate: pass") != std::string::npos);
  auto j = json::parse(slurp(out));
  REQUIRE(j["verdict"] == "pass");
  auto table = slurp(csv);
  REQUIRE(!table.empty());
  REQUIRE(table.find(',') != std::string::npos);
  REQUIRE(std::count(table.begin(), table.end(), '\n') >= 2);
}

TEST_CASE("commands pass on small inputs", "[cli]") {
  unsetenv("GIL_SEED");
  REQUIRE(cli({"bochner", "--fn", "t", "--deterministic"}).code == 0);
  REQUIRE(cli({"bochner", "--fn", "3f", "--grid", "6", "--deterministic"}).code == 0);
  REQUIRE(cli({"abscont", "--fn", "3f", "--grid", "5", "--deterministic"}).code == 0);
  REQUIRE(cli({"pettis", "--fn", "poly:1,2,3", "--deterministic"}).code == 0);
  REQUIRE(cli({"vitali", "--fn", "spike", "--n-max", "8", "--deterministic"}).code == 0);
  REQUIRE(cli({"stability", "--samples", "20000", "--seed", "1", "--deterministic"}).code == 0);
  REQUIRE(cli({"gallery", "3e", "--seed", "1", "--deterministic"}).code == 0);
  auto g = cli({"gallery", "3g", "--R", "8", "--N", "8", "--deterministic"});
  REQUIRE(g.code == 0);
  REQUIRE(g.report()["op"] == "gallery 3g");
}
