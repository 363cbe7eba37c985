#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "tracestab/cli.hpp"

using namespace tracestab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tracestab-test-" + name);
  fs::remove_all(dir);
  return dir;
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "tracestab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

RunConfig custom_config() {
  RunConfig c;
  c.command = Command::spectrum;
  c.weight = "custom";
  tracestab::spectrum::CustomTable t;
  for (double r = 0.01; r < 200.0; r *= 1.2) {
    t.radii.push_back(r);
    t.values.push_back(std::pow(1 + r * r, -0.75) * (1 + 0.5 * std::exp(-r)));
  }
  t.tail_exponent = 1.5;
  c.custom = t;
  c.K = 8;
  return c;
}

}  // namespace

TEST_CASE("validate") {
  RunConfig c;
  c.n = 2;
  c.s = 1.0;
  CHECK(has(validate(c), "s < n/2 required"));
  RunConfig w;
  w.command = Command::spectrum;
  w.tau = 1.0;
  CHECK(has(validate(w), "tau > 1 required"));
  CHECK(validate(RunConfig{}).empty());
  RunConfig r;
  r.command = Command::verify_trace;
  CHECK(has(validate(r), "seed required for randomized commands"));
  r.seed = 1;
  CHECK(validate(r).empty());
  RunConfig ce;
  ce.command = Command::counterexample;
  ce.deltas = {0.7};
  CHECK_FALSE(validate(ce).empty());
  RunConfig tp;
  tp.command = Command::transport_probe;
  tp.seed = 1;
  tp.n = 1;
  tp.L = 8;
  CHECK(has(validate(tp), "L >= 10 required"));
}

TEST_CASE("constants command") {
  const auto dir = scratch("constants");
  std::string out;
  CHECK(invoke({"constants", "--n", "3", "--s", "1", "--weight", "homogeneous", "--output-dir", dir.string()}, &out) == 0);
  CHECK(out.find("C(w)^2 = lambda_0 = 1\n") != std::string::npos);
  CHECK(out.find("C'(w) = lambda_0 - lambda_star = 0.666666666667") != std::string::npos);
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("verify-trace command") {
  const auto dir = scratch("verify");
  std::string out;
  CHECK(invoke({"verify-trace", "--n", "3", "--s", "1", "--trials", "1000", "--seed", "7", "--output-dir", dir.string()}, &out) == 0);
  CHECK(out.find("1000/1000 stability checks pass") != std::string::npos);
}

TEST_CASE("counterexample command") {
  const auto dir = scratch("counter");
  std::string out;
  CHECK(invoke({"counterexample", "--r", "1.5", "--sigma", "2", "--deltas", "0.1,0.01,0.001", "--output-dir", dir.string()}, &out) == 0);
  CHECK(out.find("strictly decreasing") != std::string::npos);
  const auto csv = slurp(dir / "counterexample.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("exit codes") {
  std::string err;
  CHECK(invoke({"verify-trace", "--n", "3"}, nullptr, &err) == 2);
  CHECK(err.find("seed required") != std::string::npos);
  CHECK(invoke({"constants", "--n", "2", "--s", "1"}, nullptr, &err) == 2);
  CHECK(err.find("s < n/2 required") != std::string::npos);
  CHECK(invoke({"nonsense"}) == 2);
  CHECK(invoke({"constants", "--bogus", "1"}) == 2);
  CHECK(invoke({"counterexample", "--deltas", "0.1,abc"}) == 2);
  // deltas listed in increasing order: the ratio column grows and the decay check fails
  CHECK(invoke({"counterexample", "--deltas", "0.001,0.1", "--output-dir", scratch("fail").string()}) == 1);
}

TEST_CASE("config file mirrors flags, flags win") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"command": "counterexample", "r": 1.2, "sigma": 2.0, "deltas": [0.1, 0.01], "format": "csv"})";
  }
  CHECK(invoke({"counterexample", "--config", (dir / "cfg.json").string(), "--r", "1.8",
                "--output-dir", (dir / "out").string()}) == 0);
  const auto report = slurp(dir / "out" / "report.csv");
  CHECK(report.rfind("anchor,value,tolerance,pass,description\n", 0) == 0);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"command": "counterexample", "colour": 3})";
  }
  CHECK(invoke({"counterexample", "--config", (dir / "bad.json").string()}) == 2);
  {
    std::ofstream f(dir / "other.json");
    f << R"({"command": "constants"})";
  }
  CHECK(invoke({"counterexample", "--config", (dir / "other.json").string()}) == 2);
}

TEST_CASE("environment variable sets the default output directory") {
  const auto dir = scratch("env");
  ::setenv("TRACESTAB_OUTPUT_DIR", dir.string().c_str(), 1);
  CHECK(invoke({"counterexample"}) == 0);
  ::unsetenv("TRACESTAB_OUTPUT_DIR");
  CHECK(fs::exists(dir / "counterexample.csv"));
}

TEST_CASE("determinism: identical configuration gives byte-identical reports") {
  RunConfig c;
  c.command = Command::verify_trace;
  c.seed = 99;
  c.trials = 40;
  c.format = "csv";
  std::ostringstream sink;
  c.output_dir = scratch("det-a").string();
  const auto a = run(c, sink);
  c.output_dir = scratch("det-b").string();
  const auto b = run(c, sink);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(slurp(a.files[i]) == slurp(b.files[i]));

  RunConfig d;
  d.command = Command::duality_sweep;
  d.seed = 5;
  d.operators = 6;
  d.trials = 100;
  d.output_dir = scratch("det-c").string();
  const auto x = run(d, sink);
  d.output_dir = scratch("det-d").string();
  const auto y = run(d, sink);
  for (std::size_t i = 0; i < x.files.size(); ++i) CHECK(slurp(x.files[i]) == slurp(y.files[i]));
}

TEST_CASE("anchor coverage: the emitted anchors are exactly the catalog") {
  std::set<std::string> seen;
  std::ostringstream sink;
  auto collect = [&](RunConfig c, const std::string& name) {
    c.output_dir = scratch("cover-" + name).string();
    const auto r = run(c, sink);
    CHECK_MESSAGE(r.exit_code == 0, name);
    for (const auto& line : r.checks) {
      CHECK(!line.anchor.empty());
      seen.insert(line.anchor);
    }
  };
  RunConfig sp;
  sp.command = Command::spectrum;
  sp.tau = 2.0;
  collect(sp, "spectrum");
  collect(custom_config(), "custom");
  collect(RunConfig{}, "constants");
  RunConfig vt;
  vt.command = Command::verify_trace;
  vt.seed = 1;
  vt.trials = 30;
  collect(vt, "verify");
  RunConfig ds;
  ds.command = Command::duality_sweep;
  ds.seed = 2;
  ds.operators = 4;
  ds.trials = 200;
  collect(ds, "duality");
  RunConfig ce;
  ce.command = Command::counterexample;
  collect(ce, "counter");
  RunConfig tp;
  tp.command = Command::transport_probe;
  tp.n = 1;
  tp.seed = 3;
  tp.samples = 2;
  tp.directions = 1;
  collect(tp, "transport");

  const auto& catalog = anchor_catalog();
  CHECK(seen == std::set<std::string>(catalog.begin(), catalog.end()));
}
