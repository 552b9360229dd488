#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "commands.hpp"
#include "config.hpp"
#include "testing.hpp"
#include "toml_lite.hpp"
#include "trace_io.hpp"

using namespace fixcalc;
using namespace fixcalc::cli;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fixcalc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fixcalc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string error_text(const std::string& toml) {
  try {
    load_config(parse_toml(toml));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("config was accepted");
  return {};
}

const char* kLines = R"(
name = "lines"
seed = 4
methods = ["DR", "RASPC"]
[sets.A]
kind = "hyperplane"
normal = [0.0, 1.0]
offset = 0.0
[sets.B]
kind = "hyperplane"
normal = [-0.5, 0.8660254037844386]
offset = 0.0
[problem]
A = "A"
B = "B"
[params]
lambda = 3.0
mu = 1.0
[stopping]
residual_tol = 1e-8
max_iters = 500
[start]
reference = [0.0, 0.0]
)";

std::string with_output(const std::string& base, const fs::path& dir) {
  return base + "[output]\ncsv = \"" + (dir / "t_{method}.csv").string() + "\"\njson = \"" +
         (dir / "t_{method}.json").string() + "\"\n";
}

}  // namespace

TEST_CASE("TOML subset") {
  const auto doc = parse_toml(R"(
# comment
title = "a \"quoted\" name"  # trailing comment
count = 1_000
ratio = -2.5e-3
flag = true
grid = [[1, 2],
        [3.5, 4]]   # multi-line
[outer.inner]
key = 'single'
)");
  CHECK(doc["title"] == "a \"quoted\" name");
  CHECK(doc["count"] == 1000);
  CHECK(doc["ratio"].get<double>() == -2.5e-3);
  CHECK(doc["flag"] == true);
  CHECK(doc["grid"][1][0].get<double>() == 3.5);
  CHECK(doc["outer"]["inner"]["key"] == "single");
  CHECK_FALSE(doc["outer"].contains("__defined__"));
}

TEST_CASE("TOML errors carry line numbers") {
  auto message = [](const char* text) {
    try {
      parse_toml(text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      return std::string(e.what());
    }
    FAIL("parse succeeded");
    return std::string();
  };
  CHECK(message("a = 1\nb 2\n").find("line 2") != std::string::npos);
  CHECK(message("a = \"open\n").find("line 1") != std::string::npos);
  CHECK(message("[t]\nx = 1\n[t]\n").find("line 3") != std::string::npos);
  CHECK(message("a = 1\na = 2\n").find("line 2") != std::string::npos);
  CHECK(message("a = [1, 2\n").find("line") != std::string::npos);
}

TEST_CASE("config errors name the field") {
  const std::string base = kLines;
  CHECK(error_text(base + "[params2]\nx = 1\n").find("params2") != std::string::npos);
  std::string bad = base;
  bad.replace(bad.find("lambda = 3.0"), 12, "lambda = \"three\"");
  CHECK(error_text(bad).find("params.lambda") != std::string::npos);
  std::string incompatible = base;
  incompatible.replace(incompatible.find("mu = 1.0"), 8, "mu = 2.0");
  incompatible.replace(incompatible.find("lambda = 3.0"), 12, "lambda = 2.0");
  CHECK(error_text(incompatible).find("lambda") != std::string::npos);
  std::string unknown_method = base;
  unknown_method.replace(unknown_method.find("\"RASPC\""), 7, "\"Newton\"");
  CHECK(error_text(unknown_method).find("methods") != std::string::npos);
  std::string missing_set = base;
  missing_set.replace(missing_set.find("B = \"B\""), 7, "B = \"C\"");
  CHECK(error_text(missing_set).find("problem.B") != std::string::npos);
}

TEST_CASE("trace CSV") {
  const auto h = PrimitiveSet::hyperplane(Point{1.0, 1.0}, 1.0);
  const IterationTrace t = iterate(relax(projection(h), 0.3), StepRule{}, StoppingRule{1e-3, 100, std::nullopt},
                                   Point{0.1, 2.0 / 3.0}, Point{0.5, 0.5});
  const std::string csv = trace_csv(t);
  std::istringstream in(csv);
  std::string header, first, line, last;
  std::getline(in, header);
  CHECK(header == "k,residual,step,dist_to_ref,x_0,x_1");
  std::getline(in, first);
  CHECK(first.rfind("0,", 0) == 0);
  CHECK(first.find("0.66666666666666663") != std::string::npos);
  while (std::getline(in, line)) last = line;
  // The final row has no step.
  const auto c1 = last.find(',');
  const auto c2 = last.find(',', c1 + 1);
  CHECK(last[c2 + 1] == ',');
  // 17 significant digits round-trip.
  const double r = std::stod(first.substr(2, first.find(',', 2) - 2));
  CHECK(r == t.rows[0].residual);
}

TEST_CASE("params queries") {
  CliResult r = invoke({"params", "nu", "3", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "4\n");
  r = invoke({"params", "gamma", "-1", "-1"});
  CHECK(r.out == "-0.5\n");
  r = invoke({"params", "chain", "-2", "0.4", "-2"});
  CHECK(r.out == "0.6667\n");
  r = invoke({"params", "nu", "2", "2"});
  CHECK(r.code == 1);
  CHECK(r.out.find("no solution") != std::string::npos);
  r = invoke({"params", "--digits", "10", "nu", "1", "1"});
  CHECK(r.out == "1.333333333\n");
  r = invoke({"params", "nu-grid", "--min", "0.1", "--max", "3.9", "--step", "0.1"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("lambda,mu,nu_star\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 39 * 39);
  r = invoke({"params", "nu"});
  CHECK(r.code == 2);
}

TEST_CASE("run writes identical traces on repeated runs") {
  const fs::path dir = scratch_dir("repeat");
  const fs::path cfg = dir / "lines.toml";
  std::ofstream(cfg) << with_output(std::string(kLines), dir);

  CliResult r = invoke({"run", cfg.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("DR: status=Converged") != std::string::npos);
  CHECK(r.out.find("RASPC: status=Converged") != std::string::npos);
  const std::string csv1 = slurp(dir / "t_DR.csv");
  const std::string json1 = slurp(dir / "t_RASPC.json");
  CHECK_FALSE(csv1.empty());
  r = invoke({"run", cfg.string(), "--parallel"});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "t_DR.csv") == csv1);
  CHECK(slurp(dir / "t_RASPC.json") == json1);
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().string().find(".tmp") == std::string::npos);

  // The seed drives the random start point; FP_SEED overrides it.
  ::setenv("FP_SEED", "77", 1);
  r = invoke({"run", cfg.string()});
  const std::string csv77 = slurp(dir / "t_DR.csv");
  invoke({"run", cfg.string()});
  CHECK(slurp(dir / "t_DR.csv") == csv77);
  ::unsetenv("FP_SEED");
  CHECK(csv77 != csv1);
  ::setenv("FP_SEED", "x7", 1);
  CHECK(invoke({"run", cfg.string()}).code == 2);
  ::unsetenv("FP_SEED");
  fs::remove_all(dir);
}

TEST_CASE("run exit codes") {
  const fs::path dir = scratch_dir("exit");
  const fs::path cfg = dir / "short.toml";
  std::string text = with_output(kLines, dir);
  text.replace(text.find("max_iters = 500"), 15, "max_iters = 3");
  std::ofstream(cfg) << text;
  CHECK(invoke({"run", cfg.string()}).code == 1);
  {
    std::string allowed = text;
    allowed.replace(allowed.find("max_iters = 3"), 13, "max_iters = 3\nallow_max_iters = true");
    std::ofstream(cfg) << allowed;
  }
  CHECK(invoke({"run", cfg.string()}).code == 0);

  std::ofstream(cfg) << "name = 3\n";
  const CliResult bad = invoke({"run", cfg.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("name") != std::string::npos);
  CHECK(invoke({"run", (dir / "missing.toml").string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("verify and counterexample subcommands") {
  const fs::path dir = scratch_dir("verify");
  const fs::path cfg = dir / "v.toml";
  std::ofstream(cfg) << R"(
name = "v"
seed = 3
methods = ["Custom"]
[sets.H]
kind = "hyperplane"
normal = [0.0, 1.0]
offset = 0.0
[operator]
op = "compose"
[operator.outer]
op = "relax"
lambda = 3.0
[operator.outer.arg]
op = "projection"
set = "H"
[operator.inner]
op = "relax"
lambda = 1.6
[operator.inner.arg]
op = "projection"
set = "H"
[verify]
claim = "RelaxedCutter"
parameter = 1.0
samples = 500
fix_points = [[0.0, 0.0], [1.0, 0.0]]
)";
  CliResult r = invoke({"verify", cfg.string()});
  CHECK(r.code == 1);
  const auto report = nlohmann::json::parse(r.out);
  CHECK(report["verdict"] == "ViolationFound");
  CHECK(report["worst_slack"].get<double>() < 0.0);

  r = invoke({"counterexample", "sharpness"});
  CHECK(r.code == 0);
  const auto s = nlohmann::json::parse(r.out);
  CHECK(s["slack"].get<double>() <= -0.05);
  r = invoke({"counterexample", "fixv", "--lambda", "2", "--mu", "2"});
  CHECK(nlohmann::json::parse(r.out)["fixed_point_found"] == false);
  r = invoke({"counterexample", "fix-collapse", "--lambda", "3", "--mu", "1.5"});
  CHECK(nlohmann::json::parse(r.out)["identity_holds"] == true);
  r = invoke({"counterexample", "not-relaxed-cutter", "--lambda", "3", "--mu", "1.6"});
  CHECK(nlohmann::json::parse(r.out)["inner"].get<double>() < 0.0);
  fs::remove_all(dir);
}
