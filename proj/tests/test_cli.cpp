#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "khess/cli.hpp"
#include "khess/config.hpp"
#include "khess/error.hpp"

using namespace khess;
namespace fs = std::filesystem;

namespace {

const std::string kExamples = KHESS_EXAMPLES_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "khess");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("khess_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

const char* kProblem = R"(
[problem]
N = 3
k1 = 1
k2 = 1
a1 = 1
a2 = 1
b1 = 0
b2 = 0
p1 = 1
p2 = 1
)";

}  // namespace

TEST_CASE("ini parsing") {
  const auto doc = parse_ini("# comment\n[a]\nx = 1\n; other\n y=two words \n[b]\n");
  CHECK(doc.at("a").at("x") == "1");
  CHECK(doc.at("a").at("y") == "two words");
  CHECK(doc.at("b").empty());
  CHECK_THROWS_AS(parse_ini("x = 1\n"), UsageError);
  CHECK_THROWS_AS(parse_ini("[a]\nx = 1\nx = 2\n"), UsageError);
  CHECK_THROWS_AS(parse_ini("[a\n"), UsageError);
  CHECK_THROWS_AS(parse_ini("[a]\njunk\n"), UsageError);
}

TEST_CASE("run config") {
  const RunConfig cfg = parse_run_config(std::string(kProblem) + "f1 = 1\nf2 = u+v\n");
  CHECK(cfg.problem.f2 == "u+v");
  CHECK(cfg.numeric.nodes == 401);
  CHECK(cfg.numeric.grid == "uniform");
  CHECK(cfg.output.wants("csv"));
  CHECK_FALSE(cfg.sweep.has_value());

  CHECK_THROWS_AS(parse_run_config(kProblem), UsageError);  // f1, f2 missing
  CHECK_THROWS_AS(parse_run_config(std::string(kProblem) + "f1 = 1\nf2 = 1\nzeta = 2\n"), UsageError);
  CHECK_THROWS_AS(parse_run_config(std::string(kProblem) + "f1 = 1\nf2 = 1\n[numeric]\nnodes = many\n"), UsageError);
  CHECK_THROWS_AS(parse_run_config(std::string(kProblem) + "f1 = 1\nf2 = 1\n[numeric]\ngrid = spiral\n"), UsageError);
  CHECK_THROWS_AS(parse_run_config(std::string(kProblem) + "f1 = 1\nf2 = 1\n[sweep]\nparameter = a1\nvalues =\n"),
                  UsageError);
  CHECK_THROWS_AS(parse_run_config(std::string(kProblem) + "f1 = 1\nf2 = 1\n[extra]\n"), UsageError);
}

TEST_CASE("sweep parameter paths") {
  RunConfig cfg = parse_run_config(std::string(kProblem) + "f1 = preset:sum_power(1, 2)\nf2 = 1\n");
  CHECK(apply_sweep_value(cfg, "a1", 3.0).problem.a1 == 3.0);
  CHECK(apply_sweep_value(cfg, "k2", 2.0).problem.k2 == 2);
  CHECK(apply_sweep_value(cfg, "f1.gamma", 1.5).problem.f1 == "preset:sum_power(1, 1.5)");
  CHECK_THROWS_AS(apply_sweep_value(cfg, "f1.beta", 1.0), UsageError);
  CHECK_THROWS_AS(apply_sweep_value(cfg, "f2.c", 1.0), UsageError);  // not a preset
  CHECK_THROWS_AS(apply_sweep_value(cfg, "k1", 1.5), UsageError);
  CHECK_THROWS_AS(apply_sweep_value(cfg, "omega", 1.0), UsageError);
}

TEST_CASE("classify the constant Laplacian example") {
  const fs::path out = scratch("classify");
  const Run r = run({"classify", kExamples + "/laplace_const.cfg", "--out", out.string()});
  CHECK(r.code == exit_ok);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema_version"] == "1");
  CHECK(j["classification"]["verdict"] == "Theorem1_Case2_large");
  CHECK(fs::exists(out / "classification.json"));
}

TEST_CASE("missing config is a usage error") {
  const Run r = run({"solve", "missing.cfg"});
  CHECK(r.code == exit_usage);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["schema_version"] == "1");
  CHECK(j["error"]["category"] == "usage");
  CHECK(run({"solve"}).code == exit_usage);
  CHECK(run({"frobnicate", "x.cfg"}).code == exit_usage);
  CHECK(run({"solve", "--nodes", "abc", "x.cfg"}).code == exit_usage);
  CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("verify the bounded example with envelope") {
  const fs::path out = scratch("verify");
  const Run r = run({"verify", "--config", kExamples + "/theorem2_example.cfg", "--out", out.string()});
  REQUIRE(r.code == exit_ok);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["verification"]["envelope_ok"] == true);
  CHECK(j["verification"]["monotone_iterates_ok"] == true);
  CHECK(fs::exists(out / "solution.csv"));
  CHECK(fs::exists(out / "verification.csv"));
  CHECK(slurp(out / "verification.csv").rfind("r,residual1,residual2,ing1_lhs_minus_rhs", 0) == 0);
}

TEST_CASE("validate prints derived constants") {
  const fs::path dir = scratch("validate");
  const std::string path = write_config(dir, "p.cfg", std::string(kProblem) + "f1 = 1\nf2 = u+v\n[numeric]\n");
  const Run r = run({"validate", path});
  REQUIRE(r.code == exit_ok);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["problem"]["C0"] == 1.0);
  CHECK(j["problem"]["C00"] == 1.0);
  CHECK(j["problem"]["monotone_f2"]["is_nondecreasing_u"] == true);
}

TEST_CASE("exit codes for hypothesis and numerical failures") {
  const fs::path dir = scratch("codes");
  const std::string bad_f = write_config(dir, "bad_f.cfg", std::string(kProblem) + "f1 = (u-5)^2\nf2 = 1\n");
  const Run h = run({"classify", bad_f});
  CHECK(h.code == exit_hypothesis);
  CHECK(nlohmann::json::parse(h.err)["error"]["category"] == "hypothesis");

  const std::string blow = write_config(dir, "blow.cfg",
                                        std::string(kProblem) + "f1 = (u+v)^2\nf2 = (u+v)^2\n[numeric]\nR = 20\n"
                                                                "nodes = 201\n[output]\ndirectory = " +
                                            (dir / "blow_out").string() + "\n");
  const Run n = run({"solve", blow});
  CHECK(n.code == exit_numerical);
  CHECK(n.err.find("finite-radius blow-up suspected") != std::string::npos);

  const std::string slow = write_config(dir, "slow.cfg",
                                        std::string(kProblem) + "f1 = u+v\nf2 = u+v\n[numeric]\nmax_iter = 2\n"
                                                                "[output]\ndirectory = " +
                                            (dir / "slow_out").string() + "\n");
  CHECK(run({"solve", slow}).code == exit_numerical);
}

TEST_CASE("solve output is deterministic") {
  const fs::path dir = scratch("determinism");
  const std::string path =
      write_config(dir, "p.cfg",
                   std::string(kProblem) + "f1 = 1+sqrt(u*v)\nf2 = u+v\n[numeric]\nR = 1.5\nnodes = 151\n"
                                           "[output]\nemit_plot_data = true\n");
  REQUIRE(run({"solve", path, "--out", (dir / "a").string()}).code == exit_ok);
  REQUIRE(run({"solve", path, "--out", (dir / "b").string(), "--tol", "1e-10"}).code == exit_ok);
  for (const char* f : {"solution.csv", "trace.json", "u1.dat", "tables.csv", "f12.csv"}) {
    INFO(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_FALSE(slurp(dir / "a" / f).empty());
  }
  const std::string csv = slurp(dir / "a" / "solution.csv");
  CHECK(csv.rfind("r,u1,u2,du1,du2\n0,1,1,0,0\n", 0) == 0);

  REQUIRE(run({"solve", path, "--out", (dir / "c").string(), "--nodes", "31", "--radius", "1"}).code == exit_ok);
  const auto trace = nlohmann::json::parse(slurp(dir / "c" / "trace.json"));
  CHECK(trace["trace"]["nodes"] == 31);
  CHECK(trace["trace"]["R"] == 1.0);
}

TEST_CASE("sweep results do not depend on parallelism") {
  const fs::path dir = scratch("sweep");
  auto config = [&](int parallelism) {
    return write_config(dir, "sweep" + std::to_string(parallelism) + ".cfg",
                        std::string(kProblem) +
                            "f1 = preset:sum_power(1, 0.5)\nf2 = 1\n[numeric]\nR = 1\nnodes = 51\n"
                            "[sweep]\nparameter = f1.c\nvalues = 0.5, 1, 2, 4, 8\nparallelism = " +
                            std::to_string(parallelism) + "\n");
  };
  const Run serial = run({"sweep", config(1), "--out", (dir / "serial").string()});
  const Run parallel = run({"sweep", config(3), "--out", (dir / "parallel").string()});
  REQUIRE(serial.code == exit_ok);
  REQUIRE(parallel.code == exit_ok);
  CHECK(serial.out == parallel.out);
  CHECK(slurp(dir / "serial" / "index.csv") == slurp(dir / "parallel" / "index.csv"));
  for (int i = 0; i < 5; ++i) {
    char item[16];
    std::snprintf(item, sizeof item, "item_%03d", i);
    CHECK(slurp(dir / "serial" / item / "report.json") == slurp(dir / "parallel" / item / "report.json"));
  }
  const std::string index = slurp(dir / "serial" / "index.csv");
  CHECK(std::count(index.begin(), index.end(), '\n') == 6);
  CHECK(index.find("Theorem1_Case2_large") != std::string::npos);

  const Run no_sweep = run({"sweep", kExamples + "/laplace_const.cfg", "--out", (dir / "none").string()});
  CHECK(no_sweep.code == exit_usage);
}
