#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "khess/problem.hpp"
#include "khess/quadrature.hpp"
#include "khess/solver.hpp"

namespace khess {

/// Function strings and scalars of the [problem] section, kept verbatim.
struct ProblemBlock {
  int N = 3;
  int k1 = 1, k2 = 1;
  double a1 = 1.0, a2 = 1.0;
  std::string b1, b2, p1, p2, f1, f2;
};

struct NumericBlock {
  double R = 5.0;
  int nodes = 401;
  double tol = 1e-10;
  int max_iter = 500;
  double s_max = 0.0;  // 0 lets the F12 table grow until it covers P1 + P2
  double R_max = 1048576.0;
  std::string grid = "uniform";  // uniform | geometric
  double ratio = 1.005;          // spacing growth of the geometric grid
  double blow_up = 1e12;
  int gauss_points = 4;
};

struct OutputBlock {
  std::string directory = "khess_out";
  std::vector<std::string> formats{"csv", "json"};
  bool emit_plot_data = false;

  bool wants(const std::string& format) const;
};

struct SweepSpec {
  std::string parameter;  // a1, a2, N, k1, k2, R, or <function>.<preset parameter> such as p1.c
  std::vector<double> values;
  int parallelism = 1;
};

struct RunConfig {
  ProblemBlock problem;
  NumericBlock numeric;
  OutputBlock output;
  std::optional<SweepSpec> sweep;
};

/// Sections of an INI-style file: `[name]` headers, `key = value` lines,
/// `#` or `;` comments. Duplicate keys and keys outside a section are errors.
using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

IniDocument parse_ini(const std::string& text);

/// Every [problem] key is required; other sections fall back to defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

ProblemSpec to_problem_spec(const ProblemBlock& block);
RadialGrid make_grid(const NumericBlock& numeric);
SolverOptions solver_options(const NumericBlock& numeric);
LimitPolicy limit_policy(const NumericBlock& numeric);

/// Copy of `config` with the sweep parameter set to `value`.
RunConfig apply_sweep_value(const RunConfig& config, const std::string& parameter, double value);

}  // namespace khess
