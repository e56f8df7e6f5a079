#include "khess/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "khess/classifier.hpp"
#include "khess/config.hpp"
#include "khess/error.hpp"
#include "khess/report.hpp"
#include "khess/solver.hpp"
#include "khess/verifier.hpp"

namespace khess {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string positional;
  std::string config;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<int> nodes;
  std::optional<double> radius;
  std::optional<double> smax;
};

void add_common_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("config_file", o.positional, "Problem configuration file");
  cmd.add_option("--config", o.config, "Problem configuration file");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--tol", o.tol, "Successive-approximation tolerance");
  cmd.add_option("--nodes", o.nodes, "Radial grid node count");
  cmd.add_option("--radius", o.radius, "Outer radius R");
  cmd.add_option("--seed-table-smax", o.smax, "Initial upper end of the F12 table");
}

RunConfig load(const Overrides& o) {
  if (o.positional.empty() && o.config.empty()) throw UsageError("no config file given");
  if (!o.positional.empty() && !o.config.empty() && o.positional != o.config) {
    throw UsageError("conflicting config files '" + o.positional + "' and '" + o.config + "'");
  }
  RunConfig cfg = load_run_config(o.config.empty() ? o.positional : o.config);
  if (o.out) cfg.output.directory = *o.out;
  if (o.tol) cfg.numeric.tol = *o.tol;
  if (o.nodes) cfg.numeric.nodes = *o.nodes;
  if (o.radius) cfg.numeric.R = *o.radius;
  if (o.smax) cfg.numeric.s_max = *o.smax;
  return cfg;
}

// Only commands that form F12 need f1^(1/k1)(t,t) + f2^(1/k2)(t,t) > 0.
ValidatedProblem validated(const RunConfig& cfg, bool needs_rate = true) {
  ValidationOptions options;
  options.sample_radius = std::max(10.0, cfg.numeric.R);
  options.require_positive_rate = needs_rate;
  return validate(to_problem_spec(cfg.problem), options);
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage:
      return "usage";
    case ErrorCategory::numerical:
      return "numerical";
    case ErrorCategory::hypothesis:
      return "hypothesis";
  }
  return "numerical";
}

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage:
      return exit_usage;
    case ErrorCategory::numerical:
      return exit_numerical;
    case ErrorCategory::hypothesis:
      return exit_hypothesis;
  }
  return exit_numerical;
}

void write_solution_outputs(const RunConfig& cfg, const fs::path& dir, const SolveResult& result,
                            const KernelTables* tables) {
  if (cfg.output.wants("csv")) write_file((dir / "solution.csv").string(), solution_csv(result.solution));
  if (cfg.output.wants("json")) write_file((dir / "trace.json").string(), render({{"trace", trace_summary(result)}}));
  if (!cfg.output.emit_plot_data) return;
  const auto& s = result.solution;
  write_file((dir / "u1.dat").string(), plot_columns(s.u1.grid().nodes(), s.u1.values()));
  write_file((dir / "u2.dat").string(), plot_columns(s.u2.grid().nodes(), s.u2.values()));
  if (tables != nullptr) {
    write_file((dir / "tables.csv").string(), kernel_tables_csv(*tables));
    write_file((dir / "f12.csv").string(), f12_csv(tables->F12));
  }
}

std::optional<KernelTables> try_tables(const ValidatedProblem& problem, const RadialGrid& grid, double s_max) {
  try {
    return build_kernel_tables(problem, grid, s_max);
  } catch (const RangeError&) {
    return std::nullopt;
  }
}

void require_converged(const SolveResult& result) {
  if (!result.trace.converged) {
    const double last = result.trace.sup_norm_deltas.empty() ? 0.0 : result.trace.sup_norm_deltas.back();
    char buf[96];
    std::snprintf(buf, sizeof buf, "no convergence after %d iterations (last sup-norm change %.3g)",
                  result.trace.iterations_used, last);
    throw NumericalError(buf);
  }
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const ValidatedProblem problem = validated(cfg);
  out << render({{"problem", problem_summary(problem)}});
  return exit_ok;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const ValidatedProblem problem = validated(cfg, cfg.output.emit_plot_data);
  const RadialGrid grid = make_grid(cfg.numeric);
  SolverOptions options = solver_options(cfg.numeric);
  options.keep_iterates = false;
  const SolveResult result = solve_successive(problem, grid, options);
  const fs::path dir = output_dir(cfg);
  std::optional<KernelTables> tables;
  if (cfg.output.emit_plot_data) tables = try_tables(problem, grid, cfg.numeric.s_max);
  write_solution_outputs(cfg, dir, result, tables ? &*tables : nullptr);
  out << render({{"trace", trace_summary(result)}});
  require_converged(result);
  return exit_ok;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const ValidatedProblem problem = validated(cfg);
  const ClassificationReport report = classify(problem, limit_policy(cfg.numeric));
  const std::string text = render({{"classification", to_json(report)}});
  if (cfg.output.wants("json")) write_file((output_dir(cfg) / "classification.json").string(), text);
  out << text;
  return exit_ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const ValidatedProblem problem = validated(cfg);
  const RadialGrid grid = make_grid(cfg.numeric);
  const SolveResult result = solve_successive(problem, grid, solver_options(cfg.numeric));
  const std::optional<KernelTables> tables = try_tables(problem, grid, cfg.numeric.s_max);
  VerificationReport report = verify(problem, result, tables ? &*tables : nullptr);
  if (!tables) report.envelope_note = "F12 table cannot cover P1 + P2 on this grid; raise s_max";

  const fs::path dir = output_dir(cfg);
  write_solution_outputs(cfg, dir, result, tables ? &*tables : nullptr);
  const std::string text = render({{"trace", trace_summary(result)}, {"verification", to_json(report)}});
  if (cfg.output.wants("json")) write_file((dir / "verification.json").string(), text);
  if (cfg.output.wants("csv")) write_file((dir / "verification.csv").string(), verification_csv(report, grid));
  out << text;
  require_converged(result);
  return exit_ok;
}

struct SweepItem {
  int code = exit_ok;
  std::string status = "ok";
  std::string message;
  std::string verdict;
  std::optional<bool> converged;
  std::optional<double> u1_R, u2_R;
};

SweepItem run_sweep_item(const RunConfig& base, const std::string& parameter, double value, const fs::path& dir) {
  SweepItem item;
  json body = {{"parameter", parameter}, {"value", value}};
  try {
    const RunConfig cfg = apply_sweep_value(base, parameter, value);
    const ValidatedProblem problem = validated(cfg);
    const ClassificationReport report = classify(problem, limit_policy(cfg.numeric));
    item.verdict = to_string(report.verdict);
    body["classification"] = to_json(report);

    SolverOptions options = solver_options(cfg.numeric);
    options.keep_iterates = false;
    const SolveResult result = solve_successive(problem, make_grid(cfg.numeric), options);
    item.converged = result.trace.converged;
    item.u1_R = result.solution.u1.values().tail(1)(0);
    item.u2_R = result.solution.u2.values().tail(1)(0);
    body["trace"] = trace_summary(result);
    fs::create_directories(dir);
    if (cfg.output.wants("csv")) write_file((dir / "solution.csv").string(), solution_csv(result.solution));
    require_converged(result);
  } catch (const Error& e) {
    item.code = exit_code_for(e.category());
    item.status = category_name(e.category());
    item.message = e.what();
    body["error"] = {{"category", item.status}, {"message", item.message}};
  }
  fs::create_directories(dir);
  write_file((dir / "report.json").string(), render(std::move(body)));
  return item;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.sweep) throw UsageError("sweep needs a [sweep] section in the config");
  const SweepSpec& sweep = *cfg.sweep;
  // Fail early on a malformed parameter path.
  apply_sweep_value(cfg, sweep.parameter, sweep.values.front());
  const fs::path dir = output_dir(cfg);
  const std::size_t count = sweep.values.size();

  auto item_dir = [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "item_%03zu", i);
    return dir / name;
  };

  std::vector<SweepItem> items(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      items[i] = run_sweep_item(cfg, sweep.parameter, sweep.values[i], item_dir(i));
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(sweep.parallelism), count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string index = "index,parameter,value,status,verdict,converged,u1_R,u2_R,directory\n";
  json listing = json::array();
  int code = exit_ok;
  for (std::size_t i = 0; i < count; ++i) {
    const SweepItem& it = items[i];
    const std::string sub = item_dir(i).filename().string();
    index += std::to_string(i) + ',' + sweep.parameter + ',' + format_number(sweep.values[i]) + ',' + it.status + ',' +
             it.verdict + ',' + (it.converged ? (*it.converged ? "true" : "false") : "") + ',' +
             (it.u1_R ? format_number(*it.u1_R) : "") + ',' + (it.u2_R ? format_number(*it.u2_R) : "") + ',' + sub +
             '\n';
    listing.push_back({{"index", i}, {"value", sweep.values[i]}, {"status", it.status}, {"verdict", it.verdict}});
    if (code == exit_ok && it.code != exit_ok) code = it.code;
  }
  write_file((dir / "index.csv").string(), index);
  out << render({{"sweep", {{"parameter", sweep.parameter}, {"items", std::move(listing)}}}});
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Positive radial solutions of (k1,k2)-Hessian systems with convection", "khess"};
  app.require_subcommand(1);
  Overrides overrides;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"validate", "Check the problem hypotheses and print derived constants", cmd_validate},
      {"solve", "Run successive approximation and write the solution", cmd_solve},
      {"classify", "Decide the applicable existence statement from the limits", cmd_classify},
      {"verify", "Solve, then check residuals, envelope, monotonicity and convexity", cmd_verify},
      {"sweep", "Repeat classify and solve over a parameter list", cmd_sweep},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common_options(*sub, overrides);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << error_json("usage", e.what()).dump() << '\n';
    return exit_usage;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].run(load(overrides), out);
    }
    throw UsageError("no subcommand given");
  } catch (const Error& e) {
    err << error_json(category_name(e.category()), e.what()).dump() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << error_json("numerical", e.what()).dump() << '\n';
    return exit_numerical;
  }
}

}  // namespace khess
