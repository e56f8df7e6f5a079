#include "khess/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "khess/error.hpp"

namespace khess {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json function_json(const std::string& source) { return json{{"source", source}}; }

}  // namespace

json to_json(const LimitEstimate& e) {
  json j;
  j["verdict"] = to_string(e.verdict);
  j["value"] = e.value ? number_or_null(*e.value) : json(nullptr);
  j["error_bound"] = number_or_null(e.error_bound);
  j["evidence"] = number_or_null(e.evidence);
  json windows = json::array();
  for (double w : e.window_contributions) windows.push_back(number_or_null(w));
  j["window_contributions"] = std::move(windows);
  return j;
}

json to_json(const MonotoneReport& r) {
  json j;
  j["is_nondecreasing_u"] = r.is_nondecreasing_u;
  j["is_nondecreasing_v"] = r.is_nondecreasing_v;
  j["samples_used"] = r.samples_used;
  j["min_value"] = number_or_null(r.min_value);
  if (r.worst_violation) {
    const auto& w = *r.worst_violation;
    j["worst_violation"] = {{"amount", w.amount}, {"u", w.u}, {"v", w.v}, {"axis", std::string(1, w.axis)}};
  } else {
    j["worst_violation"] = nullptr;
  }
  return j;
}

json problem_summary(const ValidatedProblem& problem) {
  const auto& s = problem.spec();
  json j;
  j["N"] = s.N;
  j["k1"] = s.k1;
  j["k2"] = s.k2;
  j["a1"] = s.a1;
  j["a2"] = s.a2;
  j["C0"] = problem.C(1);
  j["C00"] = problem.C(2);
  j["binomial_1"] = problem.binom(1);
  j["binomial_2"] = problem.binom(2);
  j["b1"] = function_json(s.b1.source_text());
  j["b2"] = function_json(s.b2.source_text());
  j["p1"] = function_json(s.p1.source_text());
  j["p2"] = function_json(s.p2.source_text());
  j["f1"] = function_json(s.f1.source_text());
  j["f2"] = function_json(s.f2.source_text());
  j["monotone_box"] = problem.monotone_box();
  j["monotone_f1"] = to_json(problem.monotone_report(1));
  j["monotone_f2"] = to_json(problem.monotone_report(2));
  return j;
}

json to_json(const ClassificationReport& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["reason"] = r.reason;
  j["F12_inf"] = to_json(r.F12_inf);
  j["P1_inf"] = to_json(r.P1_inf);
  j["P2_inf"] = to_json(r.P2_inf);
  j["theorem2_margin"] = r.theorem2_margin ? json(*r.theorem2_margin) : json(nullptr);
  j["margin_uncertainty"] = r.margin_uncertainty ? json(*r.margin_uncertainty) : json(nullptr);
  return j;
}

json trace_summary(const SolveResult& result) {
  const auto& t = result.trace;
  const auto& s = result.solution;
  json j;
  j["converged"] = t.converged;
  j["iterations_used"] = t.iterations_used;
  j["final_delta"] = t.sup_norm_deltas.empty() ? json(nullptr) : json(t.sup_norm_deltas.back());
  j["sup_norm_deltas"] = t.sup_norm_deltas;
  j["R"] = s.R;
  j["nodes"] = s.u1.size();
  j["u1_R"] = s.u1.values()(s.u1.values().size() - 1);
  j["u2_R"] = s.u2.values()(s.u2.values().size() - 1);
  j["center"] = {s.a1, s.a2};
  return j;
}

json to_json(const EnvelopeCheck& c) {
  return {{"ok", c.ok}, {"worst_margin", c.worst_margin}, {"worst_r", c.worst_r}, {"worst_bound", c.worst_bound}};
}

json to_json(const VerificationReport& r) {
  json j;
  j["max_residual_1"] = number_or_null(r.max_residual_1);
  j["max_residual_2"] = number_or_null(r.max_residual_2);
  j["origin_residual_1"] = number_or_null(r.origin_residual_1);
  j["origin_residual_2"] = number_or_null(r.origin_residual_2);
  j["hessian_identity_max_err"] = number_or_null(r.hessian_identity_max_err);
  j["monotone_iterates_ok"] = r.monotone_iterates_ok;
  j["envelope_ok"] = r.envelope ? json(r.envelope->ok) : json(nullptr);
  j["envelope"] = r.envelope ? to_json(*r.envelope) : json(nullptr);
  j["iterate_envelope"] = r.iterate_envelope ? to_json(*r.iterate_envelope) : json(nullptr);
  if (!r.envelope_note.empty()) j["envelope_note"] = r.envelope_note;
  const auto component = [](const ConvexityComponent& c) {
    return json{{"ing_ok", c.ing_ok},
                {"ing_literal_ok", c.ing_literal_ok},
                {"convex", c.convex},
                {"worst_ing_r", c.worst_ing_r},
                {"worst_convexity_r", c.worst_convexity_r},
                {"min_second_derivative", c.min_second_derivative}};
  };
  j["convexity"] = {{"ing1_ok", r.convexity.ing1_ok()},
                    {"ing2_ok", r.convexity.ing2_ok()},
                    {"u1_convex", r.convexity.u1_convex()},
                    {"u2_convex", r.convexity.u2_convex()},
                    {"component_1", component(r.convexity.c1)},
                    {"component_2", component(r.convexity.c2)}};
  return j;
}

json error_json(const std::string& category, const std::string& message) {
  return {{"schema_version", kSchemaVersion}, {"error", {{"category", category}, {"message", message}}}};
}

std::string render(json body) {
  json out = {{"schema_version", kSchemaVersion}};
  for (auto& [key, value] : body.items()) out[key] = std::move(value);
  return out.dump(2) + "\n";
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<const Eigen::VectorXd*>& columns) {
  if (header.size() != columns.size()) throw UsageError("csv header and column count differ");
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  const Eigen::Index rows = columns.empty() ? 0 : columns.front()->size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_number((*columns[c])(i));
    }
    out += '\n';
  }
  return out;
}

std::string plot_columns(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) out += format_number(x(i)) + ' ' + format_number(y(i)) + '\n';
  return out;
}

std::string solution_csv(const SolutionPair& sol) {
  return csv_table({"r", "u1", "u2", "du1", "du2"}, {&sol.u1.grid().nodes(), &sol.u1.values(), &sol.u2.values(),
                                                      &sol.du1.values(), &sol.du2.values()});
}

std::string kernel_tables_csv(const KernelTables& t) {
  return csv_table({"r", "E1", "E2", "P1", "P2"},
                   {&t.grid.nodes(), &t.E1.values(), &t.E2.values(), &t.P1.values(), &t.P2.values()});
}

std::string f12_csv(const F12Table& table) {
  return csv_table({"s", "F12"}, {&table.abscissae(), &table.values()});
}

std::string verification_csv(const VerificationReport& r, const RadialGrid& grid) {
  return csv_table({"r", "residual1", "residual2", "ing1_lhs_minus_rhs", "ing2_lhs_minus_rhs", "u1_second",
                    "u2_second"},
                   {&grid.nodes(), &r.residuals.residual1.values(), &r.residuals.residual2.values(),
                    &r.convexity.c1.ing_margin.values(), &r.convexity.c2.ing_margin.values(),
                    &r.convexity.c1.second_derivative.values(), &r.convexity.c2.second_derivative.values()});
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw UsageError("write failed for '" + path + "'");
}

}  // namespace khess
