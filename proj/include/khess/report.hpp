#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "khess/classifier.hpp"
#include "khess/kernels.hpp"
#include "khess/problem.hpp"
#include "khess/solver.hpp"
#include "khess/verifier.hpp"

namespace khess {

inline constexpr const char* kSchemaVersion = "1";

nlohmann::json to_json(const LimitEstimate& e);
nlohmann::json to_json(const MonotoneReport& r);
nlohmann::json problem_summary(const ValidatedProblem& problem);
nlohmann::json to_json(const ClassificationReport& r);
nlohmann::json trace_summary(const SolveResult& result);
nlohmann::json to_json(const EnvelopeCheck& c);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json error_json(const std::string& category, const std::string& message);

/// Adds schema_version and renders with two-space indentation and a final newline.
std::string render(nlohmann::json body);

/// "%.17g" rendering used for every CSV and plot-data value.
std::string format_number(double v);

/// Comma-separated table with one header line.
std::string csv_table(const std::vector<std::string>& header, const std::vector<const Eigen::VectorXd*>& columns);

/// Whitespace-separated two-column data for plotting tools.
std::string plot_columns(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

std::string solution_csv(const SolutionPair& sol);
std::string kernel_tables_csv(const KernelTables& tables);
std::string f12_csv(const F12Table& table);
std::string verification_csv(const VerificationReport& r, const RadialGrid& grid);

void write_file(const std::string& path, const std::string& contents);

}  // namespace khess
