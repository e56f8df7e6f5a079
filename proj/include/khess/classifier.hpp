#pragma once

#include <optional>
#include <string>

#include "khess/grid.hpp"
#include "khess/kernels.hpp"
#include "khess/problem.hpp"
#include "khess/quadrature.hpp"

namespace khess {

enum class Verdict {
  Theorem1_Case1_bounded,
  Theorem1_Case2_large,
  Theorem2_bounded_with_envelope,
  mixed_case_out_of_scope,
  inconclusive,
};

const char* to_string(Verdict v);

struct ClassificationReport {
  LimitEstimate F12_inf, P1_inf, P2_inf;
  Verdict verdict = Verdict::inconclusive;
  /// F12(inf) - (P1(inf) + P2(inf)); present when all three limits are finite.
  std::optional<double> theorem2_margin;
  /// Sum of the three error bounds the margin has to beat.
  std::optional<double> margin_uncertainty;
  std::string reason;
};

/// Pure decision table over three limit estimates.
ClassificationReport decide(const LimitEstimate& F12_inf, const LimitEstimate& P1_inf, const LimitEstimate& P2_inf);

ClassificationReport classify(const ValidatedProblem& problem, const LimitPolicy& policy = {});

/// lower_i(r) = a_i + f_i^(1/k_i)(a1, a2) P_i(r) and upper(r) = F12^-1(P1(r) + P2(r)).
struct BoundEnvelope {
  GridFunction lower1, lower2, upper;
};

/// RangeError (suggesting a larger s_max) when P1 + P2 leaves the F12 table.
BoundEnvelope envelope(const ValidatedProblem& problem, const KernelTables& tables);

/// The constant bound F12^-1(P1(inf) + P2(inf)) of a report with the bounded-with-envelope verdict.
double theorem2_ceiling(const ValidatedProblem& problem, const ClassificationReport& report);

}  // namespace khess
