#include "khess/classifier.hpp"

#include <cmath>
#include <cstdio>

#include "khess/error.hpp"

namespace khess {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double kth_root(double x, int k) {
  if (k == 1) return x;
  if (x <= 0.0) return 0.0;
  return std::pow(x, 1.0 / k);
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Theorem1_Case1_bounded:
      return "Theorem1_Case1_bounded";
    case Verdict::Theorem1_Case2_large:
      return "Theorem1_Case2_large";
    case Verdict::Theorem2_bounded_with_envelope:
      return "Theorem2_bounded_with_envelope";
    case Verdict::mixed_case_out_of_scope:
      return "mixed_case_out_of_scope";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

ClassificationReport decide(const LimitEstimate& F12_inf, const LimitEstimate& P1_inf, const LimitEstimate& P2_inf) {
  ClassificationReport r;
  r.F12_inf = F12_inf;
  r.P1_inf = P1_inf;
  r.P2_inf = P2_inf;

  using LV = LimitVerdict;
  const bool any_unknown =
      F12_inf.verdict == LV::inconclusive || P1_inf.verdict == LV::inconclusive || P2_inf.verdict == LV::inconclusive;
  if (any_unknown) {
    r.verdict = Verdict::inconclusive;
    r.reason = "at least one limit could not be decided numerically";
    return r;
  }

  const bool p1_finite = P1_inf.verdict == LV::finite;
  const bool p2_finite = P2_inf.verdict == LV::finite;

  if (F12_inf.verdict == LV::divergent) {
    if (p1_finite && p2_finite) {
      r.verdict = Verdict::Theorem1_Case1_bounded;
      r.reason = "F12(inf) = inf and P1(inf) + P2(inf) < inf";
    } else if (!p1_finite && !p2_finite) {
      r.verdict = Verdict::Theorem1_Case2_large;
      r.reason = "F12(inf) = inf, P1(inf) = inf and P2(inf) = inf";
    } else {
      r.verdict = Verdict::mixed_case_out_of_scope;
      r.reason = "F12(inf) = inf with exactly one of P1(inf), P2(inf) finite";
    }
    return r;
  }

  // F12(inf) finite from here on.
  if (!p1_finite || !p2_finite) {
    r.verdict = Verdict::inconclusive;
    r.reason = "F12(inf) is finite but P1(inf) + P2(inf) is not; no existence statement applies";
    return r;
  }
  const double margin = *F12_inf.value - (*P1_inf.value + *P2_inf.value);
  const double uncertainty = F12_inf.error_bound + P1_inf.error_bound + P2_inf.error_bound;
  r.theorem2_margin = margin;
  r.margin_uncertainty = uncertainty;
  if (margin > uncertainty) {
    r.verdict = Verdict::Theorem2_bounded_with_envelope;
    r.reason = "P1(inf) + P2(inf) < F12(inf) with margin " + fmt(margin);
  } else {
    r.verdict = Verdict::inconclusive;
    r.reason = margin <= 0.0 ? "all limits finite but P1(inf) + P2(inf) >= F12(inf) (margin " + fmt(margin) + ")"
                             : "margin " + fmt(margin) + " does not exceed the limit error bounds " + fmt(uncertainty);
  }
  return r;
}

ClassificationReport classify(const ValidatedProblem& problem, const LimitPolicy& policy) {
  const KernelLimits lim = limits(problem, policy);
  return decide(lim.F12_inf, lim.P1_inf, lim.P2_inf);
}

BoundEnvelope envelope(const ValidatedProblem& problem, const KernelTables& tables) {
  const RadialGrid& grid = tables.grid;
  if (!tables.P1.grid().same_as(grid) || !tables.P2.grid().same_as(grid)) {
    throw UsageError("kernel tables are inconsistent with their grid");
  }
  const double a1 = problem.a(1), a2 = problem.a(2);
  const double g1 = kth_root(problem.f(1)(a1, a2), problem.k(1));
  const double g2 = kth_root(problem.f(2)(a1, a2), problem.k(2));

  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd lo1(n), lo2(n), up(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double P1 = tables.P1.values()(j);
    const double P2 = tables.P2.values()(j);
    lo1(j) = a1 + g1 * P1;
    lo2(j) = a2 + g2 * P2;
    const double y = P1 + P2;
    if (y >= tables.F12.sup()) {
      throw RangeError("P1 + P2 = " + fmt(y) + " at r=" + fmt(grid[static_cast<std::size_t>(j)]) +
                       " exceeds the F12 table (sup " + fmt(tables.F12.sup()) + " at s_max " +
                       fmt(tables.F12.s_max()) + "); raise s_max");
    }
    up(j) = tables.F12.inverse(y);
  }
  return {GridFunction(grid, std::move(lo1)), GridFunction(grid, std::move(lo2)), GridFunction(grid, std::move(up))};
}

double theorem2_ceiling(const ValidatedProblem& problem, const ClassificationReport& report) {
  if (report.verdict != Verdict::Theorem2_bounded_with_envelope) {
    throw UsageError("the constant envelope needs a Theorem2_bounded_with_envelope verdict");
  }
  const double y = *report.P1_inf.value + *report.P2_inf.value;
  return F12Table::covering(problem, y).inverse(y);
}

}  // namespace khess
