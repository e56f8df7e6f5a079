#pragma once

#include <optional>
#include <string>
#include <vector>

#include "khess/classifier.hpp"
#include "khess/grid.hpp"
#include "khess/problem.hpp"
#include "khess/solver.hpp"

namespace khess {

/// Defect of the expanded radial equation
///   C u''(u'/r)^(k-1) + C (N-k)/k (u'/r)^k + b (u')^k - p f(u1, u2),  C = C_{N-1}^{k-1},
/// with u'' from centred differences of the analytic u'. Node 0 uses the
/// limit u'/r -> u''(0); nodes 0 and 1 are kept out of the maxima.
struct ResidualReport {
  GridFunction residual1, residual2;
  double origin1 = 0.0, origin2 = 0.0;  // |residual| at r = 0
  double max1 = 0.0, max2 = 0.0;        // sup over nodes 2 .. M-1
};

ResidualReport ode_residual(const ValidatedProblem& problem, const SolutionPair& sol);

/// Max |divergence form - eigenvalue form| of the radial k-Hessian over
/// nodes 3 .. M-2, where
///   divergence: r^(1-N) C_{N-1}^{k-1} [ r^(N-k) (u')^k / k ]'
///   eigenvalue: C_{N-1}^k (u'/r)^k + C_{N-1}^{k-1} u'' (u'/r)^(k-1).
/// The bracket is differentiated as r^N g with g = (u'/r)^k / k. Both
/// derivatives use five-point finite-difference stencils.
double hessian_forms_consistency(const GridFunction& u, const GridFunction& du, int k, int N);

struct EnvelopeCheck {
  bool ok = true;
  double worst_margin = 0.0;  // most negative of u_i - lower_i and upper - u1 - u2
  double worst_r = 0.0;
  std::string worst_bound;  // "lower1", "lower2" or "upper"
};

EnvelopeCheck check_envelope(const SolutionPair& sol, const BoundEnvelope& env, double slack = 1e-6);

/// Upper bound u1^m + u2^m <= upper applied to every stored iterate.
EnvelopeCheck check_upper_bound_iterates(const IterationTrace& trace, const BoundEnvelope& env, double slack = 1e-6);

bool check_monotone_iterates(const IterationTrace& trace, double slack = 1e-12);

struct ConvexityComponent {
  /// lhs - rhs of p(r) >= (C_{N-1}^{k-1}(N-k)/k r^-N + b(r) r^(k-N)) int_0^r s^(N-1) p(s)/C ds
  GridFunction ing_margin;
  /// Same with the convection contribution subtracted instead of added.
  GridFunction ing_margin_literal;
  GridFunction second_derivative;
  bool ing_ok = true;
  bool ing_literal_ok = true;
  bool convex = true;
  double worst_ing_r = 0.0;
  double worst_convexity_r = 0.0;
  double min_second_derivative = 0.0;
};

struct ConvexityReport {
  ConvexityComponent c1, c2;
  bool ing1_ok() const noexcept { return c1.ing_ok; }
  bool ing2_ok() const noexcept { return c2.ing_ok; }
  bool u1_convex() const noexcept { return c1.convex; }
  bool u2_convex() const noexcept { return c2.convex; }
};

ConvexityReport convexity_report(const ValidatedProblem& problem, const SolutionPair& sol,
                                 double convexity_tol = 1e-8);

struct VerificationReport {
  double max_residual_1 = 0.0, max_residual_2 = 0.0;
  double origin_residual_1 = 0.0, origin_residual_2 = 0.0;
  std::optional<EnvelopeCheck> envelope;         // absent when the F12 table cannot cover P1 + P2
  std::optional<EnvelopeCheck> iterate_envelope;  // absent without stored iterates
  std::string envelope_note;
  bool monotone_iterates_ok = true;
  double hessian_identity_max_err = 0.0;
  ConvexityReport convexity;
  ResidualReport residuals;
};

VerificationReport verify(const ValidatedProblem& problem, const SolveResult& result, const KernelTables* tables);

}  // namespace khess
