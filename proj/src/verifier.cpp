#include "khess/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "khess/error.hpp"
#include "khess/quadrature.hpp"

namespace khess {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Fornberg's recursion: weights c(i, d) such that sum_i c(i, d) f(x_i)
// approximates the d-th derivative at z, for d = 0 .. m.
Eigen::MatrixXd fornberg(double z, const Eigen::VectorXd& x, int m) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
  double c1 = 1.0;
  double c4 = x(0) - z;
  c(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const Eigen::Index mn = std::min<Eigen::Index>(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x(i) - z;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c3 = x(i) - x(j);
      c2 *= c3;
      if (j == i - 1) {
        for (Eigen::Index d = mn; d >= 1; --d) c(i, d) = c1 * (d * c(i - 1, d - 1) - c5 * c(i - 1, d)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (Eigen::Index d = mn; d >= 1; --d) c(j, d) = (c4 * c(j, d) - d * c(j, d - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

// d-th derivative of nodal values at node j from `width` neighbouring nodes
// (centred where possible, shifted at the ends).
double nodal_derivative(const Eigen::VectorXd& r, const Eigen::VectorXd& values, Eigen::Index j, int order,
                        Eigen::Index width) {
  const Eigen::Index n = r.size();
  width = std::min(width, n);
  const Eigen::Index start = std::clamp<Eigen::Index>(j - width / 2, 0, n - width);
  const Eigen::MatrixXd w = fornberg(r(j), r.segment(start, width), order);
  return w.col(order).dot(values.segment(start, width));
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!a.same_as(b)) throw UsageError("grid mismatch between solution and envelope");
}

void track(EnvelopeCheck& check, double margin, double r, const char* bound) {
  if (margin < check.worst_margin || check.worst_bound.empty()) {
    check.worst_margin = margin;
    check.worst_r = r;
    check.worst_bound = bound;
  }
}

ConvexityComponent convexity_component(const ValidatedProblem& problem, int i, const SolutionPair& sol, double tol) {
  const RadialGrid& grid = sol.u1.grid();
  const Eigen::VectorXd& r = grid.nodes();
  const Eigen::VectorXd& du = i == 1 ? sol.du1.values() : sol.du2.values();
  const Eigen::Index n = r.size();
  const int N = problem.N();
  const int k = problem.k(i);
  const double C = problem.C(i);
  const double binom = problem.binom(i);
  const FuncSpec1D& b = problem.b(i);
  const FuncSpec1D& p = problem.p(i);

  // M(r) = int_0^r s^(N-1) p(s) / C ds, interval by interval.
  const GaussRule<double> rule = gauss_legendre<double>(8);
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double h = r(j + 1) - r(j);
    double acc = 0.0;
    for (Eigen::Index g = 0; g < rule.size(); ++g) {
      const double s = r(j) + h * rule.nodes(g);
      acc += rule.weights(g) * ipow(s, N - 1) * p(s);
    }
    moment(j + 1) = moment(j) + h * acc / C;
  }

  ConvexityComponent out;
  Eigen::VectorXd ing = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd literal = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd second(n);
  double worst_ing = std::numeric_limits<double>::infinity();
  out.min_second_derivative = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    second(j) = nodal_derivative(r, du, j, 1, 3);
    if (j < 2) continue;
    const double rj = r(j);
    const double pj = p(rj);
    const double geometric = binom * (N - k) / k * std::pow(rj, -N);
    const double convection = b(rj) * std::pow(rj, k - N);
    ing(j) = pj - (geometric + convection) * moment(j);
    literal(j) = pj - (geometric - convection) * moment(j);
    const double scale = std::max(1.0, std::abs(pj));
    if (ing(j) < -1e-12 * scale) out.ing_ok = false;
    if (literal(j) < -1e-12 * scale) out.ing_literal_ok = false;
    if (ing(j) < worst_ing) {
      worst_ing = ing(j);
      out.worst_ing_r = rj;
    }
    if (second(j) < out.min_second_derivative) {
      out.min_second_derivative = second(j);
      out.worst_convexity_r = rj;
    }
    if (second(j) < -tol) out.convex = false;
  }
  if (!std::isfinite(out.min_second_derivative)) out.min_second_derivative = 0.0;
  out.ing_margin = GridFunction(grid, std::move(ing));
  out.ing_margin_literal = GridFunction(grid, std::move(literal));
  out.second_derivative = GridFunction(grid, std::move(second));
  return out;
}

}  // namespace

ResidualReport ode_residual(const ValidatedProblem& problem, const SolutionPair& sol) {
  const RadialGrid& grid = sol.u1.grid();
  const Eigen::VectorXd& r = grid.nodes();
  const Eigen::Index n = r.size();
  const Eigen::VectorXd& u1 = sol.u1.values();
  const Eigen::VectorXd& u2 = sol.u2.values();
  const int N = problem.N();

  ResidualReport out;
  for (int i : {1, 2}) {
    const Eigen::VectorXd& du = i == 1 ? sol.du1.values() : sol.du2.values();
    const int k = problem.k(i);
    const double binom = problem.binom(i);
    const FuncSpec1D& b = problem.b(i);
    const FuncSpec1D& p = problem.p(i);
    const FuncSpec2D& f = problem.f(i);

    Eigen::VectorXd res(n);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double upp = nodal_derivative(r, du, j, 1, 3);
      const double source = p(r(j)) * f(u1(j), u2(j));
      if (j == 0) {
        // u'(r)/r -> u''(0) as r -> 0.
        res(j) = binom * ipow(upp, k) * (1.0 + static_cast<double>(N - k) / k) - source;
        continue;
      }
      const double q = du(j) / r(j);
      res(j) = binom * upp * ipow(q, k - 1) + binom * (N - k) / k * ipow(q, k) + b(r(j)) * ipow(du(j), k) - source;
      if (j >= 2 && j + 1 < n) worst = std::max(worst, std::abs(res(j)));
    }
    (i == 1 ? out.origin1 : out.origin2) = std::abs(res(0));
    (i == 1 ? out.max1 : out.max2) = worst;
    (i == 1 ? out.residual1 : out.residual2) = GridFunction(grid, std::move(res));
  }
  return out;
}

double hessian_forms_consistency(const GridFunction& u, const GridFunction& du, int k, int N) {
  if (!u.grid().same_as(du.grid())) throw UsageError("u and u' live on different grids");
  if (k < 1 || k > N) throw UsageError("Hessian order must lie in {1,...,N}");
  const Eigen::VectorXd& r = u.grid().nodes();
  const Eigen::Index n = r.size();
  const double lower = static_cast<double>(binomial(N - 1, k - 1));
  const double upper = static_cast<double>(binomial(N - 1, k));

  // The bracket r^(N-k) (u')^k / k equals r^N g with g = (u'/r)^k / k, and
  // r^(1-N) (r^N g)' = N g + r g'. Differencing g instead of the bracket keeps
  // the r^(1-N) factor from amplifying stencil error near the origin.
  Eigen::VectorXd g(n);
  for (Eigen::Index j = 1; j < n; ++j) g(j) = ipow(du.values()(j) / r(j), k) / k;
  g(0) = g(1);  // never read: stencils start at node 1

  double worst = 0.0;
  for (Eigen::Index j = 3; j + 2 < n; ++j) {
    const double rj = r(j);
    const double divergence = lower * (N * g(j) + rj * nodal_derivative(r, g, j, 1, 5));
    const double q = du.values()(j) / rj;
    const double upp = nodal_derivative(r, u.values(), j, 2, 5);
    const double eigen = upper * ipow(q, k) + lower * upp * ipow(q, k - 1);
    worst = std::max(worst, std::abs(divergence - eigen));
  }
  return worst;
}

EnvelopeCheck check_envelope(const SolutionPair& sol, const BoundEnvelope& env, double slack) {
  require_same_grid(sol.u1.grid(), env.upper.grid());
  require_same_grid(sol.u1.grid(), env.lower1.grid());
  const Eigen::VectorXd& r = sol.u1.grid().nodes();
  EnvelopeCheck check;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    track(check, sol.u1.values()(j) - env.lower1.values()(j), r(j), "lower1");
    track(check, sol.u2.values()(j) - env.lower2.values()(j), r(j), "lower2");
    track(check, env.upper.values()(j) - sol.u1.values()(j) - sol.u2.values()(j), r(j), "upper");
  }
  check.ok = check.worst_margin >= -slack;
  return check;
}

EnvelopeCheck check_upper_bound_iterates(const IterationTrace& trace, const BoundEnvelope& env, double slack) {
  EnvelopeCheck check;
  for (const auto& it : trace.iterates) {
    require_same_grid(it.u1.grid(), env.upper.grid());
    const Eigen::VectorXd& r = it.u1.grid().nodes();
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      track(check, env.upper.values()(j) - it.u1.values()(j) - it.u2.values()(j), r(j), "upper");
    }
  }
  check.ok = check.worst_margin >= -slack;
  return check;
}

bool check_monotone_iterates(const IterationTrace& trace, double slack) {
  for (std::size_t m = 1; m < trace.iterates.size(); ++m) {
    const auto& prev = trace.iterates[m - 1];
    const auto& next = trace.iterates[m];
    if ((next.u1.values() - prev.u1.values()).minCoeff() < -slack) return false;
    if ((next.u2.values() - prev.u2.values()).minCoeff() < -slack) return false;
  }
  return true;
}

ConvexityReport convexity_report(const ValidatedProblem& problem, const SolutionPair& sol, double convexity_tol) {
  return {convexity_component(problem, 1, sol, convexity_tol), convexity_component(problem, 2, sol, convexity_tol)};
}

VerificationReport verify(const ValidatedProblem& problem, const SolveResult& result, const KernelTables* tables) {
  const SolutionPair& sol = result.solution;
  VerificationReport report;
  report.residuals = ode_residual(problem, sol);
  report.max_residual_1 = report.residuals.max1;
  report.max_residual_2 = report.residuals.max2;
  report.origin_residual_1 = report.residuals.origin1;
  report.origin_residual_2 = report.residuals.origin2;
  report.monotone_iterates_ok = check_monotone_iterates(result.trace);
  report.hessian_identity_max_err = std::max(hessian_forms_consistency(sol.u1, sol.du1, problem.k(1), problem.N()),
                                             hessian_forms_consistency(sol.u2, sol.du2, problem.k(2), problem.N()));
  report.convexity = convexity_report(problem, sol);

  if (tables == nullptr) {
    report.envelope_note = "no kernel tables supplied";
    return report;
  }
  try {
    const BoundEnvelope env = envelope(problem, *tables);
    report.envelope = check_envelope(sol, env);
    if (!result.trace.iterates.empty()) report.iterate_envelope = check_upper_bound_iterates(result.trace, env);
  } catch (const RangeError& e) {
    report.envelope_note = e.what();
  }
  return report;
}

}  // namespace khess
