#include "khess/solver.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "khess/error.hpp"

namespace khess {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double value_of(const FuncSpec2D& f, int index, double u, double v) {
  const double value = f.checked(u, v);
  if (value < 0.0) {
    throw HypothesisError("f" + std::to_string(index) + " = '" + f.source_text() + "' is negative (" + fmt(value) +
                          ") at (u,v)=(" + fmt(u) + ", " + fmt(v) + ")");
  }
  return value;
}

}  // namespace

SuccessiveApproximation::SuccessiveApproximation(const ValidatedProblem& problem, RadialGrid grid, int gauss_points)
    : problem_(problem),
      grid_(std::move(grid)),
      kernel1_(problem_, 1, grid_, gauss_points),
      kernel2_(problem_, 2, grid_, gauss_points) {}

IteratePair SuccessiveApproximation::initial() const {
  return {GridFunction(grid_, problem_.a(1)), GridFunction(grid_, problem_.a(2))};
}

SuccessiveApproximation::Sweep SuccessiveApproximation::sweep(const IteratePair& prev) const {
  if (!prev.u1.grid().same_as(grid_) || !prev.u2.grid().same_as(grid_)) {
    throw UsageError("iterate is defined on a different grid");
  }
  // Both kernels share grid and rule, hence the same weight points.
  const auto& points = kernel1_.weight_points();
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd w1(n), w2(n);
  const auto& u1 = prev.u1.values();
  const auto& u2 = prev.u2.values();
  const auto& f1 = problem_.f(1);
  const auto& f2 = problem_.f(2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    const auto j = static_cast<Eigen::Index>(pt.interval);
    const double x = u1(j) + pt.theta * (u1(j + 1) - u1(j));
    const double y = u2(j) + pt.theta * (u2(j + 1) - u2(j));
    w1(i) = value_of(f1, 1, x, y);
    w2(i) = value_of(f2, 2, x, y);
  }
  return {kernel1_.evaluate(w1), kernel2_.evaluate(w2)};
}

IteratePair SuccessiveApproximation::step(const IteratePair& prev) const {
  Sweep s = sweep(prev);
  Eigen::VectorXd u1 = s.first.integral.array() + problem_.a(1);
  Eigen::VectorXd u2 = s.second.integral.array() + problem_.a(2);
  return {GridFunction(grid_, std::move(u1)), GridFunction(grid_, std::move(u2))};
}

std::pair<GridFunction, GridFunction> SuccessiveApproximation::derivatives(const IteratePair& current) const {
  Sweep s = sweep(current);
  return {GridFunction(grid_, std::move(s.first.phi)), GridFunction(grid_, std::move(s.second.phi))};
}

SolveResult SuccessiveApproximation::solve(const SolverOptions& options) const {
  if (!(options.tol > 0.0)) throw UsageError("solver tolerance must be positive");
  if (options.max_iter < 1) throw UsageError("solver needs max_iter >= 1");

  SolveResult result;
  auto& trace = result.trace;
  IteratePair current = initial();
  if (options.keep_iterates) trace.iterates.push_back(current);

  for (int m = 1; m <= options.max_iter; ++m) {
    IteratePair next;
    try {
      next = step(current);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("finite-radius blow-up suspected at iteration ") + std::to_string(m) + ": " +
                           e.what());
    }
    const double top = std::max(next.u1.values().maxCoeff(), next.u2.values().maxCoeff());
    if (!(top <= options.blow_up_ceiling)) {
      throw NumericalError("finite-radius blow-up suspected: iterate " + std::to_string(m) + " exceeds " +
                           fmt(options.blow_up_ceiling) + " on [0, " + fmt(grid_.radius()) + "]");
    }
    const double delta = std::max((next.u1.values() - current.u1.values()).lpNorm<Eigen::Infinity>(),
                                  (next.u2.values() - current.u2.values()).lpNorm<Eigen::Infinity>());
    trace.sup_norm_deltas.push_back(delta);
    trace.iterations_used = m;
    current = std::move(next);
    if (options.keep_iterates) trace.iterates.push_back(current);
    if (delta < options.tol) {
      trace.converged = true;
      break;
    }
  }

  auto [du1, du2] = derivatives(current);
  result.solution = SolutionPair{current.u1, current.u2, std::move(du1), std::move(du2),
                                 problem_.a(1), problem_.a(2), grid_.radius()};
  return result;
}

IteratePair iterate_once(const ValidatedProblem& problem, const RadialGrid& grid, const IteratePair& prev) {
  return SuccessiveApproximation(problem, grid).step(prev);
}

SolveResult solve_successive(const ValidatedProblem& problem, const RadialGrid& grid, const SolverOptions& options) {
  return SuccessiveApproximation(problem, grid, options.gauss_points).solve(options);
}

}  // namespace khess
