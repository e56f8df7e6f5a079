#pragma once

#include <utility>
#include <vector>

#include "khess/grid.hpp"
#include "khess/kernels.hpp"
#include "khess/problem.hpp"

namespace khess {

struct SolverOptions {
  double tol = 1e-10;                // sup-norm change between iterates
  int max_iter = 500;
  double blow_up_ceiling = 1e12;     // nodal values above this abort the solve
  int gauss_points = 4;
  bool keep_iterates = true;
};

struct IteratePair {
  GridFunction u1, u2;
};

struct IterationTrace {
  std::vector<IteratePair> iterates;  // m = 0, 1, ... (empty unless keep_iterates)
  std::vector<double> sup_norm_deltas;  // delta between iterate m and m-1, m >= 1
  bool converged = false;
  int iterations_used = 0;
};

/// Radial pair with u_i(0) = a_i and du_i = u_i' from the integral form.
struct SolutionPair {
  GridFunction u1, u2, du1, du2;
  double a1 = 0.0, a2 = 0.0;
  double R = 0.0;
};

struct SolveResult {
  SolutionPair solution;
  IterationTrace trace;
};

/// The monotone scheme u_i^m = a_i + int_0^r Phi_i(t, f_i(u_1^(m-1), u_2^(m-1))) dt
/// started from (a1, a2). Kernels are built once per grid; between nodes the
/// frozen iterate is interpolated linearly.
class SuccessiveApproximation {
 public:
  SuccessiveApproximation(const ValidatedProblem& problem, RadialGrid grid, int gauss_points = 4);

  const RadialGrid& grid() const noexcept { return grid_; }
  const ValidatedProblem& problem() const noexcept { return problem_; }

  IteratePair initial() const;
  IteratePair step(const IteratePair& prev) const;
  /// Phi_i(r_j, f_i(u1, u2)) at the nodes, i.e. the derivatives of the next iterate.
  std::pair<GridFunction, GridFunction> derivatives(const IteratePair& current) const;

  /// Throws NumericalError on suspected blow-up; non-convergence is reported
  /// through trace.converged.
  SolveResult solve(const SolverOptions& options = {}) const;

 private:
  struct Sweep {
    RadialKernel::Samples first, second;
  };
  Sweep sweep(const IteratePair& prev) const;

  ValidatedProblem problem_;
  RadialGrid grid_;
  RadialKernel kernel1_, kernel2_;
};

IteratePair iterate_once(const ValidatedProblem& problem, const RadialGrid& grid, const IteratePair& prev);

SolveResult solve_successive(const ValidatedProblem& problem, const RadialGrid& grid,
                             const SolverOptions& options = {});

}  // namespace khess
