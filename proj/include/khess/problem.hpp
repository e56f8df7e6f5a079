#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "khess/funcspec.hpp"

namespace khess {

/// Raw system data: dimension, Hessian orders, centre values u_i(0) = a_i,
/// convection weights b_i, source weights p_i and nonlinearities f_i.
struct ProblemSpec {
  int N = 3;
  int k1 = 1;
  int k2 = 1;
  double a1 = 1.0;
  double a2 = 1.0;
  FuncSpec1D b1, b2, p1, p2;
  FuncSpec2D f1, f2;
};

/// Sampling ranges used while validating the structural assumptions.
struct ValidationOptions {
  double sample_radius = 10.0;  // b_i, p_i sampled on [0, sample_radius]
  int radial_samples = 401;
  double monotone_box = 0.0;  // 0 selects max(10, 4 (a1 + a2))
  int lattice = 50;
  double positivity_span = 0.0;  // D(t) = f1^(1/k1)(t,t) + f2^(1/k2)(t,t) sampled on [a1+a2, a1+a2+span]; 0 selects the box
  bool require_positive_rate = true;  // off for runs that never form F12, e.g. f1 = f2 = 0
};

/// Exact binomial coefficient in 64-bit arithmetic (overflow-checked).
std::uint64_t binomial(int n, int k);

/// One equation of the system viewed in isolation.
struct Component {
  int index = 1;      // 1 or 2
  int k = 1;          // Hessian order
  double a = 0.0;     // centre value
  double C = 1.0;     // (N-1)!/[k!(N-k)!]
  double binom = 1.0; // C_{N-1}^{k-1}
  const FuncSpec1D* b = nullptr;
  const FuncSpec1D* p = nullptr;
  const FuncSpec2D* f = nullptr;
};

/// Problem data that passed validation, plus derived constants.
class ValidatedProblem {
 public:
  int N() const noexcept { return spec_.N; }
  int k(int i) const { return i == 1 ? spec_.k1 : spec_.k2; }
  double a(int i) const { return i == 1 ? spec_.a1 : spec_.a2; }
  double center_sum() const noexcept { return spec_.a1 + spec_.a2; }
  /// C0 for i = 1, C00 for i = 2.
  double C(int i) const { return i == 1 ? C0_ : C00_; }
  double binom(int i) const { return i == 1 ? binom1_ : binom2_; }
  const FuncSpec1D& b(int i) const { return i == 1 ? spec_.b1 : spec_.b2; }
  const FuncSpec1D& p(int i) const { return i == 1 ? spec_.p1 : spec_.p2; }
  const FuncSpec2D& f(int i) const { return i == 1 ? spec_.f1 : spec_.f2; }
  Component component(int i) const;

  const ProblemSpec& spec() const noexcept { return spec_; }
  const MonotoneReport& monotone_report(int i) const { return i == 1 ? monotone1_ : monotone2_; }
  double monotone_box() const noexcept { return box_; }

  /// f1^(1/k1)(t,t) + f2^(1/k2)(t,t), the denominator of the F_{1,2} integrand.
  double diagonal_rate(double t) const;

  friend ValidatedProblem validate(ProblemSpec spec, const ValidationOptions& options);

 private:
  ProblemSpec spec_;
  double C0_ = 1.0, C00_ = 1.0, binom1_ = 1.0, binom2_ = 1.0;
  MonotoneReport monotone1_, monotone2_;
  double box_ = 0.0;
};

/// Checks dimension and orders (UsageError), then b_i, p_i >= 0 on the
/// sampled radii, f_i nondecreasing and nonnegative on the lattice, and
/// D(t) > 0 on sampled t >= a1 + a2 (HypothesisError).
ValidatedProblem validate(ProblemSpec spec, const ValidationOptions& options = {});

}  // namespace khess
