#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "khess/error.hpp"
#include "khess/grid.hpp"

namespace khess {

/// Gauss-Legendre rule mapped to [0, 1].
template <typename Scalar>
struct GaussRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  Eigen::Index size() const { return nodes.size(); }
};

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
/// Legendre recurrence, weights the squared first eigenvector components.
template <typename Scalar = double>
GaussRule<Scalar> gauss_legendre(int points) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (points < 1) throw UsageError("Gauss-Legendre rule needs at least one point");
  Matrix jacobi = Matrix::Zero(points, points);
  for (int i = 1; i < points; ++i) {
    const Scalar b = Scalar(i) / std::sqrt(Scalar(4) * Scalar(i) * Scalar(i) - Scalar(1));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  GaussRule<Scalar> rule;
  rule.nodes = (eig.eigenvalues().array() + Scalar(1)) / Scalar(2);
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

namespace detail {

/// Integral over [a, b] of the Lagrange basis polynomials through `stencil`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lagrange_weights(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& stencil,
                                                          Scalar a, Scalar b) {
  const Eigen::Index m = stencil.size();
  const Scalar h = b - a;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = (stencil.array() - a) / h;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    // Coefficients of prod_{k != i} (z - z_k) / (z_i - z_k), lowest degree first.
    std::vector<Scalar> coeff{Scalar(1)};
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == i) continue;
      const Scalar scale = Scalar(1) / (z(i) - z(k));
      std::vector<Scalar> next(coeff.size() + 1, Scalar(0));
      for (std::size_t d = 0; d < coeff.size(); ++d) {
        next[d + 1] += coeff[d] * scale;
        next[d] -= coeff[d] * z(k) * scale;
      }
      coeff = std::move(next);
    }
    Scalar integral(0);
    for (std::size_t d = 0; d < coeff.size(); ++d) integral += coeff[d] / Scalar(d + 1);
    w(i) = integral * h;
  }
  return w;
}

}  // namespace detail

/// Running integral F(x_j) = int_{x_0}^{x_j} f, F(x_0) = 0.
///
/// Even nodes accumulate composite Simpson over consecutive interval pairs
/// (the three-point rule on the pair; trapezoid when adjacent spacings differ
/// by more than a factor of two). Odd nodes add a four-point interpolatory
/// rule over their last interval to the preceding even node, so cubics are
/// integrated exactly at every node of a uniform grid. When the local samples
/// are nonnegative the odd values are clamped between their even neighbours,
/// which keeps the output nondecreasing for nonnegative integrands.
template <typename DerivedX, typename DerivedF>
Eigen::Matrix<typename DerivedF::Scalar, Eigen::Dynamic, 1> cumulative_integral(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedF>& f) {
  using Scalar = typename DerivedF::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = x.size();
  if (f.size() != n) throw UsageError("cumulative_integral: sample count does not match node count");
  if (n < 2) throw UsageError("cumulative_integral: need at least two nodes");
  if (!f.allFinite()) throw NumericalError("cumulative_integral: non-finite sample value");

  Vector out = Vector::Zero(n);
  const Eigen::Index last = n - 1;

  for (Eigen::Index j = 0; j + 2 <= last; j += 2) {
    const Scalar h0 = x(j + 1) - x(j);
    const Scalar h1 = x(j + 2) - x(j + 1);
    const Scalar ratio = h1 / h0;
    Scalar pair;
    if (ratio >= Scalar(0.5) && ratio <= Scalar(2)) {
      const Scalar s = h0 + h1;
      pair = s / Scalar(6) * ((Scalar(2) - h1 / h0) * f(j) + s * s / (h0 * h1) * f(j + 1) +
                              (Scalar(2) - h0 / h1) * f(j + 2));
    } else {
      pair = Scalar(0.5) * (h0 * (f(j) + f(j + 1)) + h1 * (f(j + 1) + f(j + 2)));
    }
    out(j + 2) = out(j) + pair;
  }

  for (Eigen::Index j = 1; j <= last; j += 2) {
    const Eigen::Index width = std::min<Eigen::Index>(4, n);
    Eigen::Index start = std::clamp<Eigen::Index>(j - 2, 0, n - width);
    Vector stencil = x.segment(start, width).template cast<Scalar>();
    Vector w = detail::lagrange_weights<Scalar>(stencil, x(j - 1), x(j));
    Scalar piece(0);
    bool nonnegative = true;
    for (Eigen::Index i = 0; i < width; ++i) {
      piece += w(i) * f(start + i);
      nonnegative = nonnegative && f(start + i) >= Scalar(0);
    }
    Scalar value = out(j - 1) + piece;
    if (nonnegative) {
      value = std::max(value, out(j - 1));
      if (j + 1 <= last) value = std::min(value, out(j + 1));
    }
    out(j) = value;
  }
  return out;
}

inline GridFunction cumulative_integral(const GridFunction& samples) {
  return GridFunction(samples.grid(), cumulative_integral(samples.grid().nodes(), samples.values()));
}

template <typename Scalar>
struct IntegralResult {
  Scalar value{};
  Scalar error_estimate{};
};

namespace detail {

template <typename Scalar, typename F>
struct AdaptiveSimpson {
  F& f;
  int max_depth;
  long budget;
  long evaluations = 0;
  bool failed = false;
  Scalar error = Scalar(0);

  Scalar eval(Scalar t) {
    ++evaluations;
    const Scalar v = f(t);
    if (!std::isfinite(static_cast<double>(v))) {
      throw DomainError("adaptive_integral: non-finite integrand at t=" + std::to_string(static_cast<double>(t)));
    }
    return v;
  }

  Scalar recurse(Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole, Scalar tol, int depth) {
    const Scalar m = (a + b) / Scalar(2);
    const Scalar lm = (a + m) / Scalar(2);
    const Scalar rm = (m + b) / Scalar(2);
    const Scalar flm = eval(lm);
    const Scalar frm = eval(rm);
    const Scalar left = (m - a) / Scalar(6) * (fa + Scalar(4) * flm + fm);
    const Scalar right = (b - m) / Scalar(6) * (fm + Scalar(4) * frm + fb);
    const Scalar delta = left + right - whole;
    const bool unresolvable = !(lm > a && m > lm && rm > m && b > rm);
    if (std::abs(delta) <= Scalar(15) * tol || unresolvable) {
      error += std::abs(delta) / Scalar(15);
      return left + right + delta / Scalar(15);
    }
    if (depth >= max_depth || evaluations >= budget) {
      failed = true;
      error += std::abs(delta) / Scalar(15);
      return left + right + delta / Scalar(15);
    }
    return recurse(a, m, fa, flm, fm, left, tol / Scalar(2), depth + 1) +
           recurse(m, b, fm, frm, fb, right, tol / Scalar(2), depth + 1);
  }
};

}  // namespace detail

/// Adaptive Simpson with Richardson correction over [lo, hi].
/// Throws QuadratureError (best value attached) when a subinterval hits
/// max_depth or the evaluation budget before meeting its tolerance share.
template <typename Scalar, typename F>
IntegralResult<Scalar> adaptive_integral(F&& f, Scalar lo, Scalar hi, Scalar tol, int max_depth = 50,
                                         long max_evaluations = 4'000'000) {
  if (!(lo <= hi)) throw UsageError("adaptive_integral: requires lo <= hi");
  if (!(tol > Scalar(0))) throw UsageError("adaptive_integral: tolerance must be positive");
  if (lo == hi) return {Scalar(0), Scalar(0)};
  detail::AdaptiveSimpson<Scalar, std::remove_reference_t<F>> state{f, max_depth, max_evaluations};
  const Scalar fa = state.eval(lo);
  const Scalar fb = state.eval(hi);
  const Scalar fm = state.eval((lo + hi) / Scalar(2));
  const Scalar whole = (hi - lo) / Scalar(6) * (fa + Scalar(4) * fm + fb);
  const Scalar value = state.recurse(lo, hi, fa, fm, fb, whole, tol, 0);
  if (state.failed && state.error > tol) {
    throw QuadratureError("adaptive_integral: tolerance not reached on [" + std::to_string(static_cast<double>(lo)) +
                              ", " + std::to_string(static_cast<double>(hi)) + "]",
                          static_cast<double>(value), static_cast<double>(state.error));
  }
  return {value, state.error};
}

enum class LimitVerdict { finite, divergent, inconclusive };

/// How an improper integral over [R0, infinity) is probed.
struct LimitPolicy {
  double R_max = 1048576.0;      // 2^20
  int window_count = 3;          // consecutive window ratios inspected
  double decay_threshold = 0.5;  // ratio below which decay counts as geometric
  double tail_tolerance = 1e-6;  // admissible extrapolated tail when ratios lie in [threshold, 1)
  double abs_tol = 1e-12;        // per-window quadrature tolerances
  double rel_tol = 1e-10;
};

struct LimitEstimate {
  LimitVerdict verdict = LimitVerdict::inconclusive;
  std::optional<double> value;  // present iff finite
  double error_bound = 0.0;
  double evidence = 0.0;  // last window-to-window growth ratio
  std::vector<double> window_contributions;
};

/// Integrates f over [R0 2^j, R0 2^(j+1)] up to R_max and reads the window
/// contributions c_j. Divergent when the last `window_count` ratios
/// c_{j+1}/c_j are all >= 1. Finite when they are all below
/// decay_threshold, or all below 1 with a geometric tail estimate
/// c_last * rho / (1 - rho) within tail_tolerance; the value then includes
/// that tail and error_bound covers it plus the quadrature error.
template <typename F>
LimitEstimate estimate_limit(F&& f, double R0, const LimitPolicy& policy = {}) {
  if (!(R0 > 0.0)) throw UsageError("estimate_limit: R0 must be positive");
  if (policy.window_count < 1) throw UsageError("estimate_limit: window_count must be >= 1");
  LimitEstimate est;
  double sum = 0.0;
  double quad_error = 0.0;
  for (double lo = R0; lo * 2.0 <= policy.R_max * (1.0 + 1e-12); lo *= 2.0) {
    const double hi = lo * 2.0;
    // Coarse composite Simpson sets a relative target for the adaptive pass.
    double coarse = 0.0;
    constexpr int panels = 16;
    const double h = (hi - lo) / panels;
    for (int p = 0; p <= panels; ++p) {
      const double w = (p == 0 || p == panels) ? 1.0 : (p % 2 ? 4.0 : 2.0);
      const double v = f(lo + h * p);
      if (!std::isfinite(v)) throw DomainError("estimate_limit: non-finite integrand at t=" + std::to_string(lo + h * p));
      coarse += w * v;
    }
    coarse *= h / 3.0;
    const double tol = std::max(policy.abs_tol, policy.rel_tol * std::abs(coarse));
    double contribution;
    try {
      auto r = adaptive_integral<double>(f, lo, hi, tol);
      contribution = r.value;
      quad_error += r.error_estimate;
    } catch (const QuadratureError& e) {
      contribution = e.best_value();
      quad_error += e.error_estimate();
    }
    est.window_contributions.push_back(contribution);
    sum += contribution;
  }

  const auto& c = est.window_contributions;
  const auto windows = static_cast<int>(c.size());
  if (windows < policy.window_count + 1) {
    est.verdict = LimitVerdict::inconclusive;
    est.error_bound = std::numeric_limits<double>::infinity();
    return est;
  }

  constexpr double negligible = 1e-300;
  bool all_zero = true;
  bool any_negative = false;
  for (int j = windows - policy.window_count - 1; j < windows; ++j) {
    all_zero = all_zero && std::abs(c[j]) <= negligible;
    any_negative = any_negative || c[j] < 0.0;
  }
  if (all_zero) {
    est.verdict = LimitVerdict::finite;
    est.value = sum;
    est.error_bound = quad_error;
    est.evidence = 0.0;
    return est;
  }
  if (any_negative) {
    est.verdict = LimitVerdict::inconclusive;
    est.error_bound = std::numeric_limits<double>::infinity();
    return est;
  }

  double worst_ratio = 0.0;
  double least_ratio = std::numeric_limits<double>::infinity();
  for (int j = windows - policy.window_count; j < windows; ++j) {
    const double ratio = c[j - 1] > negligible ? c[j] / c[j - 1] : std::numeric_limits<double>::infinity();
    worst_ratio = std::max(worst_ratio, ratio);
    least_ratio = std::min(least_ratio, ratio);
  }
  est.evidence = c[windows - 2] > negligible ? c[windows - 1] / c[windows - 2] : worst_ratio;

  constexpr double unit_slack = 1e-9;
  if (least_ratio >= 1.0 - unit_slack) {
    est.verdict = LimitVerdict::divergent;
    est.error_bound = std::numeric_limits<double>::infinity();
    return est;
  }
  if (worst_ratio < 1.0 - unit_slack) {
    const double tail = c.back() * worst_ratio / (1.0 - worst_ratio);
    if (worst_ratio < policy.decay_threshold || tail <= policy.tail_tolerance) {
      est.verdict = LimitVerdict::finite;
      est.value = sum + tail;
      est.error_bound = tail + quad_error;
      return est;
    }
  }
  est.verdict = LimitVerdict::inconclusive;
  est.error_bound = std::numeric_limits<double>::infinity();
  return est;
}

inline const char* to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::finite:
      return "finite";
    case LimitVerdict::divergent:
      return "divergent";
    case LimitVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace khess
