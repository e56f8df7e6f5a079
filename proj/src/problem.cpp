#include "khess/problem.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "khess/error.hpp"

namespace khess {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_radial(const FuncSpec1D& g, const char* name, const ValidationOptions& options) {
  const int n = std::max(options.radial_samples, 2);
  for (int j = 0; j < n; ++j) {
    const double t = options.sample_radius * j / (n - 1);
    const double v = g(t);
    if (!std::isfinite(v)) {
      throw HypothesisError(std::string(name) + " = '" + g.source_text() + "' is not finite at t=" + fmt(t));
    }
    if (v < 0.0) {
      throw HypothesisError(std::string(name) + " = '" + g.source_text() + "' is negative at t=" + fmt(t) +
                            " (value " + fmt(v) + "); weights must map [0,inf) into [0,inf)");
    }
  }
}

MonotoneReport check_nonlinearity(const FuncSpec2D& f, const char* name, double box, int lattice) {
  MonotoneReport report;
  try {
    report = check_c1_monotone(f, box, box, lattice);
  } catch (const DomainError& e) {
    throw HypothesisError(std::string(name) + ": " + e.what());
  }
  if (report.min_value < 0.0) {
    throw HypothesisError(std::string(name) + " = '" + f.source_text() + "' takes the negative value " +
                          fmt(report.min_value) + " on [0," + fmt(box) + "]^2");
  }
  if (!report.is_nondecreasing_u || !report.is_nondecreasing_v) {
    const auto& w = *report.worst_violation;
    throw HypothesisError(std::string(name) + " = '" + f.source_text() + "' decreases in " + w.axis + " near (u,v)=(" +
                          fmt(w.u) + ", " + fmt(w.v) + ") by " + fmt(-w.amount));
  }
  return report;
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    const auto num = static_cast<std::uint64_t>(n - k + i);
    // result * num / i is exact at every step since it equals binom(n-k+i, i).
    if (result > std::numeric_limits<std::uint64_t>::max() / num) throw UsageError("binomial overflow");
    result = result * num / static_cast<std::uint64_t>(i);
  }
  return result;
}

Component ValidatedProblem::component(int i) const {
  return Component{i, k(i), a(i), C(i), binom(i), &b(i), &p(i), &f(i)};
}

double ValidatedProblem::diagonal_rate(double t) const {
  const double g1 = spec_.f1(t, t);
  const double g2 = spec_.f2(t, t);
  auto root = [](double v, int k) {
    if (v <= 0.0) return v < 0.0 ? std::nan("") : 0.0;
    switch (k) {
      case 1:
        return v;
      case 2:
        return std::sqrt(v);
      case 3:
        return std::cbrt(v);
      default:
        return std::pow(v, 1.0 / k);
    }
  };
  return root(g1, spec_.k1) + root(g2, spec_.k2);
}

ValidatedProblem validate(ProblemSpec spec, const ValidationOptions& options) {
  if (spec.N < 3) throw UsageError("dimension N must be at least 3 (got " + std::to_string(spec.N) + ")");
  if (spec.N > 60) throw UsageError("dimension N above 60 is not supported");
  for (int k : {spec.k1, spec.k2}) {
    if (k < 1 || k > spec.N) {
      throw UsageError("Hessian order k must lie in {1,...,N} (got " + std::to_string(k) + ")");
    }
  }
  if (!(spec.a1 >= 0.0) || !(spec.a2 >= 0.0) || !std::isfinite(spec.a1) || !std::isfinite(spec.a2)) {
    throw UsageError("centre values a1, a2 must be finite and nonnegative");
  }
  if (!(spec.a1 + spec.a2 > 0.0)) throw UsageError("centre values must satisfy a1 + a2 > 0");

  check_radial(spec.b1, "b1", options);
  check_radial(spec.b2, "b2", options);
  check_radial(spec.p1, "p1", options);
  check_radial(spec.p2, "p2", options);

  ValidatedProblem vp;
  vp.box_ = options.monotone_box > 0.0 ? options.monotone_box : std::max(10.0, 4.0 * (spec.a1 + spec.a2));
  vp.monotone1_ = check_nonlinearity(spec.f1, "f1", vp.box_, options.lattice);
  vp.monotone2_ = check_nonlinearity(spec.f2, "f2", vp.box_, options.lattice);

  const int N = spec.N;
  vp.binom1_ = static_cast<double>(binomial(N - 1, spec.k1 - 1));
  vp.binom2_ = static_cast<double>(binomial(N - 1, spec.k2 - 1));
  vp.C0_ = vp.binom1_ / spec.k1;
  vp.C00_ = vp.binom2_ / spec.k2;
  vp.spec_ = std::move(spec);

  if (!options.require_positive_rate) return vp;
  const double A = vp.center_sum();
  const double span = options.positivity_span > 0.0 ? options.positivity_span : vp.box_;
  const int n = std::max(options.radial_samples, 2);
  for (int j = 0; j < n; ++j) {
    const double t = A + span * j / (n - 1);
    const double d = vp.diagonal_rate(t);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw HypothesisError("f1^(1/k1)(t,t) + f2^(1/k2)(t,t) must be positive for t >= a1+a2; fails at t=" + fmt(t));
    }
  }
  return vp;
}

}  // namespace khess
