#include <doctest.h>

#include <cmath>

#include "khess/classifier.hpp"
#include "khess/error.hpp"
#include "test_support.hpp"

using namespace khess;
using khess::testing::Data;
using khess::testing::problem_of;

namespace {

LimitEstimate finite_at(double v, double err = 1e-9) {
  LimitEstimate e;
  e.verdict = LimitVerdict::finite;
  e.value = v;
  e.error_bound = err;
  return e;
}

LimitEstimate with(LimitVerdict v) {
  LimitEstimate e;
  e.verdict = v;
  e.error_bound = INFINITY;
  return e;
}

Data decaying(double c, const char* f) {
  const std::string p = std::to_string(c) + "/(1+t)^4";
  return {.p1 = p, .p2 = p, .f1 = f, .f2 = f};
}

}  // namespace

TEST_CASE("decision table") {
  const LimitEstimate fin = finite_at(1.0), div = with(LimitVerdict::divergent), inc = with(LimitVerdict::inconclusive);
  CHECK(decide(div, fin, fin).verdict == Verdict::Theorem1_Case1_bounded);
  CHECK(decide(div, div, div).verdict == Verdict::Theorem1_Case2_large);
  CHECK(decide(div, fin, div).verdict == Verdict::mixed_case_out_of_scope);
  CHECK(decide(div, div, fin).verdict == Verdict::mixed_case_out_of_scope);
  CHECK(decide(finite_at(0.5), finite_at(0.1), finite_at(0.2)).verdict == Verdict::Theorem2_bounded_with_envelope);
  CHECK(decide(finite_at(0.5), finite_at(0.1), finite_at(0.2)).theorem2_margin == doctest::Approx(0.2));
  CHECK(decide(finite_at(0.3), finite_at(0.1), finite_at(0.2)).verdict == Verdict::inconclusive);
  CHECK(decide(finite_at(0.2), finite_at(0.1), finite_at(0.2)).verdict == Verdict::inconclusive);
  // Margin 1e-6 swamped by error bounds 1e-5.
  CHECK(decide(finite_at(0.3 + 1e-6, 1e-5), finite_at(0.1), finite_at(0.2)).verdict == Verdict::inconclusive);
  CHECK(decide(finite_at(0.5), div, fin).verdict == Verdict::inconclusive);

  // Every combination yields one verdict consistent with the required limits.
  const LimitEstimate options[] = {fin, div, inc};
  for (const auto& F : options) {
    for (const auto& P1 : options) {
      for (const auto& P2 : options) {
        const auto r = decide(F, P1, P2);
        if (r.verdict == Verdict::Theorem1_Case1_bounded) {
          CHECK((F.verdict == LimitVerdict::divergent && P1.verdict == LimitVerdict::finite &&
                 P2.verdict == LimitVerdict::finite));
        }
        if (r.verdict == Verdict::Theorem1_Case2_large) {
          CHECK((F.verdict == LimitVerdict::divergent && P1.verdict == LimitVerdict::divergent &&
                 P2.verdict == LimitVerdict::divergent));
        }
        if (r.verdict == Verdict::Theorem2_bounded_with_envelope) {
          CHECK((F.verdict == LimitVerdict::finite && P1.verdict == LimitVerdict::finite &&
                 P2.verdict == LimitVerdict::finite));
          CHECK(*r.theorem2_margin > 0.0);
        }
        if (F.verdict == LimitVerdict::inconclusive || P1.verdict == LimitVerdict::inconclusive ||
            P2.verdict == LimitVerdict::inconclusive) {
          CHECK(r.verdict == Verdict::inconclusive);
        }
        CHECK_FALSE(r.reason.empty());
      }
    }
  }
}

TEST_CASE("classify examples") {
  CHECK(classify(problem_of({})).verdict == Verdict::Theorem1_Case2_large);

  const auto literal = classify(problem_of(decaying(1.0, "(u+v)^2")));
  CHECK(literal.F12_inf.verdict == LimitVerdict::finite);
  CHECK(literal.P1_inf.verdict == LimitVerdict::finite);
  CHECK(literal.P2_inf.verdict == LimitVerdict::finite);
  CHECK(std::abs(*literal.F12_inf.value - 0.0625) < 1e-6);
  REQUIRE(literal.theorem2_margin.has_value());
  // P_i(inf) = 1/6 each, so the margin 1/16 - 1/3 is negative.
  CHECK(*literal.theorem2_margin == doctest::Approx(1.0 / 16.0 - 1.0 / 3.0).epsilon(1e-6));
  CHECK(literal.verdict == Verdict::inconclusive);

  const auto scaled = classify(problem_of(decaying(0.1, "(u+v)^2")));
  CHECK(scaled.verdict == Verdict::Theorem2_bounded_with_envelope);
  CHECK(*scaled.theorem2_margin == doctest::Approx(1.0 / 16.0 - 1.0 / 30.0).epsilon(1e-6));

  CHECK(classify(problem_of(decaying(1.0, "3"))).verdict == Verdict::Theorem1_Case1_bounded);
  CHECK(classify(problem_of({.p1 = "1/(1+t)^4"})).verdict == Verdict::mixed_case_out_of_scope);
}

TEST_CASE("F12 verdict does not depend on p") {
  for (const char* f : {"1", "(u+v)^2", "u+v"}) {
    const auto a = classify(problem_of(decaying(1.0, f)));
    const auto b = classify(problem_of(decaying(25.0, f)));
    CHECK(a.F12_inf.verdict == b.F12_inf.verdict);
  }
}

TEST_CASE("envelope examples") {
  const auto vp = problem_of({});
  const auto g = RadialGrid::uniform(3.0, 61);
  const auto env = envelope(vp, build_kernel_tables(vp, g, 0.0));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g[j];
    CHECK(std::abs(env.lower1[j] - (1.0 + r * r / 6.0)) < 1e-12);
    CHECK(std::abs(env.upper[j] - (2.0 + 2.0 * r * r / 3.0)) < 1e-10);
  }
  CHECK(env.lower1[0] == 1.0);
  CHECK(env.lower2[0] == 1.0);
  CHECK(env.upper[0] == 2.0);

  const auto flat = problem_of({.a1 = 0.5, .a2 = 2.0, .p1 = "0", .p2 = "0", .f1 = "u+v", .f2 = "u*v"});
  const auto e0 = envelope(flat, build_kernel_tables(flat, g, 0.0));
  CHECK(e0.lower1.values().cwiseAbs().maxCoeff() == 0.5);
  CHECK(e0.lower2.values().maxCoeff() == 2.0);
  CHECK(e0.upper.values().maxCoeff() == 2.5);
  CHECK(e0.upper.values().minCoeff() == 2.5);
}

TEST_CASE("envelope consistency on a bounded instance") {
  const auto vp = problem_of(decaying(0.1, "(u+v)^2"));
  const auto report = classify(vp);
  REQUIRE(report.verdict == Verdict::Theorem2_bounded_with_envelope);
  const auto g = RadialGrid::geometric(50.0, 400, 1.01);
  const auto env = envelope(vp, build_kernel_tables(vp, g, 0.0));
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(env.lower1[j] + env.lower2[j] <= env.upper[j] + 1e-12);
    if (j > 0) CHECK(env.upper[j] >= env.upper[j - 1]);
  }
  const double ceiling = theorem2_ceiling(vp, report);
  CHECK(env.upper.values().maxCoeff() < ceiling);
  CHECK_THROWS_AS(theorem2_ceiling(vp, classify(problem_of({}))), UsageError);
}

TEST_CASE("envelope outside the F12 range") {
  const auto vp = problem_of(decaying(1.0, "(u+v)^2"));
  const auto g = RadialGrid::uniform(40.0, 81);
  CHECK_THROWS_AS(envelope(vp, build_kernel_tables(vp, g, 0.0)), RangeError);
}
