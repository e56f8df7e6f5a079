#include <doctest.h>

#include <cmath>
#include <random>

#include "khess/error.hpp"
#include "khess/kernels.hpp"
#include "test_support.hpp"

using namespace khess;
using khess::testing::Data;
using khess::testing::problem_of;

namespace {

bool nondecreasing(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) < v(i - 1)) return false;
  }
  return true;
}

std::uint64_t factorial(int n) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

TEST_CASE("validation of problem data") {
  CHECK_THROWS_AS(problem_of({.N = 2}), UsageError);
  CHECK_THROWS_AS(problem_of({.N = 3, .k1 = 4}), UsageError);
  CHECK_THROWS_AS(problem_of({.k2 = 0}), UsageError);
  CHECK_THROWS_AS(problem_of({.a1 = -1.0}), UsageError);
  CHECK_THROWS_AS(problem_of({.a1 = 0.0, .a2 = 0.0}), UsageError);
  CHECK_THROWS_AS(problem_of({.b1 = "t - 1"}), HypothesisError);
  CHECK_THROWS_AS(problem_of({.p2 = "-1"}), HypothesisError);
  CHECK_THROWS_AS(problem_of({.f1 = "(u-5)^2"}), HypothesisError);
  CHECK_THROWS_AS(problem_of({.f1 = "u - 3"}), HypothesisError);
  CHECK_THROWS_AS(problem_of({.f1 = "0", .f2 = "0"}), HypothesisError);  // diagonal rate vanishes
  CHECK_NOTHROW(problem_of({.a1 = 0.0, .f1 = "u*v", .f2 = "v"}));
}

TEST_CASE("binomial constants") {
  for (int N = 3; N <= 12; ++N) {
    for (int k = 1; k <= N; ++k) {
      // C0 = (N-1)!/[k!(N-k)!] = C_{N-1}^{k-1}/k, in exact integer arithmetic.
      CHECK(binomial(N - 1, k - 1) * factorial(k) * factorial(N - k) == static_cast<std::uint64_t>(k) * factorial(N - 1));
      const auto vp = problem_of({.N = N, .k1 = k, .k2 = k});
      const double c0 = static_cast<double>(factorial(N - 1)) / static_cast<double>(factorial(k) * factorial(N - k));
      CHECK(vp.C(1) == doctest::Approx(c0).epsilon(1e-15));
      CHECK(vp.C(2) == vp.C(1));
      CHECK(vp.binom(1) == static_cast<double>(binomial(N - 1, k - 1)));
    }
  }
  CHECK(binomial(5, 7) == 0);
  CHECK(binomial(60, 30) == 118264581564861424ull);
}

TEST_CASE("exponent_table examples") {
  const auto g = RadialGrid::uniform(3.0, 61);
  CHECK(exponent_table(problem_of({.b1 = "0"}), 1, g).values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(exponent_table(problem_of({.b1 = "2"}), 1, g)(1.5) == doctest::Approx(3.0).epsilon(1e-14));
  const auto E = exponent_table(problem_of({.k1 = 2, .b1 = "1"}), 1, g);
  CHECK(std::abs(E(2.0) - 2.0) < 1e-12);
  CHECK(nondecreasing(E.values()));
}

TEST_CASE("kernel_phi closed forms") {
  auto one = [](double) { return 1.0; };
  CHECK(kernel_phi(problem_of({}), 1, 2.0, one) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(kernel_phi(problem_of({.k1 = 3}), 1, 2.0, one) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(kernel_phi(problem_of({.k1 = 2, .b1 = "5"}), 1, 0.0, one) == 0.0);
  CHECK_THROWS_AS(kernel_phi(problem_of({}), 1, -1.0, one), UsageError);
  CHECK_THROWS_AS(kernel_phi(problem_of({}), 1, 1.0, [](double) { return -1.0; }), NumericalError);
}

TEST_CASE("combined exponent form matches the naive B- * int B+ product") {
  // N = 4, k = 2: C = 3!/(2! 2!) = 1.5 and E(t) = int_0^t s * 0.3(1+s) / 1.5 ds.
  const auto vp = problem_of({.N = 4, .k1 = 2, .b1 = "0.3*(1+t)", .p1 = "1/(1+t)"});
  auto E = [](double t) {
    return adaptive_integral([](double s) { return s * 0.3 * (1.0 + s) / 1.5; }, 0.0, t, 1e-14).value;
  };
  auto w = [](double t) { return 1.0 + t * t; };
  for (double r : {0.25, 1.0, 2.0, 3.5}) {
    const double B_minus = std::pow(r, 2 - 4) / 1.5 * std::exp(-E(r));
    auto integrand = [&](double t) { return t * t * t * std::exp(E(t)) / (1.0 + t) * w(t); };
    const double rough = adaptive_integral(integrand, 0.0, r, 1e-6).value;
    const double inner = adaptive_integral(integrand, 0.0, r, 1e-13 * rough).value;
    const double naive = std::sqrt(B_minus * inner);
    const double combined = kernel_phi(vp, 1, r, w);
    CHECK(std::abs(combined - naive) / naive < 1e-10);
  }
}

TEST_CASE("scaling p by c scales Phi by c^(1/k)") {
  for (int k : {1, 2, 3}) {
    const auto base = problem_of({.N = 5, .k1 = k, .b1 = "0.5", .p1 = "exp(-t)"});
    const auto scaled = problem_of({.N = 5, .k1 = k, .b1 = "0.5", .p1 = "7*exp(-t)"});
    const auto g = RadialGrid::uniform(4.0, 41);
    const RadialKernel kb(base, 1, g), ks(scaled, 1, g);
    const double factor = std::pow(7.0, 1.0 / k);
    for (Eigen::Index j = 1; j < 41; ++j) {
      CHECK(std::abs(ks.unit().phi(j) - factor * kb.unit().phi(j)) <= 1e-12 * factor * kb.unit().phi(j));
    }
  }
}

TEST_CASE("P_table examples") {
  const auto g = RadialGrid::uniform(2.0, 201);
  CHECK(std::abs(P_table(problem_of({}), 1, g)(2.0) - 2.0 / 3.0) < 1e-6);
  CHECK(std::abs(P_table(problem_of({.k1 = 3}), 1, g)(2.0) - 2.0) < 1e-10);
  CHECK(P_table(problem_of({.p1 = "0"}), 1, g).values().cwiseAbs().maxCoeff() == 0.0);
  const auto P = P_table(problem_of({.N = 6, .k1 = 4, .b1 = "t", .p1 = "1/(1+t)^2"}), 1, g);
  CHECK(nondecreasing(P.values()));
  CHECK(P[0] == 0.0);
}

TEST_CASE("F12 table examples") {
  const auto lin = problem_of({});
  const auto t = F12Table::build(lin, 10.0);
  CHECK(t(4.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t(2.0) == 0.0);
  CHECK(t.inverse(1.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(t.inverse(0.0) == 2.0);
  CHECK_THROWS_AS(t.inverse(t.sup() + 1.0), RangeError);
  CHECK_THROWS_AS(t(11.0), RangeError);

  const auto quad = problem_of({.f1 = "(u+v)^2", .f2 = "(u+v)^2"});
  const auto q = F12Table::build(quad, 100.0);
  CHECK(std::abs(q(4.0) - 0.03125) < 1e-13);
  CHECK(std::abs(F12_inverse(q, 0.03125) - 4.0) < 1e-8);
  for (Eigen::Index i = 1; i < q.values().size(); ++i) CHECK(q.values()(i) > q.values()(i - 1));
}

TEST_CASE("F12 inverse round trip") {
  std::mt19937_64 rng(5);
  for (const char* f : {"1", "(u+v)^2", "sqrt(u+v) + u*v", "exp(u/10)"}) {
    const auto vp = problem_of({.k1 = 2, .a1 = 0.5, .a2 = 1.5, .f1 = f, .f2 = f});
    const auto table = F12Table::build(vp, 50.0);
    std::uniform_real_distribution<double> s_dist(2.0, 50.0);
    for (int i = 0; i < 100; ++i) {
      const double s = s_dist(rng);
      CHECK(std::abs(table.inverse(table(s)) - s) <= 1e-8 * s);
    }
  }
}

TEST_CASE("F12 covering grows the table") {
  const auto vp = problem_of({});
  const auto t = F12Table::covering(vp, 1000.0, 4.0);
  CHECK(t.sup() > 1000.0);
  const auto quad = problem_of({.f1 = "(u+v)^2", .f2 = "(u+v)^2"});
  CHECK_THROWS_AS(F12Table::covering(quad, 0.1), RangeError);  // F12(inf) = 1/16
}

TEST_CASE("limits examples") {
  const auto flat = limits(problem_of({}));
  CHECK(flat.P1_inf.verdict == LimitVerdict::divergent);
  CHECK(flat.F12_inf.verdict == LimitVerdict::divergent);

  // int_0^inf Phi = int_0^inf t p(t) dt by parts; for p = (1+t)^-4 that is B(2,2) = 1/6.
  const auto decaying = limits(problem_of({.p1 = "1/(1+t)^4", .p2 = "1/(1+t)^4", .f1 = "(u+v)^2", .f2 = "(u+v)^2"}));
  REQUIRE(decaying.P1_inf.verdict == LimitVerdict::finite);
  CHECK(std::abs(*decaying.P1_inf.value - 1.0 / 6.0) < 1e-6);
  REQUIRE(decaying.F12_inf.verdict == LimitVerdict::finite);
  CHECK(std::abs(*decaying.F12_inf.value - 0.0625) < 1e-6);
}

TEST_CASE("kernel tables invariants") {
  const auto vp = problem_of({.N = 4, .k1 = 2, .k2 = 3, .b1 = "1+t", .b2 = "0.1", .f1 = "u+v", .f2 = "preset:sum_power(1,2)"});
  const auto tables = build_kernel_tables(vp, RadialGrid::uniform(3.0, 121), 0.0);
  CHECK(nondecreasing(tables.E1.values()));
  CHECK(nondecreasing(tables.E2.values()));
  CHECK(nondecreasing(tables.P1.values()));
  CHECK(nondecreasing(tables.P2.values()));
  CHECK(tables.F12.sup() > tables.P1.values().maxCoeff() + tables.P2.values().maxCoeff());
}
