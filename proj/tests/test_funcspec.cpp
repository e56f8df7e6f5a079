#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "khess/error.hpp"
#include "khess/funcspec.hpp"

using namespace khess;

namespace {

double eval1(const Expression& e, double t) {
  const std::array<double, 1> a{t};
  return e.evaluate(a);
}

double eval2(const Expression& e, double u, double v) {
  const std::array<double, 2> a{u, v};
  return e.evaluate(a);
}

// Random tree over {t} built with the canonical node builders.
Expression::NodePtr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  const auto& reg = IntrinsicRegistry::builtin();
  using K = Expression::Kind;
  switch (pick(rng)) {
    case 0: {
      static const double constants[] = {0.0, 1.0, 2.5, 0.1, 3.0, 1e-7, 12345.678, 6.02e23, -4.0, 0.3333333333333333};
      std::uniform_int_distribution<int> which(0, 9);
      return Expression::number(constants[which(rng)]);
    }
    case 1:
      return Expression::variable(0);
    case 2:
      return Expression::unary(K::negate, random_tree(rng, depth - 1));
    case 3:
      return Expression::binary(K::add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4:
      return Expression::binary(K::subtract, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5:
      return Expression::binary(K::multiply, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 6:
      return Expression::binary(K::divide, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 7:
      return Expression::binary(K::power, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 8:
      return Expression::call(reg.find(rng() % 2 ? "exp" : "sqrt"), {random_tree(rng, depth - 1)});
    default:
      return Expression::call(reg.find("pow"), {random_tree(rng, depth - 1), random_tree(rng, depth - 1)});
  }
}

}  // namespace

TEST_CASE("parse_func_1d examples") {
  CHECK(parse_func_1d("1")(3.7) == 1.0);
  CHECK(parse_func_1d("2*exp(-t)")(0.0) == 2.0);
  CHECK(parse_func_1d("1/(1+t)^4")(1.0) == doctest::Approx(0.0625).epsilon(1e-15));
}

TEST_CASE("parse_func_2d examples") {
  CHECK(parse_func_2d("1")(5.0, 6.0) == 1.0);
  CHECK(parse_func_2d("(u+v)^2")(1.0, 1.0) == 4.0);
  CHECK(parse_func_2d("u*v + u")(2.0, 3.0) == 8.0);
}

TEST_CASE("precedence and associativity") {
  auto e = [](const char* s, double t) { return parse_func_1d(s)(t); };
  CHECK(e("2^3^2", 0) == 512.0);      // right associative
  CHECK(e("-2^2", 0) == -4.0);        // unary minus below ^
  CHECK(e("2^-1", 0) == 0.5);
  CHECK(e("1-2-3", 0) == -4.0);
  CHECK(e("8/4/2", 0) == 1.0);
  CHECK(e("2*3+4*5", 0) == 26.0);
  CHECK(e("(1+t)*2", 1.5) == 5.0);
  CHECK(e("1.5e2 + 2E-1", 0) == doctest::Approx(150.2));
  CHECK(e("pow(t, 3) + sqrt(t) + log(exp(2))", 4.0) == doctest::Approx(64.0 + 2.0 + 2.0));
  CHECK(e("--t", 3.0) == 3.0);
  CHECK(e("+t", 3.0) == 3.0);
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_func_1d("1 + * t");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse_func_1d(""), ParseError);
  CHECK_THROWS_AS(parse_func_1d("(1+t"), ParseError);
  CHECK_THROWS_AS(parse_func_1d("1 2"), ParseError);
  CHECK_THROWS_AS(parse_func_1d("x + 1"), ParseError);          // unknown identifier
  CHECK_THROWS_AS(parse_func_1d("sin(t)"), ParseError);         // unknown intrinsic
  CHECK_THROWS_AS(parse_func_1d("pow(t)"), ParseError);         // arity
  CHECK_THROWS_AS(parse_func_2d("t*u"), ParseError);            // t is not a 2D variable
  CHECK_THROWS_AS(parse_func_1d("preset:nosuch(1)"), ParseError);
  CHECK_THROWS_AS(parse_func_1d("preset:decay(1)"), Error);     // parameter count
}

TEST_CASE("registry extension") {
  IntrinsicRegistry reg = IntrinsicRegistry::builtin();
  reg.add("cube", 1, [](std::span<const double> a) { return a[0] * a[0] * a[0]; });
  CHECK(FuncSpec1D::parse("cube(t) + 1", reg)(2.0) == 9.0);
  CHECK_THROWS_AS(parse_func_1d("cube(t)"), ParseError);
}

TEST_CASE("print/parse round trip on random trees") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 500; ++i) {
    const Expression original(random_tree(rng, 5), {"t"});
    const std::string text = original.print();
    const Expression reparsed = Expression::parse(text, {"t"});
    INFO(text);
    CHECK(reparsed == original);
    CHECK(reparsed.print() == text);
  }
}

TEST_CASE("presets agree with their expression trees") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(0.0, 8.0);
  std::uniform_real_distribution<double> param(0.1, 3.0);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); };

  for (auto family : {Preset1D::constant, Preset1D::power, Preset1D::decay, Preset1D::exponential}) {
    const std::vector<double> params =
        family == Preset1D::constant ? std::vector<double>{param(rng)} : std::vector<double>{param(rng), param(rng)};
    const FuncSpec1D f = FuncSpec1D::preset(family, params);
    for (int i = 0; i < 100; ++i) {
      const double t = coord(rng);
      CHECK(rel(eval1(f.ast(), t), f(t)) < 1e-14);
    }
  }
  for (auto family : {Preset2D::constant, Preset2D::sum_power, Preset2D::product_power}) {
    std::vector<double> params{param(rng)};
    if (family != Preset2D::constant) params.push_back(param(rng));
    if (family == Preset2D::product_power) params.push_back(param(rng));
    const FuncSpec2D f = FuncSpec2D::preset(family, params);
    for (int i = 0; i < 100; ++i) {
      const double u = coord(rng), v = coord(rng);
      CHECK(rel(eval2(f.ast(), u, v), f(u, v)) < 1e-14);
    }
  }
}

TEST_CASE("preset text form") {
  const FuncSpec1D d = parse_func_1d("preset:decay(2, 3/2)");
  REQUIRE(d.preset_family() == Preset1D::decay);
  CHECK(d(3.0) == doctest::Approx(2.0 / std::pow(4.0, 1.5)).epsilon(1e-15));
  const FuncSpec2D s = parse_func_2d("preset:product_power(2, 1, 2)");
  CHECK(s(3.0, 2.0) == doctest::Approx(24.0));
  CHECK(parse_func_1d("preset:constant(4)").constant_value() == 4.0);
  CHECK(parse_func_1d("3").constant_value() == 3.0);
  CHECK_FALSE(parse_func_1d("t").constant_value().has_value());
}

TEST_CASE("checked evaluation reports domain errors") {
  const FuncSpec1D f = parse_func_1d("log(t - 1)");
  CHECK_THROWS_AS(f.checked(0.5), DomainError);
  CHECK(f.checked(1.0 + std::exp(1.0)) == doctest::Approx(1.0));
  // Negative intermediate values are fine as long as the result is acceptable.
  CHECK(parse_func_2d("(u-v)^2")(1.0, 3.0) == 4.0);
}

TEST_CASE("check_c1_monotone") {
  SUBCASE("(u+v)^2 on [0,10]^2") {
    const auto r = check_c1_monotone(parse_func_2d("(u+v)^2"), 10.0, 10.0, 50);
    CHECK(r.is_nondecreasing_u);
    CHECK(r.is_nondecreasing_v);
    CHECK_FALSE(r.worst_violation.has_value());
    CHECK(r.samples_used == 2500);
  }
  SUBCASE("constant") {
    const auto r = check_c1_monotone(parse_func_2d("1"), 3.0, 7.0, 10);
    CHECK(r.is_nondecreasing_u);
    CHECK(r.is_nondecreasing_v);
  }
  SUBCASE("(u-5)^2 decreases in u below 5") {
    const auto r = check_c1_monotone(parse_func_2d("(u-5)^2"), 10.0, 10.0, 50);
    CHECK_FALSE(r.is_nondecreasing_u);
    CHECK(r.is_nondecreasing_v);
    REQUIRE(r.worst_violation.has_value());
    CHECK(r.worst_violation->axis == 'u');
    CHECK(r.worst_violation->u < 5.0);
    CHECK(r.worst_violation->amount < 0.0);
  }
  SUBCASE("presets with nonnegative parameters") {
    for (const char* text : {"preset:constant(2)", "preset:sum_power(1.5, 2.5)", "preset:product_power(1, 0.5, 3)"}) {
      const auto r = check_c1_monotone(parse_func_2d(text), 10.0, 10.0, 50);
      CHECK(r.is_nondecreasing_u);
      CHECK(r.is_nondecreasing_v);
    }
  }
  SUBCASE("domain errors name the lattice point") {
    CHECK_THROWS_AS(check_c1_monotone(parse_func_2d("log(u)"), 1.0, 1.0, 5), DomainError);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(check_c1_monotone(parse_func_2d("u"), 0.0, 1.0, 5), UsageError);
    CHECK_THROWS_AS(check_c1_monotone(parse_func_2d("u"), 1.0, 1.0, 1), UsageError);
  }
}
