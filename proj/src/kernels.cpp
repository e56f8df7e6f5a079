#include "khess/kernels.hpp"

#include <algorithm>
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

double int_pow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

RadialKernel::RadialKernel(const ValidatedProblem& problem, int component, RadialGrid grid, int gauss_points)
    : grid_(std::move(grid)),
      rule_(gauss_legendre<double>(gauss_points)),
      N_(problem.N()),
      k_(problem.k(component)),
      C_(problem.C(component)),
      b_(problem.b(component)),
      p_(problem.p(component)) {
  if (component != 1 && component != 2) throw UsageError("component must be 1 or 2");
  no_convection_ = b_.constant_value() == 0.0;

  const std::size_t M = grid_.intervals();
  const auto G = static_cast<std::size_t>(rule_.size());
  const std::size_t T = G + 1;
  const auto& r = grid_.nodes();

  exponent_.setZero(static_cast<Eigen::Index>(M + 1));
  for (std::size_t j = 0; j < M; ++j) {
    exponent_(static_cast<Eigen::Index>(j + 1)) = exponent_from(j, r(static_cast<Eigen::Index>(j + 1)));
  }

  points_.reserve(M * T * G);
  coef_.reserve(M * T * G);
  decay_.reserve(M * T);
  prefix_.reserve(M * T);
  outer_.reserve(M * G);
  for (std::size_t j = 0; j < M; ++j) {
    const double lo = r(static_cast<Eigen::Index>(j));
    const double h = r(static_cast<Eigen::Index>(j + 1)) - lo;
    const double E_lo = exponent_(static_cast<Eigen::Index>(j));
    for (std::size_t g = 0; g < T; ++g) {
      const double target = g < G ? lo + h * rule_.nodes(static_cast<Eigen::Index>(g)) : lo + h;
      const double E_target = g < G ? exponent_from(j, target) : exponent_(static_cast<Eigen::Index>(j + 1));
      const double span = target - lo;
      for (std::size_t q = 0; q < G; ++q) {
        const double xq = rule_.nodes(static_cast<Eigen::Index>(q));
        const double sigma = lo + span * xq;
        const double E_sigma = no_convection_ ? 0.0 : exponent_from(j, sigma);
        const double weight = p_.checked(sigma);
        if (weight < 0.0) {
          throw HypothesisError("p" + std::to_string(component) + " is negative at t=" + fmt(sigma));
        }
        coef_.push_back(span * rule_.weights(static_cast<Eigen::Index>(q)) * int_pow(sigma, N_ - 1) * weight *
                        std::exp(E_sigma - E_target));
        points_.push_back(WeightPoint{j, (sigma - lo) / h, sigma});
      }
      decay_.push_back(std::exp(E_lo - E_target));
      prefix_.push_back(std::pow(target, k_ - N_) / C_);
      if (g < G) outer_.push_back(h * rule_.weights(static_cast<Eigen::Index>(g)));
    }
  }
  unit_ = evaluate(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(points_.size())));
}

double RadialKernel::rate(double t) const {
  const double b = b_.checked(t);
  if (b < 0.0) throw HypothesisError("convection weight b is negative at t=" + fmt(t));
  return int_pow(t, k_ - 1) * b / C_;
}

double RadialKernel::exponent_from(std::size_t j, double t) const {
  const double lo = grid_[j];
  const double E_lo = exponent_.size() > 0 ? exponent_(static_cast<Eigen::Index>(j)) : 0.0;
  if (no_convection_) return 0.0;
  const double span = t - lo;
  if (span <= 0.0) return E_lo;
  double acc = 0.0;
  for (Eigen::Index g = 0; g < rule_.size(); ++g) acc += rule_.weights(g) * rate(lo + span * rule_.nodes(g));
  return E_lo + span * acc;
}

double RadialKernel::root(double x) const {
  switch (k_) {
    case 1:
      return x;
    case 2:
      return std::sqrt(x);
    case 3:
      return std::cbrt(x);
    default:
      return std::pow(x, 1.0 / k_);
  }
}

RadialKernel::Samples RadialKernel::evaluate(const Eigen::VectorXd& w) const {
  if (static_cast<std::size_t>(w.size()) != points_.size()) {
    throw UsageError("RadialKernel::evaluate: expected " + std::to_string(points_.size()) + " weight values");
  }
  const std::size_t M = grid_.intervals();
  const auto G = static_cast<std::size_t>(rule_.size());
  const std::size_t T = G + 1;

  Samples out;
  out.phi.setZero(static_cast<Eigen::Index>(M + 1));
  out.integral.setZero(static_cast<Eigen::Index>(M + 1));
  out.inner.setZero(static_cast<Eigen::Index>(M + 1));

  double J = 0.0;
  double running = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    double J_next = 0.0;
    for (std::size_t g = 0; g < T; ++g) {
      const std::size_t target = j * T + g;
      double s = decay_[target] * J;
      for (std::size_t q = 0; q < G; ++q) {
        const std::size_t idx = target * G + q;
        const double wq = w(static_cast<Eigen::Index>(idx));
        if (wq < 0.0) {
          throw NumericalError("negative inner integral: weight " + fmt(wq) + " < 0 at r=" + fmt(points_[idx].r));
        }
        s += coef_[idx] * wq;
      }
      const double phi = root(prefix_[target] * s);
      if (!std::isfinite(s) || !std::isfinite(phi)) {
        const double where = g < G ? points_[target * G].r : grid_[j + 1];
        throw NumericalError("kernel overflow near r=" + fmt(where) + " (E=" + fmt(exponent_at(where)) + ")");
      }
      if (g < G) {
        running += outer_[j * G + g] * phi;
      } else {
        J_next = s;
        out.phi(static_cast<Eigen::Index>(j + 1)) = phi;
      }
    }
    J = J_next;
    out.inner(static_cast<Eigen::Index>(j + 1)) = J;
    out.integral(static_cast<Eigen::Index>(j + 1)) = running;
  }
  return out;
}

double RadialKernel::exponent_at(double r) const {
  if (r <= 0.0) return 0.0;
  const std::size_t j = grid_.locate(r);
  return exponent_from(j, std::min(r, grid_.radius()));
}

double RadialKernel::unit_phi(double r) const {
  if (r <= 0.0) return 0.0;
  if (r > grid_.radius() * (1.0 + 1e-14)) {
    throw RangeError("unit_phi: r=" + fmt(r) + " beyond kernel grid radius " + fmt(grid_.radius()));
  }
  r = std::min(r, grid_.radius());
  const std::size_t j = grid_.locate(r);
  const double lo = grid_[j];
  const double span = r - lo;
  if (span == 0.0) return unit_.phi(static_cast<Eigen::Index>(j));
  const double E_r = exponent_from(j, r);
  double s = std::exp(exponent_(static_cast<Eigen::Index>(j)) - E_r) * unit_.inner(static_cast<Eigen::Index>(j));
  for (Eigen::Index q = 0; q < rule_.size(); ++q) {
    const double sigma = lo + span * rule_.nodes(q);
    const double E_sigma = no_convection_ ? 0.0 : exponent_from(j, sigma);
    s += span * rule_.weights(q) * int_pow(sigma, N_ - 1) * p_.checked(sigma) * std::exp(E_sigma - E_r);
  }
  return root(std::pow(r, k_ - N_) / C_ * s);
}

// ---------------------------------------------------------------------------

GridFunction exponent_table(const ValidatedProblem& problem, int component, const RadialGrid& grid) {
  const int k = problem.k(component);
  const double C = problem.C(component);
  const auto& b = problem.b(component);
  Eigen::VectorXd samples(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    samples(static_cast<Eigen::Index>(j)) = int_pow(grid[j], k - 1) * b.checked(grid[j]) / C;
  }
  return cumulative_integral(GridFunction(grid, std::move(samples)));
}

double kernel_phi(const ValidatedProblem& problem, int component, double r,
                  const std::function<double(double)>& inner_weight) {
  if (!(r >= 0.0)) throw UsageError("kernel_phi: radius must be nonnegative");
  if (r == 0.0) return 0.0;
  RadialKernel kernel(problem, component, RadialGrid::uniform(r, 33), 8);
  auto samples = kernel.evaluate_fn(inner_weight);
  return samples.phi(samples.phi.size() - 1);
}

GridFunction P_table(const ValidatedProblem& problem, int component, const RadialGrid& grid) {
  RadialKernel kernel(problem, component, grid);
  return GridFunction(grid, kernel.unit().integral);
}

// ---------------------------------------------------------------------------

F12Table F12Table::build(const ValidatedProblem& problem, double s_max, int per_doubling, int gauss_points) {
  const double A = problem.center_sum();
  if (!(s_max > A)) throw UsageError("F12 table needs s_max > a1 + a2 (s_max=" + fmt(s_max) + ", a1+a2=" + fmt(A) + ")");
  if (per_doubling < 1) throw UsageError("F12 table needs at least one interval per doubling");

  F12Table table;
  table.rate_ = [f1 = problem.f(1), f2 = problem.f(2), k1 = problem.k(1), k2 = problem.k(2)](double t) {
    auto root = [](double v, int k) { return k == 1 ? v : (k == 2 ? std::sqrt(v) : std::pow(v, 1.0 / k)); };
    const double g1 = f1(t, t);
    const double g2 = f2(t, t);
    if (g1 < 0.0 || g2 < 0.0) return std::nan("");
    return root(g1, k1) + root(g2, k2);
  };
  table.rule_ = gauss_legendre<double>(gauss_points);

  const double X = s_max - A;
  const double x_min = std::min(X, A) * std::ldexp(1.0, -10);
  const double q = std::exp2(1.0 / per_doubling);
  std::vector<double> offsets{0.0};
  for (double x = x_min; x < X * (1.0 - 1e-12); x *= q) offsets.push_back(x);
  offsets.push_back(X);

  const auto n = static_cast<Eigen::Index>(offsets.size());
  table.abscissae_.resize(n);
  table.values_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) table.abscissae_(i) = A + offsets[static_cast<std::size_t>(i)];
  table.abscissae_(n - 1) = s_max;
  table.values_(0) = 0.0;
  table.integrand(A);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    table.values_(i + 1) = table.values_(i) + table.partial(static_cast<std::size_t>(i), table.abscissae_(i + 1));
    table.integrand(table.abscissae_(i + 1));
    // Increments may drop below one ulp once the integral has converged.
    if (!(table.values_(i + 1) >= table.values_(i)) || !std::isfinite(table.values_(i + 1))) {
      throw NumericalError("F12 table decreasing or non-finite near s=" + fmt(table.abscissae_(i + 1)));
    }
  }
  return table;
}

F12Table F12Table::covering(const ValidatedProblem& problem, double y, double s_max, double s_cap) {
  const double A = problem.center_sum();
  double s = std::max(s_max, 2.0 * A);
  while (true) {
    F12Table table = build(problem, s);
    if (table.sup() > y) return table;
    if (s >= s_cap) {
      throw RangeError("F12 table up to s=" + fmt(s) + " reaches only " + fmt(table.sup()) + " <= " + fmt(y) +
                       "; raise s_max (F12(inf) may not exceed the requested value)");
    }
    s = std::min(s * 8.0, s_cap);
  }
}

double F12Table::integrand(double t) const {
  const double d = rate_(t);
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw HypothesisError("f1^(1/k1)(t,t) + f2^(1/k2)(t,t) must be positive; fails at t=" + fmt(t));
  }
  return 1.0 / d;
}

double F12Table::partial(std::size_t j, double s) const {
  const double lo = abscissae_(static_cast<Eigen::Index>(j));
  const double span = s - lo;
  if (span <= 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index g = 0; g < rule_.size(); ++g) acc += rule_.weights(g) * integrand(lo + span * rule_.nodes(g));
  return span * acc;
}

double F12Table::operator()(double s) const {
  if (s < lower()) throw UsageError("F12 is defined for s >= a1 + a2 only (s=" + fmt(s) + ")");
  if (s > s_max() * (1.0 + 1e-14)) throw RangeError("F12(s) requested beyond table s_max=" + fmt(s_max()));
  s = std::min(s, s_max());
  const double* begin = abscissae_.data();
  const double* end = begin + abscissae_.size();
  auto j = static_cast<std::size_t>(std::upper_bound(begin, end, s) - begin) - 1;
  j = std::min<std::size_t>(j, static_cast<std::size_t>(abscissae_.size() - 2));
  return values_(static_cast<Eigen::Index>(j)) + partial(j, s);
}

double F12Table::inverse(double y) const {
  if (!(y >= 0.0)) throw UsageError("F12 inverse needs y >= 0 (y=" + fmt(y) + ")");
  if (y == 0.0) return lower();
  if (y >= sup()) {
    throw RangeError("F12 inverse: y=" + fmt(y) + " is outside the table range [0, " + fmt(sup()) +
                     "); raise s_max");
  }
  const double* begin = values_.data();
  const double* end = begin + values_.size();
  const auto j = static_cast<std::size_t>(std::upper_bound(begin, end, y) - begin) - 1;
  double lo = abscissae_(static_cast<Eigen::Index>(j));
  double hi = abscissae_(static_cast<Eigen::Index>(j + 1));
  const double base = values_(static_cast<Eigen::Index>(j));
  // Safeguarded Newton on g(s) = F(s) - y with g'(s) = 1/D(s).
  double s = lo + (hi - lo) * (y - base) / (values_(static_cast<Eigen::Index>(j + 1)) - base);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = base + partial(j, s) - y;
    if (g == 0.0) return s;
    (g > 0.0 ? hi : lo) = s;
    double next = s - g / integrand(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * std::abs(s) || hi - lo <= 1e-15 * std::abs(s)) return next;
    s = next;
  }
  return s;
}

double F12_inverse(const F12Table& table, double y) { return table.inverse(y); }

// ---------------------------------------------------------------------------

KernelLimits limits(const ValidatedProblem& problem, const LimitPolicy& policy) {
  constexpr double R0 = 1.0;
  constexpr int head_intervals = 32;
  constexpr int per_doubling = 16;
  if (!(policy.R_max > 2.0 * R0)) throw UsageError("limit policy needs R_max > 2");

  std::vector<double> nodes;
  for (int j = 0; j <= head_intervals; ++j) nodes.push_back(R0 * j / head_intervals);
  for (int j = 1;; ++j) {
    const double r = R0 * std::exp2(static_cast<double>(j) / per_doubling);
    if (r >= policy.R_max * (1.0 - 1e-12)) break;
    nodes.push_back(r);
  }
  nodes.push_back(policy.R_max);
  const RadialGrid grid = RadialGrid::from_nodes(Eigen::Map<const Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size())));

  KernelLimits out;
  for (int i : {1, 2}) {
    RadialKernel kernel(problem, i, grid, 6);
    const double head = kernel.unit().integral(head_intervals);
    LimitEstimate tail = estimate_limit([&](double t) { return kernel.unit_phi(t); }, R0, policy);
    if (tail.value) tail.value = *tail.value + head;
    (i == 1 ? out.P1_inf : out.P2_inf) = std::move(tail);
  }

  const double A = problem.center_sum();
  auto integrand = [&](double t) {
    const double d = problem.diagonal_rate(t);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw HypothesisError("f1^(1/k1)(t,t) + f2^(1/k2)(t,t) must be positive; fails at t=" + fmt(t));
    }
    return 1.0 / d;
  };
  out.F12_inf = estimate_limit(integrand, A, policy);
  return out;
}

KernelTables build_kernel_tables(const ValidatedProblem& problem, const RadialGrid& grid, double s_max) {
  KernelTables tables;
  tables.grid = grid;
  tables.E1 = exponent_table(problem, 1, grid);
  tables.E2 = exponent_table(problem, 2, grid);
  tables.P1 = P_table(problem, 1, grid);
  tables.P2 = P_table(problem, 2, grid);
  const double needed = tables.P1.values().maxCoeff() + tables.P2.values().maxCoeff();
  try {
    tables.F12 = F12Table::covering(problem, needed, s_max);
  } catch (const RangeError&) {
    tables.F12 = F12Table::build(problem, std::max(s_max, 2.0 * problem.center_sum()));
  }
  return tables;
}

}  // namespace khess
