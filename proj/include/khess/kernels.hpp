#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "khess/grid.hpp"
#include "khess/problem.hpp"
#include "khess/quadrature.hpp"

namespace khess {

/// Phi_i(r, w) = ( r^(k-N)/C int_0^r t^(N-1) e^(E(t)-E(r)) p(t) w(t) dt )^(1/k)
/// tabulated on a fixed grid, where E(r) = int_0^r t^(k-1) b(t)/C dt.
///
/// Every interval carries a Gauss-Legendre rule with G points. The inner
/// integral is advanced from node to node with the decay factor
/// e^(E_j - E_{j+1}) <= 1, so e^(+E) and e^(-E) are never formed apart.
/// All quadrature weights are positive: a pointwise larger weight w gives a
/// pointwise larger Phi and running integral.
class RadialKernel {
 public:
  struct WeightPoint {
    std::size_t interval;
    double theta;  // position inside [r_j, r_{j+1}] in [0, 1]
    double r;
  };

  struct Samples {
    Eigen::VectorXd phi;       // Phi at the nodes
    Eigen::VectorXd integral;  // int_0^{r_j} Phi
    Eigen::VectorXd inner;     // the combined inner integral at the nodes
  };

  RadialKernel(const ValidatedProblem& problem, int component, RadialGrid grid, int gauss_points = 4);

  const RadialGrid& grid() const noexcept { return grid_; }
  int gauss_points() const noexcept { return static_cast<int>(rule_.size()); }
  int order() const noexcept { return k_; }

  /// Radii at which a weight has to be supplied to evaluate().
  const std::vector<WeightPoint>& weight_points() const noexcept { return points_; }

  /// `w` holds the weight at weight_points(), in order.
  Samples evaluate(const Eigen::VectorXd& w) const;

  template <typename W>
  Samples evaluate_fn(W&& w) const {
    Eigen::VectorXd values(static_cast<Eigen::Index>(points_.size()));
    for (std::size_t i = 0; i < points_.size(); ++i) values(static_cast<Eigen::Index>(i)) = w(points_[i].r);
    return evaluate(values);
  }

  /// Samples for w = 1.
  const Samples& unit() const noexcept { return unit_; }

  const Eigen::VectorXd& exponent_nodes() const noexcept { return exponent_; }
  double exponent_at(double r) const;
  /// Phi(r, 1) anywhere in [0, R].
  double unit_phi(double r) const;

 private:
  double rate(double t) const;  // t^(k-1) b(t) / C
  double exponent_from(std::size_t j, double t) const;
  double root(double x) const;

  RadialGrid grid_;
  GaussRule<double> rule_;
  int N_, k_;
  double C_;
  FuncSpec1D b_, p_;
  bool no_convection_ = false;

  Eigen::VectorXd exponent_;
  std::vector<WeightPoint> points_;
  std::vector<double> coef_;    // per (interval, target, inner point)
  std::vector<double> decay_;   // per (interval, target)
  std::vector<double> prefix_;  // t^(k-N)/C per (interval, target)
  std::vector<double> outer_;   // h * weight per (interval, outer point)
  Samples unit_;
};

/// E_i on the grid using cumulative_integral of t^(k_i-1) b_i(t)/C_i.
GridFunction exponent_table(const ValidatedProblem& problem, int component, const RadialGrid& grid);

/// Phi_i(r, w) for a single radius; Phi_i(0, w) = 0.
double kernel_phi(const ValidatedProblem& problem, int component, double r,
                  const std::function<double(double)>& inner_weight);

/// P_i(r) = int_0^r Phi_i(t, 1) dt on the grid.
GridFunction P_table(const ValidatedProblem& problem, int component, const RadialGrid& grid);

/// F_{1,2}(s) = int_{a1+a2}^s dt / (f1^(1/k1)(t,t) + f2^(1/k2)(t,t)) on a table whose
/// abscissae are geometric in s - (a1 + a2).
class F12Table {
 public:
  static F12Table build(const ValidatedProblem& problem, double s_max, int per_doubling = 16, int gauss_points = 8);
  /// Grows s_max geometrically until the table exceeds y; RangeError past s_cap.
  static F12Table covering(const ValidatedProblem& problem, double y, double s_max = 0.0, double s_cap = 1e15);

  double lower() const noexcept { return abscissae_(0); }
  double s_max() const noexcept { return abscissae_(abscissae_.size() - 1); }
  double sup() const noexcept { return values_(values_.size() - 1); }

  double operator()(double s) const;
  /// s with F_{1,2}(s) = y, to 1e-14 relative; inverse(0) = a1 + a2.
  double inverse(double y) const;

  const Eigen::VectorXd& abscissae() const noexcept { return abscissae_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }

 private:
  double integrand(double t) const;
  double partial(std::size_t j, double s) const;

  std::function<double(double)> rate_;
  GaussRule<double> rule_;
  Eigen::VectorXd abscissae_;
  Eigen::VectorXd values_;
};

double F12_inverse(const F12Table& table, double y);

struct KernelLimits {
  LimitEstimate P1_inf, P2_inf, F12_inf;
};

/// P_i(inf) through a kernel tabulated on [0, R_max] (uniform up to R0 = 1,
/// geometric beyond) and F_{1,2}(inf) by windowed integration from a1 + a2.
KernelLimits limits(const ValidatedProblem& problem, const LimitPolicy& policy = {});

struct KernelTables {
  RadialGrid grid;
  GridFunction E1, E2, P1, P2;
  F12Table F12;
  std::optional<KernelLimits> limits;
};

KernelTables build_kernel_tables(const ValidatedProblem& problem, const RadialGrid& grid, double s_max);

}  // namespace khess
