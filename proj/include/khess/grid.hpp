#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>

namespace khess {

/// Ordered radii 0 = r_0 < r_1 < ... < r_M, M >= 2. Copies share the node array.
class RadialGrid {
 public:
  RadialGrid() = default;

  static RadialGrid uniform(double radius, std::size_t nodes);
  /// Nodes clustered at the origin: consecutive spacings grow by `ratio` (> 0).
  static RadialGrid geometric(double radius, std::size_t nodes, double ratio);
  /// Validates r_0 = 0, strict increase and at least three nodes.
  static RadialGrid from_nodes(Eigen::VectorXd nodes);

  std::size_t size() const noexcept { return nodes_ ? static_cast<std::size_t>(nodes_->size()) : 0; }
  std::size_t intervals() const noexcept { return size() - 1; }
  double operator[](std::size_t i) const { return (*nodes_)(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& nodes() const { return *nodes_; }
  double radius() const { return (*nodes_)(nodes_->size() - 1); }

  /// Index j of the interval [r_j, r_{j+1}] containing r (clamped to the grid).
  std::size_t locate(double r) const;

  bool same_as(const RadialGrid& other) const;

 private:
  explicit RadialGrid(std::shared_ptr<const Eigen::VectorXd> nodes) : nodes_(std::move(nodes)) {}
  std::shared_ptr<const Eigen::VectorXd> nodes_;
};

/// Nodal values of a scalar function on a RadialGrid.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(RadialGrid grid, Eigen::VectorXd values);
  /// Constant function.
  GridFunction(RadialGrid grid, double value);

  const RadialGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  /// Piecewise-linear interpolation; constant extrapolation outside [0, R].
  double operator()(double r) const;

 private:
  RadialGrid grid_;
  Eigen::VectorXd values_;
};

}  // namespace khess
