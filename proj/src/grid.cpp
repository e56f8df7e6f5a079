#include "khess/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "khess/error.hpp"

namespace khess {

RadialGrid RadialGrid::uniform(double radius, std::size_t nodes) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw UsageError("grid radius must be positive and finite");
  if (nodes < 3) throw UsageError("grid needs at least 3 nodes");
  Eigen::VectorXd r(static_cast<Eigen::Index>(nodes));
  const auto m = static_cast<double>(nodes - 1);
  for (Eigen::Index j = 0; j < r.size(); ++j) r(j) = radius * static_cast<double>(j) / m;
  r(r.size() - 1) = radius;
  return RadialGrid(std::make_shared<const Eigen::VectorXd>(std::move(r)));
}

RadialGrid RadialGrid::geometric(double radius, std::size_t nodes, double ratio) {
  if (!(ratio > 0.0)) throw UsageError("geometric grid ratio must be positive");
  if (std::abs(ratio - 1.0) < 1e-14) return uniform(radius, nodes);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw UsageError("grid radius must be positive and finite");
  if (nodes < 3) throw UsageError("grid needs at least 3 nodes");
  const auto m = static_cast<double>(nodes - 1);
  Eigen::VectorXd r(static_cast<Eigen::Index>(nodes));
  const double denom = std::expm1(m * std::log(ratio));
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    r(j) = radius * std::expm1(static_cast<double>(j) * std::log(ratio)) / denom;
  }
  r(0) = 0.0;
  r(r.size() - 1) = radius;
  return from_nodes(std::move(r));
}

RadialGrid RadialGrid::from_nodes(Eigen::VectorXd nodes) {
  if (nodes.size() < 3) throw UsageError("grid needs at least 3 nodes");
  if (nodes(0) != 0.0) throw UsageError("grid must start at r = 0");
  for (Eigen::Index j = 1; j < nodes.size(); ++j) {
    if (!(nodes(j) > nodes(j - 1)) || !std::isfinite(nodes(j))) {
      throw UsageError("grid nodes must be finite and strictly increasing (node " + std::to_string(j) + ")");
    }
  }
  return RadialGrid(std::make_shared<const Eigen::VectorXd>(std::move(nodes)));
}

std::size_t RadialGrid::locate(double r) const {
  const auto& x = *nodes_;
  const double* begin = x.data();
  const double* end = x.data() + x.size();
  auto it = std::upper_bound(begin, end, r);
  std::size_t j = it == begin ? 0 : static_cast<std::size_t>(it - begin) - 1;
  return std::min(j, intervals() - 1);
}

bool RadialGrid::same_as(const RadialGrid& other) const {
  if (nodes_ == other.nodes_) return true;
  if (!nodes_ || !other.nodes_) return false;
  return nodes_->size() == other.nodes_->size() && *nodes_ == *other.nodes_;
}

GridFunction::GridFunction(RadialGrid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
    throw UsageError("grid function has " + std::to_string(values_.size()) + " values for " +
                     std::to_string(grid_.size()) + " nodes");
  }
  if (!values_.allFinite()) throw NumericalError("grid function contains non-finite values");
}

GridFunction::GridFunction(RadialGrid grid, double value)
    : grid_(std::move(grid)),
      values_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid_.size()), value)) {}

double GridFunction::operator()(double r) const {
  const auto& x = grid_.nodes();
  if (r <= 0.0) return values_(0);
  if (r >= x(x.size() - 1)) return values_(values_.size() - 1);
  const auto j = static_cast<Eigen::Index>(grid_.locate(r));
  const double theta = (r - x(j)) / (x(j + 1) - x(j));
  return values_(j) + theta * (values_(j + 1) - values_(j));
}

}  // namespace khess
