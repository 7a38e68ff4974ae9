#include "evodyn/strategy_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace evodyn {

StrategyGrid::StrategyGrid(Vector points) {
  if (points.size() == 0) throw ValidationError("strategy grid needs at least one point");
  for (Index i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points(i))) throw ValidationError("strategy grid point is not finite");
    if (i > 0 && !(points(i) > points(i - 1)))
      throw ValidationError("strategy grid points must be strictly increasing (index " +
                            std::to_string(i) + ")");
  }
  points_ = std::make_shared<const Vector>(std::move(points));
}

double StrategyGrid::distance(Index i, Index j) const {
  return std::abs((*points_)(i) - (*points_)(j));
}

double StrategyGrid::min_spacing() const {
  if (size() < 2) return 0.0;
  const Vector& p = *points_;
  return (p.tail(size() - 1) - p.head(size() - 1)).minCoeff();
}

std::optional<Index> StrategyGrid::find(double s, double tol) const {
  const Index k = nearest(s);
  if (std::abs((*points_)(k) - s) <= tol) return k;
  return std::nullopt;
}

Index StrategyGrid::nearest(double s) const {
  const double* begin = points_->data();
  const double* end = begin + size();
  const double* it = std::lower_bound(begin, end, s);
  if (it == end) return size() - 1;
  if (it == begin) return 0;
  const Index hi = it - begin;
  return (s - (*points_)(hi - 1) <= (*points_)(hi) - s) ? hi - 1 : hi;
}

bool StrategyGrid::operator==(const StrategyGrid& other) const {
  if (points_ == other.points_) return true;
  return size() == other.size() && *points_ == *other.points_;
}

StrategyGrid make_uniform_grid(Index n, double lower, double upper) {
  if (n < 2) throw ValidationError("uniform grid needs n >= 2");
  if (!(lower < upper)) throw ValidationError("uniform grid needs lower < upper");
  Vector p(n);
  const double width = upper - lower;
  for (Index i = 0; i < n; ++i)
    p(i) = lower + width * static_cast<double>(i) / static_cast<double>(n - 1);
  p(0) = lower;
  p(n - 1) = upper;
  return StrategyGrid(std::move(p));
}

StrategyGrid union_grid(const StrategyGrid& a, const StrategyGrid& b) {
  if (a == b) return a;
  std::vector<double> merged;
  merged.reserve(static_cast<std::size_t>(a.size() + b.size()));
  merged.insert(merged.end(), a.points().data(), a.points().data() + a.size());
  merged.insert(merged.end(), b.points().data(), b.points().data() + b.size());
  std::sort(merged.begin(), merged.end());
  std::vector<double> unique;
  unique.reserve(merged.size());
  for (double s : merged)
    if (unique.empty() || s - unique.back() > 1e-12) unique.push_back(s);
  return StrategyGrid(Eigen::Map<const Vector>(unique.data(), static_cast<Index>(unique.size())));
}

ReferenceMeasure::ReferenceMeasure(StrategyGrid grid, Vector weights, double normalization_factor)
    : grid_(std::move(grid)), weights_(std::move(weights)), normalization_factor_(normalization_factor) {
  if (weights_.size() != grid_.size())
    throw ValidationError("reference weights length does not match grid");
  if (weights_.size() > 0 && !(weights_.minCoeff() > 0.0))
    throw ValidationError("reference measure must have full support (all weights > 0)");
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw ValidationError("reference measure must have unit mass");
}

ReferenceMeasure make_uniform_reference(const StrategyGrid& grid) {
  const auto n = static_cast<double>(grid.size());
  return ReferenceMeasure(grid, Vector::Constant(grid.size(), 1.0 / n), 1.0);
}

ReferenceMeasure make_reference(const StrategyGrid& grid, const Vector& weights) {
  if (weights.size() != grid.size())
    throw ValidationError("reference weights length " + std::to_string(weights.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
  for (Index i = 0; i < weights.size(); ++i)
    if (!(weights(i) > 0.0) || !std::isfinite(weights(i)))
      throw ValidationError("reference weight " + std::to_string(i) +
                            " must be finite and > 0 (full support)");
  const double factor = 1.0 / weights.sum();
  Vector w = weights * factor;
  // Push the rounding residue onto the largest entry so the sum is 1 to the ulp.
  Index big = 0;
  w.maxCoeff(&big);
  w(big) += 1.0 - w.sum();
  return ReferenceMeasure(grid, std::move(w), factor);
}

}  // namespace evodyn
