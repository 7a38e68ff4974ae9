#pragma once

#include "evodyn/types.hpp"

#include <memory>
#include <optional>

namespace evodyn {

/// Sorted sample points of a compact interval [lower, upper]. Both endpoints
/// are always members. Copies share the same immutable point storage.
class StrategyGrid {
 public:
  /// Takes ownership of `points`; throws ValidationError unless they are
  /// finite and strictly increasing.
  explicit StrategyGrid(Vector points);

  double lower() const { return (*points_)(0); }
  double upper() const { return (*points_)(size() - 1); }
  Index size() const { return points_->size(); }
  const Vector& points() const { return *points_; }
  double operator[](Index i) const { return (*points_)(i); }

  double distance(Index i, Index j) const;

  /// Smallest gap between consecutive points.
  double min_spacing() const;

  /// Index of the grid point within `tol` of `s`, if any.
  std::optional<Index> find(double s, double tol = 1e-12) const;

  /// Index of the grid point closest to `s`.
  Index nearest(double s) const;

  /// True when both handles share storage or hold identical points.
  bool operator==(const StrategyGrid& other) const;
  bool operator!=(const StrategyGrid& other) const { return !(*this == other); }

 private:
  std::shared_ptr<const Vector> points_;
};

StrategyGrid make_uniform_grid(Index n, double lower, double upper);

/// Sorted union of the two point sets (coincident points within 1e-12 merge).
StrategyGrid union_grid(const StrategyGrid& a, const StrategyGrid& b);

/// Full-support probability weights on a grid; the discrete stand-in for the
/// revision reference measure.
class ReferenceMeasure {
 public:
  ReferenceMeasure(StrategyGrid grid, Vector weights, double normalization_factor);

  const StrategyGrid& grid() const { return grid_; }
  const Vector& weights() const { return weights_; }
  Index size() const { return weights_.size(); }
  double operator[](Index i) const { return weights_(i); }

  /// Factor the caller's raw weights were multiplied by to reach unit mass.
  double normalization_factor() const { return normalization_factor_; }

 private:
  StrategyGrid grid_;
  Vector weights_;
  double normalization_factor_;
};

ReferenceMeasure make_uniform_reference(const StrategyGrid& grid);

/// Renormalizes `weights` to unit mass. Every weight must be strictly positive.
ReferenceMeasure make_reference(const StrategyGrid& grid, const Vector& weights);

}  // namespace evodyn
