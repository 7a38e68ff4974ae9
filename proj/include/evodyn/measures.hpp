#pragma once

#include "evodyn/strategy_space.hpp"

#include <cstdint>
#include <vector>

namespace evodyn {

enum class MeasureKind { probability, signed_measure };

/// Weights attached to the points of a StrategyGrid.
///
/// Probability measures are validated on construction: weights in
/// [-1e-12, 0) are clamped to zero and the total must be within 1e-9 of one.
/// Arithmetic between measures always yields the signed kind.
class DiscreteMeasure {
 public:
  static DiscreteMeasure probability(StrategyGrid grid, Vector weights);
  static DiscreteMeasure signed_measure(StrategyGrid grid, Vector weights);
  static DiscreteMeasure zero(StrategyGrid grid);

  const StrategyGrid& grid() const { return grid_; }
  const Vector& weights() const { return weights_; }
  MeasureKind kind() const { return kind_; }
  bool is_probability() const { return kind_ == MeasureKind::probability; }
  Index size() const { return weights_.size(); }
  double operator[](Index i) const { return weights_(i); }
  double total_mass() const { return weights_.sum(); }

  /// Zero total mass within `tol`: an element of the tangent space.
  bool is_tangent(double tol = 1e-12) const;

  friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b);
  friend DiscreteMeasure operator-(const DiscreteMeasure& a, const DiscreteMeasure& b);
  friend DiscreteMeasure operator*(double c, const DiscreteMeasure& a);

 private:
  DiscreteMeasure(StrategyGrid grid, Vector weights, MeasureKind kind);

  StrategyGrid grid_;
  Vector weights_;
  MeasureKind kind_;
};

/// A function on the grid: payoffs F_mu(s_i), or a direction eta in payoff space.
class PayoffVector {
 public:
  PayoffVector(StrategyGrid grid, Vector values);

  const StrategyGrid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_(i); }

 private:
  StrategyGrid grid_;
  Vector values_;
};

void require_same_grid(const StrategyGrid& a, const StrategyGrid& b, const char* what);

DiscreteMeasure dirac(const StrategyGrid& grid, Index index);
DiscreteMeasure gaussian_on_grid(const StrategyGrid& grid, double mean, double variance);
DiscreteMeasure uniform_measure(const StrategyGrid& grid);

/// Uniform draw from the simplex: normalized i.i.d. Exp(1) weights from a
/// 64-bit Mersenne Twister seeded with `seed`.
DiscreteMeasure random_measure(const StrategyGrid& grid, std::uint64_t seed);

double pairing(const PayoffVector& rho, const DiscreteMeasure& mu);
double tv_norm(const DiscreteMeasure& mu);

/// Bounded-Lipschitz norm sup { sum g_i nu_i : |g_i| <= 1, g 1-Lipschitz }.
/// Exact; see bl_norm_weights for the solver.
double bl_norm(const DiscreteMeasure& nu);
double bl_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// BL norm of raw weights on `grid`. The feasible set on a 1-D grid is
/// |g_i| <= 1 and |g_{i+1} - g_i| <= s_{i+1} - s_i; the maximum is found by
/// propagating the concave piecewise-linear value function
/// V_i(g) = nu_i g + max_{|g' - g| <= d_i} V_{i-1}(g') along the chain.
double bl_norm_weights(const StrategyGrid& grid, const Eigen::Ref<const Vector>& nu);

/// Prefix sums mu([lower, s_i]).
Vector cdf(const DiscreteMeasure& mu);

std::vector<Index> support(const DiscreteMeasure& mu, double tol);

/// Re-express `mu` on a finer grid containing all of its points.
DiscreteMeasure embed(const DiscreteMeasure& mu, const StrategyGrid& target);

}  // namespace evodyn
