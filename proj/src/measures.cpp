#include "evodyn/measures.hpp"

#include <cmath>
#include <random>
#include <string>

namespace evodyn {

DiscreteMeasure::DiscreteMeasure(StrategyGrid grid, Vector weights, MeasureKind kind)
    : grid_(std::move(grid)), weights_(std::move(weights)), kind_(kind) {
  if (weights_.size() != grid_.size())
    throw ValidationError("measure weights length " + std::to_string(weights_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
  if (!weights_.allFinite()) throw ValidationError("measure weights must be finite");
}

DiscreteMeasure DiscreteMeasure::probability(StrategyGrid grid, Vector weights) {
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) < -1e-12)
      throw ValidationError("probability weight " + std::to_string(i) + " is negative");
    if (weights(i) < 0.0) weights(i) = 0.0;
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw ValidationError("probability weights must sum to 1 (got " +
                          std::to_string(weights.sum()) + ")");
  return DiscreteMeasure(std::move(grid), std::move(weights), MeasureKind::probability);
}

DiscreteMeasure DiscreteMeasure::signed_measure(StrategyGrid grid, Vector weights) {
  return DiscreteMeasure(std::move(grid), std::move(weights), MeasureKind::signed_measure);
}

DiscreteMeasure DiscreteMeasure::zero(StrategyGrid grid) {
  const Index n = grid.size();
  return signed_measure(std::move(grid), Vector::Zero(n));
}

bool DiscreteMeasure::is_tangent(double tol) const { return std::abs(weights_.sum()) <= tol; }

DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require_same_grid(a.grid(), b.grid(), "measure addition");
  return DiscreteMeasure::signed_measure(a.grid(), a.weights() + b.weights());
}

DiscreteMeasure operator-(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require_same_grid(a.grid(), b.grid(), "measure subtraction");
  return DiscreteMeasure::signed_measure(a.grid(), a.weights() - b.weights());
}

DiscreteMeasure operator*(double c, const DiscreteMeasure& a) {
  return DiscreteMeasure::signed_measure(a.grid(), c * a.weights());
}

PayoffVector::PayoffVector(StrategyGrid grid, Vector values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw ValidationError("payoff vector length does not match grid");
}

void require_same_grid(const StrategyGrid& a, const StrategyGrid& b, const char* what) {
  if (a != b) throw ValidationError(std::string("grid mismatch in ") + what);
}

DiscreteMeasure dirac(const StrategyGrid& grid, Index index) {
  if (index < 0 || index >= grid.size())
    throw ValidationError("dirac index " + std::to_string(index) + " out of range");
  Vector w = Vector::Zero(grid.size());
  w(index) = 1.0;
  return DiscreteMeasure::probability(grid, std::move(w));
}

DiscreteMeasure gaussian_on_grid(const StrategyGrid& grid, double mean, double variance) {
  if (!(variance > 0.0)) throw ValidationError("gaussian variance must be > 0");
  const Vector& s = grid.points();
  Vector w = (-(s.array() - mean).square() / (2.0 * variance)).exp().matrix();
  const double total = w.sum();
  if (!(total > 0.0)) throw ValidationError("gaussian has no mass on the grid");
  return DiscreteMeasure::probability(grid, w / total);
}

DiscreteMeasure uniform_measure(const StrategyGrid& grid) {
  const auto n = static_cast<double>(grid.size());
  return DiscreteMeasure::probability(grid, Vector::Constant(grid.size(), 1.0 / n));
}

DiscreteMeasure random_measure(const StrategyGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exp1(1.0);
  Vector w(grid.size());
  for (Index i = 0; i < w.size(); ++i) w(i) = exp1(rng);
  return DiscreteMeasure::probability(grid, w / w.sum());
}

double pairing(const PayoffVector& rho, const DiscreteMeasure& mu) {
  require_same_grid(rho.grid(), mu.grid(), "pairing");
  return rho.values().dot(mu.weights());
}

double tv_norm(const DiscreteMeasure& mu) { return mu.weights().lpNorm<1>(); }

double bl_norm(const DiscreteMeasure& nu) { return bl_norm_weights(nu.grid(), nu.weights()); }

double bl_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_grid(mu.grid(), nu.grid(), "bl_distance");
  return bl_norm_weights(mu.grid(), mu.weights() - nu.weights());
}

Vector cdf(const DiscreteMeasure& mu) {
  if (!mu.is_probability()) throw ValidationError("cdf requires a probability measure");
  Vector out(mu.size());
  double acc = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    acc += mu[i];
    out(i) = acc;
  }
  return out;
}

std::vector<Index> support(const DiscreteMeasure& mu, double tol) {
  if (tol < 0.0) throw ValidationError("support tolerance must be >= 0");
  std::vector<Index> idx;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > tol) idx.push_back(i);
  return idx;
}

DiscreteMeasure embed(const DiscreteMeasure& mu, const StrategyGrid& target) {
  if (mu.grid() == target) return mu;
  Vector w = Vector::Zero(target.size());
  for (Index i = 0; i < mu.size(); ++i) {
    const auto k = target.find(mu.grid()[i], 1e-12);
    if (!k) throw ValidationError("embed: target grid does not contain all source points");
    w(*k) += mu[i];
  }
  if (mu.is_probability()) return DiscreteMeasure::probability(target, std::move(w));
  return DiscreteMeasure::signed_measure(target, std::move(w));
}

}  // namespace evodyn
