#include "evodyn/games.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace evodyn {

ThetaSpec ThetaSpec::logistic(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("logistic alpha must be > 0");
  return ThetaSpec(Logistic{alpha});
}

ThetaSpec ThetaSpec::piecewise_linear(double x0) {
  if (!(x0 > 0.0) || !std::isfinite(x0)) throw ValidationError("piecewise-linear x0 must be > 0");
  return ThetaSpec(PiecewiseLinear{x0});
}

double ThetaSpec::operator()(double x) const {
  if (const auto* l = std::get_if<Logistic>(&form_)) return 1.0 / (1.0 + std::exp(-l->alpha * x));
  const double x0 = std::get<PiecewiseLinear>(form_).x0;
  if (x < -x0) return 0.0;
  if (x > x0) return 1.0;
  return x / (2.0 * x0) + 0.5;
}

std::string ThetaSpec::describe() const {
  std::ostringstream os;
  if (const auto* l = std::get_if<Logistic>(&form_))
    os << "logistic(alpha=" << l->alpha << ")";
  else
    os << "piecewise_linear(x0=" << std::get<PiecewiseLinear>(form_).x0 << ")";
  return os.str();
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::war_of_attrition: return "war_of_attrition";
    case KernelKind::continuous_war: return "continuous_war";
    case KernelKind::cosine: return "cosine";
    case KernelKind::table: return "table";
  }
  return "unknown";
}

PayoffKernel::PayoffKernel(KernelKind kind, StrategyGrid grid, Matrix table, double value_V,
                           std::optional<ThetaSpec> theta)
    : kind_(kind), grid_(std::move(grid)), table_(std::move(table)), value_V_(value_V), theta_(theta) {
  if (table_.rows() != grid_.size() || table_.cols() != grid_.size())
    throw ValidationError("payoff table is " + std::to_string(table_.rows()) + "x" +
                          std::to_string(table_.cols()) + " but grid has " +
                          std::to_string(grid_.size()) + " points");
  if (!table_.allFinite()) throw ValidationError("payoff table has non-finite entries");
}

PayoffKernel kernel_war_of_attrition(double V, const StrategyGrid& grid) {
  if (!(V > 0.0)) throw ValidationError("war of attrition needs V > 0");
  if (!(grid.upper() > V / 2.0)) throw ValidationError("war of attrition needs T > V/2");
  const Index n = grid.size();
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    const double s = grid[i];
    for (Index j = 0; j < n; ++j) {
      if (j < i)
        a(i, j) = V - grid[j];
      else if (j == i)
        a(i, j) = V / 2.0 - s;
      else
        a(i, j) = -s;
    }
  }
  return PayoffKernel(KernelKind::war_of_attrition, grid, std::move(a), V);
}

std::pair<Matrix, Matrix> continuous_war_components(double V, const ThetaSpec& theta,
                                                    const StrategyGrid& grid) {
  const Index n = grid.size();
  Matrix step(n, n);
  Matrix lower(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      step(i, j) = V * theta(grid[i] - grid[j]);
      lower(i, j) = std::min(grid[i], grid[j]);
    }
  }
  return {std::move(step), std::move(lower)};
}

PayoffKernel kernel_continuous_war(double V, const ThetaSpec& theta, const StrategyGrid& grid) {
  if (!(V > 0.0)) throw ValidationError("continuous war of attrition needs V > 0");
  // Symmetry Θ(x) + Θ(-x) = 1 on a spread of sample points.
  const double span = grid.upper() - grid.lower();
  for (int k = 0; k <= 64; ++k) {
    const double x = span * (static_cast<double>(k) / 32.0 - 1.0);
    const double sum = theta(x) + theta(-x);
    if (std::abs(sum - 1.0) > 1e-12 || theta(x) < 0.0 || theta(x) > 1.0)
      throw ValidationError("theta violates 0 <= Θ <= 1 or Θ(x) + Θ(-x) = 1");
  }
  auto [step, lower] = continuous_war_components(V, theta, grid);
  Matrix a = step - lower;
  // Θ(0) = 1/2 exactly, so the diagonal is the tie value V/2 - s.
  for (Index i = 0; i < grid.size(); ++i) a(i, i) = V / 2.0 - grid[i];
  return PayoffKernel(KernelKind::continuous_war, grid, std::move(a), V, theta);
}

PayoffKernel kernel_cosine(const StrategyGrid& grid) {
  const Vector c = (2.0 * std::numbers::pi * grid.points().array()).cos().matrix();
  const Index n = grid.size();
  Matrix a = c * Vector::Ones(n).transpose() - Vector::Ones(n) * c.transpose();
  return PayoffKernel(KernelKind::cosine, grid, std::move(a));
}

PayoffKernel kernel_table(const StrategyGrid& grid, Matrix table) {
  return PayoffKernel(KernelKind::table, grid, std::move(table));
}

PayoffVector evaluate_payoffs(const PayoffKernel& kernel, const DiscreteMeasure& mu) {
  require_same_grid(kernel.grid(), mu.grid(), "evaluate_payoffs");
  return PayoffVector(kernel.grid(), kernel.matrix() * mu.weights());
}

double bilinear_form(const PayoffKernel& kernel, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require_same_grid(kernel.grid(), a.grid(), "bilinear_form");
  require_same_grid(kernel.grid(), b.grid(), "bilinear_form");
  return a.weights().dot(kernel.matrix() * b.weights());
}

double continuous_war_bilinear_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_grid(mu.grid(), nu.grid(), "continuous_war_bilinear_oracle");
  const StrategyGrid& g = mu.grid();
  const Vector diff = mu.weights() - nu.weights();
  // On (s_{k-1}, s_k] the tail difference is sum_{i >= k} diff_i. Below s_0 it
  // is the total mass difference, which is zero for probability measures.
  double integral = 0.0;
  double tail = diff.sum();
  integral += tail * tail * (g[0] - g.lower());
  for (Index k = 1; k < g.size(); ++k) {
    tail -= diff(k - 1);
    integral += tail * tail * (g[k] - g[k - 1]);
  }
  return -integral;
}

MonotonicityReport monotonicity_test(const PayoffKernel& kernel, Index trials, std::uint64_t seed,
                                     double tolerance) {
  if (trials < 1) throw ValidationError("monotonicity_test needs trials >= 1");
  MonotonicityReport report;
  report.trials = trials;
  report.tolerance = tolerance;
  report.max_value = -std::numeric_limits<double>::infinity();
  std::mt19937_64 seeder(seed);
  for (Index t = 0; t < trials; ++t) {
    const DiscreteMeasure mu = random_measure(kernel.grid(), seeder());
    const DiscreteMeasure nu = random_measure(kernel.grid(), seeder());
    const DiscreteMeasure d = mu - nu;
    const double value = bilinear_form(kernel, d, d);
    if (value > report.max_value) {
      report.max_value = value;
      if (value > tolerance) report.violating_pair.emplace(mu, nu);
    }
  }
  report.monotone = report.max_value <= tolerance;
  return report;
}

double war_nash_threshold(double V, double T) {
  if (!(V > 0.0)) throw ValidationError("war equilibrium needs V > 0");
  if (!(T > V / 2.0)) throw ValidationError("war equilibrium needs T > V/2");
  return T - V / 2.0;
}

double war_nash_cdf(double V, double T, double s) {
  const double s_star = war_nash_threshold(V, T);
  if (s < 0.0) return 0.0;
  if (s >= T) return 1.0;
  return -std::expm1(-std::min(s, s_star) / V);
}

double war_nash_atom(double V, double T) { return std::exp(-war_nash_threshold(V, T) / V); }

DiscreteMeasure war_nash_equilibrium(double V, const StrategyGrid& grid) {
  const double T = grid.upper();
  war_nash_threshold(V, T);
  const Index n = grid.size();
  Vector w(n);
  double previous = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double current = (i == n - 1) ? 1.0 : war_nash_cdf(V, T, grid[i]);
    w(i) = current - previous;
    previous = current;
  }
  return DiscreteMeasure::probability(grid, std::move(w));
}

}  // namespace evodyn
