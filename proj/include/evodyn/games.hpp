#pragma once

#include "evodyn/measures.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace evodyn {

/// Continuous surrogate for the step function with Θ(x) + Θ(-x) = 1.
class ThetaSpec {
 public:
  struct Logistic {
    double alpha;
  };
  struct PiecewiseLinear {
    double x0;
  };

  static ThetaSpec logistic(double alpha);
  static ThetaSpec piecewise_linear(double x0);

  double operator()(double x) const;
  const std::variant<Logistic, PiecewiseLinear>& form() const { return form_; }
  std::string describe() const;

 private:
  explicit ThetaSpec(std::variant<Logistic, PiecewiseLinear> form) : form_(form) {}
  std::variant<Logistic, PiecewiseLinear> form_;
};

enum class KernelKind { war_of_attrition, continuous_war, cosine, table };

std::string to_string(KernelKind kind);

/// A payoff kernel f(s, s') tabulated on a grid: matrix()(i, j) = f(s_i, s_j).
/// The induced game is F(mu) = A w.
class PayoffKernel {
 public:
  PayoffKernel(KernelKind kind, StrategyGrid grid, Matrix table, double value_V = 0.0,
               std::optional<ThetaSpec> theta = std::nullopt);

  KernelKind kind() const { return kind_; }
  const StrategyGrid& grid() const { return grid_; }
  const Matrix& matrix() const { return table_; }
  double operator()(Index i, Index j) const { return table_(i, j); }
  double V() const { return value_V_; }
  const std::optional<ThetaSpec>& theta() const { return theta_; }

 private:
  KernelKind kind_;
  StrategyGrid grid_;
  Matrix table_;
  double value_V_;
  std::optional<ThetaSpec> theta_;
};

/// Classic war of attrition on [lower, T]: V - s' if s' < s, V/2 - s on ties,
/// -s otherwise. Requires V > 0 and T > V/2.
PayoffKernel kernel_war_of_attrition(double V, const StrategyGrid& grid);

/// f(s, s') = V Θ(s - s') - min{s, s'}.
PayoffKernel kernel_continuous_war(double V, const ThetaSpec& theta, const StrategyGrid& grid);

/// f(s, s') = cos(2πs) - cos(2πs').
PayoffKernel kernel_cosine(const StrategyGrid& grid);

PayoffKernel kernel_table(const StrategyGrid& grid, Matrix table);

/// Splits the continuous war kernel into its V Θ(s - s') and min{s, s'} parts.
std::pair<Matrix, Matrix> continuous_war_components(double V, const ThetaSpec& theta,
                                                    const StrategyGrid& grid);

PayoffVector evaluate_payoffs(const PayoffKernel& kernel, const DiscreteMeasure& mu);

/// sum_ij A_ij a_i b_j. For linear games this is also <DF(mu) b, a>.
double bilinear_form(const PayoffKernel& kernel, const DiscreteMeasure& a, const DiscreteMeasure& b);

/// -∫ (mu([t,∞)) - nu([t,∞)))² dt over [lower, upper], exactly, from the
/// step-function tails.
double continuous_war_bilinear_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct MonotonicityReport {
  double max_value = 0.0;
  bool monotone = true;
  Index trials = 0;
  double tolerance = 1e-9;
  /// Pair attaining max_value when it exceeds the tolerance.
  std::optional<std::pair<DiscreteMeasure, DiscreteMeasure>> violating_pair;
};

MonotonicityReport monotonicity_test(const PayoffKernel& kernel, Index trials, std::uint64_t seed,
                                     double tolerance = 1e-9);

// Closed-form equilibrium of the classic war of attrition on [0, T].
double war_nash_threshold(double V, double T);
double war_nash_cdf(double V, double T, double s);
double war_nash_atom(double V, double T);

/// Discretized equilibrium: each grid point receives the mass of the cell
/// (s_{i-1}, s_i]; the first point receives [0, s_0]. The atom at T lands on
/// the last point.
DiscreteMeasure war_nash_equilibrium(double V, const StrategyGrid& grid);

}  // namespace evodyn
