#pragma once

#include "evodyn/dynamics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evodyn {

struct RegularityConstants {
  double M = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double L3 = 0.0;

  /// max{2 L3 + 3 max{L1, M}, 3 max{L2, M}}.
  double K() const;
  void validate() const;
};

/// -d_lambda + (d_lambda + d_mu0) e^{K t}.
double gronwall_bound(const RegularityConstants& consts, double d_lambda, double d_mu0, double t);

/// Largest closed-loop switch rate observed at random states mu with rho = F(mu),
/// including the protocol's rate multiplier. A lower bound for M.
double protocol_bound_estimate(const RevisionProtocol& protocol, const PayoffKernel& kernel,
                               Index samples, std::uint64_t seed);

/// Largest switch rate at the given state and payoff.
double max_switch_rate(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                       const PayoffVector& rho);

/// One discretization level of a problem family.
struct RefineFamily {
  std::function<StrategyGrid(Index)> grid;
  std::function<PayoffKernel(const StrategyGrid&)> kernel;
  std::function<DiscreteMeasure(const StrategyGrid&)> initial;
  std::function<ReferenceMeasure(const StrategyGrid&)> reference;  // uniform when empty
  bool per_strategy_rate = false;  // rescale the protocol rate to n at each level
};

struct RefineRow {
  Index n_coarse = 0;
  Index n_fine = 0;
  double sup_bl = 0.0;
  double t_of_max = 0.0;
};

struct RefineReport {
  std::vector<RefineRow> rows;
  std::vector<Trajectory> trajectories;  // one per entry of ns
};

/// Simulates the family at every n and reports the sup-over-samples BL distance
/// between consecutive levels, measured on the union grid.
RefineReport refine_study(const RefineFamily& family, const RevisionProtocol& protocol,
                          const std::vector<Index>& ns, const SimulationOptions& options,
                          unsigned jobs = 1);

struct ChoiceMobilityReport {
  std::vector<double> times;
  std::vector<double> c;  // sup_n ||x_n(t) - xbar_n||_1
  double threshold = 0.0;
  bool mobile = false;
  std::string verdict;
};

ChoiceMobilityReport choice_mobility_trace(const std::vector<Trajectory>& trajectories,
                                           const std::vector<DiscreteMeasure>& limits,
                                           double threshold = 1e-3);

struct FieldBoundCheck {
  double max_field_l1 = 0.0;
  double rate_bound = 0.0;  // largest switch rate seen along the trajectory
  bool holds = true;        // max_field_l1 <= 2 * rate_bound
};

/// Checks ||xdot||_1 <= 2 M along a static-feedback trajectory, with M the
/// largest switch rate observed on it.
FieldBoundCheck field_bound_check(const Trajectory& trajectory, const RevisionProtocol& protocol,
                                  const PayoffKernel& kernel, const ReferenceMeasure& lambda_ref);

}  // namespace evodyn
