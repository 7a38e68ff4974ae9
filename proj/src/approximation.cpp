#include "evodyn/approximation.hpp"

#include <cmath>
#include <future>
#include <random>

namespace evodyn {

double RegularityConstants::K() const {
  return std::max(2.0 * L3 + 3.0 * std::max(L1, M), 3.0 * std::max(L2, M));
}

void RegularityConstants::validate() const {
  for (double c : {M, L1, L2, L3})
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("regularity constants must be >= 0");
}

double gronwall_bound(const RegularityConstants& consts, double d_lambda, double d_mu0, double t) {
  consts.validate();
  if (!(d_lambda >= 0.0) || !(d_mu0 >= 0.0) || !(t >= 0.0))
    throw ValidationError("gronwall_bound inputs must be >= 0");
  return -d_lambda + (d_lambda + d_mu0) * std::exp(consts.K() * t);
}

double max_switch_rate(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                       const PayoffVector& rho) {
  require_same_grid(mu.grid(), rho.grid(), "max_switch_rate");
  const Vector& r = rho.values();
  double best = 0.0;
  if (protocol.kind() == RevisionProtocol::Kind::bnn) {
    best = std::max(0.0, r.maxCoeff() - pairing(rho, mu));
  } else {
    for (Index i = 0; i < r.size(); ++i)
      for (Index j = 0; j < r.size(); ++j) best = std::max(best, protocol.phi(r(j) - r(i)));
  }
  return protocol.rate() * best;
}

double protocol_bound_estimate(const RevisionProtocol& protocol, const PayoffKernel& kernel,
                               Index samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("protocol_bound_estimate needs samples >= 1");
  std::mt19937_64 seeder(seed);
  double best = 0.0;
  for (Index k = 0; k < samples; ++k) {
    const DiscreteMeasure mu = random_measure(kernel.grid(), seeder());
    best = std::max(best, max_switch_rate(protocol, mu, evaluate_payoffs(kernel, mu)));
  }
  return best;
}

namespace {

Trajectory run_level(const RefineFamily& family, const RevisionProtocol& protocol, Index n,
                     const SimulationOptions& options) {
  const StrategyGrid grid = family.grid(n);
  const PayoffKernel kernel = family.kernel(grid);
  const DiscreteMeasure x0 = family.initial(grid);
  const ReferenceMeasure lambda = family.reference ? family.reference(grid) : make_uniform_reference(grid);
  const RevisionProtocol p =
      family.per_strategy_rate ? protocol.with_rate(static_cast<double>(grid.size())) : protocol;
  return simulate_edm(kernel, p, lambda, x0, options);
}

}  // namespace

RefineReport refine_study(const RefineFamily& family, const RevisionProtocol& protocol,
                          const std::vector<Index>& ns, const SimulationOptions& options,
                          unsigned jobs) {
  if (!family.grid || !family.kernel || !family.initial)
    throw ValidationError("refine family needs grid, kernel and initial generators");
  if (ns.size() < 2) throw ValidationError("refine_study needs at least two grid sizes");
  for (std::size_t k = 1; k < ns.size(); ++k)
    if (ns[k] < ns[k - 1]) throw ValidationError("refine_study grid sizes must be nondecreasing");
  options.validate();
  if (jobs == 0) jobs = 1;

  RefineReport report;
  report.trajectories.resize(ns.size());
  for (std::size_t start = 0; start < ns.size(); start += jobs) {
    const std::size_t stop = std::min(ns.size(), start + jobs);
    std::vector<std::future<Trajectory>> pending;
    for (std::size_t k = start; k < stop; ++k)
      pending.push_back(std::async(std::launch::async, run_level, std::cref(family),
                                   std::cref(protocol), ns[k], std::cref(options)));
    for (std::size_t k = start; k < stop; ++k) report.trajectories[k] = pending[k - start].get();
  }

  for (std::size_t k = 1; k < ns.size(); ++k) {
    const Trajectory& coarse = report.trajectories[k - 1];
    const Trajectory& fine = report.trajectories[k];
    if (coarse.times != fine.times)
      throw ValidationError("refinement levels produced different sample times");
    const StrategyGrid common = union_grid(coarse.states.front().grid(), fine.states.front().grid());
    RefineRow row{ns[k - 1], ns[k], -1.0, 0.0};
    for (std::size_t s = 0; s < coarse.times.size(); ++s) {
      const double d = bl_distance(embed(coarse.states[s], common), embed(fine.states[s], common));
      if (d > row.sup_bl) {
        row.sup_bl = d;
        row.t_of_max = coarse.times[s];
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

ChoiceMobilityReport choice_mobility_trace(const std::vector<Trajectory>& trajectories,
                                           const std::vector<DiscreteMeasure>& limits,
                                           double threshold) {
  if (trajectories.empty()) throw ValidationError("choice_mobility_trace needs trajectories");
  if (trajectories.size() != limits.size())
    throw ValidationError("choice_mobility_trace needs one limit per trajectory");
  ChoiceMobilityReport report;
  report.threshold = threshold;
  report.times = trajectories.front().times;
  report.c.assign(report.times.size(), 0.0);
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const Trajectory& traj = trajectories[k];
    if (traj.times != report.times) throw ValidationError("trajectories have mismatched sample times");
    for (std::size_t s = 0; s < report.times.size(); ++s)
      report.c[s] = std::max(report.c[s], tv_norm(traj.states[s] - limits[k]));
  }
  report.mobile = report.c.back() < threshold;
  report.verdict = report.mobile ? "choice-mobile (empirically)" : "paralysis suspected";
  return report;
}

FieldBoundCheck field_bound_check(const Trajectory& trajectory, const RevisionProtocol& protocol,
                                  const PayoffKernel& kernel, const ReferenceMeasure& lambda_ref) {
  FieldBoundCheck check;
  for (const DiscreteMeasure& mu : trajectory.states) {
    const PayoffVector f = evaluate_payoffs(kernel, mu);
    check.rate_bound = std::max(check.rate_bound, max_switch_rate(protocol, mu, f));
    check.max_field_l1 = std::max(check.max_field_l1, tv_norm(mean_field(protocol, mu, f, lambda_ref)));
  }
  check.holds = check.max_field_l1 <= 2.0 * check.rate_bound * (1.0 + 1e-12);
  return check;
}

}  // namespace evodyn
