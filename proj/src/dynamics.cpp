#include "evodyn/dynamics.hpp"

#include "evodyn/diagnostics.hpp"
#include "evodyn/fields.hpp"

#include <cmath>
#include <random>

namespace evodyn {

RevisionProtocol::RevisionProtocol(Kind kind, double rate, double power, RateFunction phi,
                                   RateFunction tau, std::string label)
    : kind_(kind), rate_(rate), power_(power), phi_(std::move(phi)), tau_(std::move(tau)),
      label_(std::move(label)) {
  if (!(rate_ > 0.0) || !std::isfinite(rate_)) throw ValidationError("protocol rate must be > 0");
}

RevisionProtocol RevisionProtocol::bnn(double rate) {
  return RevisionProtocol(Kind::bnn, rate, 0.0, {}, {}, "bnn");
}

RevisionProtocol RevisionProtocol::smith(double rate) {
  return RevisionProtocol(Kind::smith, rate, 1.0, {}, {}, "smith");
}

RevisionProtocol RevisionProtocol::power(double k, double rate) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("power protocol exponent must be > 0");
  if (k == 1.0) return smith(rate);
  auto phi = [k](double r) { return r > 0.0 ? std::pow(r, k) : 0.0; };
  auto tau = [k](double r) { return r > 0.0 ? std::pow(r, k + 1.0) / (k + 1.0) : 0.0; };
  return RevisionProtocol(Kind::impartial, rate, k, phi, tau, "power");
}

RevisionProtocol RevisionProtocol::impartial(RateFunction phi, RateFunction tau, std::string label,
                                             double rate) {
  if (!phi) throw ValidationError("impartial protocol needs a rate function");
  return RevisionProtocol(Kind::impartial, rate, 0.0, std::move(phi), std::move(tau),
                          std::move(label));
}

RevisionProtocol RevisionProtocol::with_rate(double rate) const {
  RevisionProtocol copy = *this;
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("protocol rate must be > 0");
  copy.rate_ = rate;
  return copy;
}

double RevisionProtocol::phi(double r) const {
  switch (kind_) {
    case Kind::smith: return fields::smith_rate(r);
    case Kind::impartial: return phi_(r);
    case Kind::bnn: break;
  }
  throw ValidationError("bnn has no pairwise rate function");
}

bool RevisionProtocol::has_tau() const { return kind_ == Kind::smith || static_cast<bool>(tau_); }

double RevisionProtocol::tau(double r) const {
  if (kind_ == Kind::smith) return r > 0.0 ? 0.5 * r * r : 0.0;
  if (kind_ == Kind::impartial && tau_) return tau_(r);
  throw ValidationError("protocol '" + label_ + "' has no integrated rate function tau");
}

void SmoothingConfig::validate() const {
  if (!(lambda_s > 0.0) || !std::isfinite(lambda_s))
    throw ValidationError("smoothing lambda_s must be > 0");
}

std::string to_string(Integrator method) { return method == Integrator::euler ? "euler" : "rk4"; }

Integrator integrator_from_string(const std::string& name) {
  if (name == "euler") return Integrator::euler;
  if (name == "rk4") return Integrator::rk4;
  throw ValidationError("unknown integrator '" + name + "' (expected euler or rk4)");
}

Vector mean_field_raw(const RevisionProtocol& protocol, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& rho, const Eigen::Ref<const Vector>& lambda) {
  switch (protocol.kind()) {
    case RevisionProtocol::Kind::bnn: return fields::bnn(x, rho, lambda, protocol.rate());
    case RevisionProtocol::Kind::smith:
      return fields::pairwise(x, rho, lambda, protocol.rate(), fields::smith_rate);
    case RevisionProtocol::Kind::impartial:
      return fields::pairwise(x, rho, lambda, protocol.rate(),
                              [&protocol](double r) { return protocol.phi(r); });
  }
  return Vector();
}

DiscreteMeasure mean_field(const RevisionProtocol& protocol, const DiscreteMeasure& x,
                           const PayoffVector& rho, const ReferenceMeasure& lambda_ref) {
  require_same_grid(x.grid(), rho.grid(), "mean_field");
  require_same_grid(x.grid(), lambda_ref.grid(), "mean_field");
  Vector v = mean_field_raw(protocol, x.weights(), rho.values(), lambda_ref.weights());
  if (!v.allFinite()) throw NumericalError("mean field is not finite");
  return DiscreteMeasure::signed_measure(x.grid(), std::move(v));
}

bool sign_preservation_check(const RevisionProtocol& protocol, Index trials, std::uint64_t seed) {
  if (!protocol.is_pairwise())
    throw ValidationError("sign preservation is defined for pairwise protocols, not bnn");
  if (trials < 1) throw ValidationError("sign_preservation_check needs trials >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> payoff(-2.0, 2.0);
  std::uniform_int_distribution<int> coin(0, 3);
  for (Index t = 0; t < trials; ++t) {
    const double ri = payoff(gen);
    // Force exact ties a quarter of the time; they are the boundary case.
    const double rj = coin(gen) == 0 ? ri : payoff(gen);
    const double rate = protocol.phi(rj - ri);
    const bool positive = rate > 0.0;
    if (rate < 0.0 || positive != (rj > ri)) return false;
  }
  return true;
}

void RunStats::merge(const RunStats& other) {
  max_tangency_residual = std::max(max_tangency_residual, other.max_tangency_residual);
  min_raw_weight = std::min(min_raw_weight, other.min_raw_weight);
  max_mass_error = std::max(max_mass_error, other.max_mass_error);
  renormalizations += other.renormalizations;
  clamps += other.clamps;
  field_evaluations += other.field_evaluations;
  steps += other.steps;
}

void probability_guard(Vector& x, RunStats& stats) {
  if (!x.allFinite()) throw NumericalError("state became non-finite");
  const double lowest = x.minCoeff();
  stats.min_raw_weight = std::min(stats.min_raw_weight, lowest);
  if (lowest < -1e-12) {
    throw NumericalError("weight " + std::to_string(lowest) +
                         " fell below -1e-12; the time step is too large");
  }
  if (lowest < 0.0) {
    x = x.cwiseMax(0.0);
    ++stats.clamps;
  }
  const double mass = x.sum();
  if (std::abs(mass - 1.0) > 1e-12) {
    x /= mass;
    ++stats.renormalizations;
  }
  stats.max_mass_error = std::max(stats.max_mass_error, std::abs(x.sum() - 1.0));
}

Vector integrate_step(const Vector& y, const FieldFunction& f, double dt, Integrator method) {
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (method == Integrator::euler) return y + dt * f(y);
  const Vector k1 = f(y);
  const Vector k2 = f(y + 0.5 * dt * k1);
  const Vector k3 = f(y + 0.5 * dt * k2);
  const Vector k4 = f(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

void record_tangency(RunStats& stats, const Vector& v) {
  ++stats.field_evaluations;
  stats.max_tangency_residual = std::max(stats.max_tangency_residual, std::abs(v.sum()));
}

}  // namespace

DiscreteMeasure step(const RevisionProtocol& protocol, const ReferenceMeasure& lambda_ref,
                     const DiscreteMeasure& x,
                     const std::function<PayoffVector(const DiscreteMeasure&)>& rho_provider,
                     double dt, Integrator method, RunStats* stats) {
  RunStats local;
  RunStats& s = stats ? *stats : local;
  const StrategyGrid& grid = x.grid();
  auto f = [&](const Vector& y) {
    // Intermediate RK stages may leave the simplex slightly, so they are
    // wrapped as signed measures.
    const PayoffVector rho = rho_provider(DiscreteMeasure::signed_measure(grid, y));
    Vector v = mean_field_raw(protocol, y, rho.values(), lambda_ref.weights());
    if (!v.allFinite()) throw NumericalError("mean field is not finite");
    record_tangency(s, v);
    return v;
  };
  Vector next = integrate_step(x.weights(), f, dt, method);
  probability_guard(next, s);
  ++s.steps;
  return DiscreteMeasure::probability(grid, std::move(next));
}

void SimulationOptions::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  if (sample_every < 1) throw ValidationError("sample_every must be >= 1");
}

namespace {

Index step_count(const SimulationOptions& o) {
  return static_cast<Index>(std::ceil(o.t_end / o.dt - 1e-9));
}

void append_sample(Trajectory& traj, double t, const Vector& x, const Vector& rho, const Vector& game,
                   const RevisionProtocol& protocol, const ReferenceMeasure& lambda_ref) {
  const StrategyGrid& grid = lambda_ref.grid();
  DiscreteMeasure mu = DiscreteMeasure::probability(grid, x);
  PayoffVector payoff(grid, rho);
  SampleDiagnostics d;
  d.nash_gap = nash_gap(mu, PayoffVector(grid, game));
  if (protocol.kind() == RevisionProtocol::Kind::bnn || protocol.has_tau()) {
    d.storage = storage(protocol, mu, payoff, lambda_ref);
    d.sigma = dissipation_rate(protocol, mu, payoff, lambda_ref);
  } else {
    d.storage = std::numeric_limits<double>::quiet_NaN();
    d.sigma = std::numeric_limits<double>::quiet_NaN();
  }
  d.mass_error = std::abs(x.sum() - 1.0);
  traj.times.push_back(t);
  traj.states.push_back(std::move(mu));
  traj.payoffs.push_back(std::move(payoff));
  traj.diagnostics.push_back(d);
}

// Shared driver: y holds the state (x, or x stacked over rho), `field` its
// time derivative, `split` extracts (x, rho, F(x)) for sampling.
template <typename Field, typename Sample>
Trajectory drive(Vector y, Index n, const SimulationOptions& options, Field&& field,
                 Sample&& sample) {
  options.validate();
  Trajectory traj;
  const Index steps = step_count(options);
  sample(traj, 0.0, y);
  for (Index k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * options.dt;
    const double t = (k == steps) ? options.t_end : static_cast<double>(k) * options.dt;
    y = integrate_step(y, field, t - t_prev, options.method);
    Vector x = y.head(n);
    probability_guard(x, traj.stats);
    y.head(n) = x;
    ++traj.stats.steps;
    if (k % options.sample_every == 0 || k == steps) sample(traj, t, y);
  }
  return traj;
}

}  // namespace

Trajectory simulate_edm(const PayoffKernel& kernel, const RevisionProtocol& protocol,
                        const ReferenceMeasure& lambda_ref, const DiscreteMeasure& x0,
                        const SimulationOptions& options) {
  require_same_grid(kernel.grid(), x0.grid(), "simulate_edm");
  require_same_grid(kernel.grid(), lambda_ref.grid(), "simulate_edm");
  if (!x0.is_probability()) throw ValidationError("initial state must be a probability measure");
  const Matrix& a = kernel.matrix();
  const Vector& lambda = lambda_ref.weights();
  RunStats* stats = nullptr;
  auto field = [&](const Vector& x) {
    Vector v = mean_field_raw(protocol, x, a * x, lambda);
    if (!v.allFinite()) throw NumericalError("mean field is not finite");
    record_tangency(*stats, v);
    return v;
  };
  auto sample = [&](Trajectory& traj, double t, const Vector& x) {
    stats = &traj.stats;
    const Vector f = a * x;
    append_sample(traj, t, x, f, f, protocol, lambda_ref);
  };
  return drive(x0.weights(), x0.size(), options, field, sample);
}

Trajectory simulate_dpedm(const PayoffKernel& kernel, const RevisionProtocol& protocol,
                          const ReferenceMeasure& lambda_ref, const SmoothingConfig& smoothing,
                          const DiscreteMeasure& x0, const PayoffVector& rho0,
                          const SimulationOptions& options) {
  require_same_grid(kernel.grid(), x0.grid(), "simulate_dpedm");
  require_same_grid(kernel.grid(), rho0.grid(), "simulate_dpedm");
  require_same_grid(kernel.grid(), lambda_ref.grid(), "simulate_dpedm");
  if (!x0.is_probability()) throw ValidationError("initial state must be a probability measure");
  smoothing.validate();
  const Index n = x0.size();
  const Matrix& a = kernel.matrix();
  const Vector& lambda = lambda_ref.weights();
  const double ls = smoothing.lambda_s;
  RunStats* stats = nullptr;
  auto field = [&](const Vector& y) {
    Vector out(2 * n);
    out.head(n) = mean_field_raw(protocol, y.head(n), y.tail(n), lambda);
    out.tail(n) = ls * (a * y.head(n) - y.tail(n));
    if (!out.allFinite()) throw NumericalError("mean field is not finite");
    record_tangency(*stats, out.head(n));
    return out;
  };
  auto sample = [&](Trajectory& traj, double t, const Vector& y) {
    stats = &traj.stats;
    append_sample(traj, t, y.head(n), y.tail(n), a * y.head(n), protocol, lambda_ref);
  };
  Vector y0(2 * n);
  y0 << x0.weights(), rho0.values();
  return drive(std::move(y0), n, options, field, sample);
}

}  // namespace evodyn
