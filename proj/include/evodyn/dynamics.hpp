#pragma once

#include "evodyn/games.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evodyn {

/// Revision protocol. Every switch rate is multiplied by rate(); rate 1 with a
/// probability reference measure gives the normalized mean dynamics, rate n
/// with uniform 1/n weights gives the classical per-strategy finite dynamics.
class RevisionProtocol {
 public:
  enum class Kind { bnn, smith, impartial };
  using RateFunction = std::function<double(double)>;

  static RevisionProtocol bnn(double rate = 1.0);
  static RevisionProtocol smith(double rate = 1.0);
  /// phi(r) = max(0, r)^k with tau(r) = max(0, r)^(k+1) / (k+1).
  static RevisionProtocol power(double k, double rate = 1.0);
  /// Arbitrary impartial rate function. Storage and dissipation need tau = ∫_0^r phi.
  static RevisionProtocol impartial(RateFunction phi, RateFunction tau = {},
                                    std::string label = "custom", double rate = 1.0);

  Kind kind() const { return kind_; }
  bool is_pairwise() const { return kind_ != Kind::bnn; }
  double rate() const { return rate_; }
  RevisionProtocol with_rate(double rate) const;
  const std::string& label() const { return label_; }
  /// Exponent of the power family, 0 for bnn and custom rate functions.
  double power_exponent() const { return power_; }

  double phi(double r) const;
  bool has_tau() const;
  double tau(double r) const;

 private:
  RevisionProtocol(Kind kind, double rate, double power, RateFunction phi, RateFunction tau,
                   std::string label);

  Kind kind_;
  double rate_;
  double power_;
  RateFunction phi_;
  RateFunction tau_;
  std::string label_;
};

struct SmoothingConfig {
  double lambda_s = 1.0;
  void validate() const;
};

enum class Integrator { euler, rk4 };

std::string to_string(Integrator method);
Integrator integrator_from_string(const std::string& name);

/// Field from raw vectors, no grid checks. Used on the hot path.
Vector mean_field_raw(const RevisionProtocol& protocol, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& rho, const Eigen::Ref<const Vector>& lambda);

DiscreteMeasure mean_field(const RevisionProtocol& protocol, const DiscreteMeasure& x,
                           const PayoffVector& rho, const ReferenceMeasure& lambda_ref);

/// Samples random payoff vectors and index pairs; true iff phi(rho_j - rho_i)
/// is positive exactly when rho_j > rho_i.
bool sign_preservation_check(const RevisionProtocol& protocol, Index trials, std::uint64_t seed);

struct RunStats {
  double max_tangency_residual = 0.0;  // max |sum of field| over every evaluation
  double min_raw_weight = 0.0;         // most negative weight seen before clamping
  double max_mass_error = 0.0;         // max |sum x - 1| after the guard
  Index renormalizations = 0;
  Index clamps = 0;
  Index field_evaluations = 0;
  Index steps = 0;

  void merge(const RunStats& other);
};

/// Clamp tiny negatives, reject larger ones, renormalize drifted mass.
void probability_guard(Vector& x, RunStats& stats);

using FieldFunction = std::function<Vector(const Vector&)>;

/// One explicit step of ydot = f(y). No guard.
Vector integrate_step(const Vector& y, const FieldFunction& f, double dt, Integrator method);

/// One guarded step of xdot = mean_field(x, rho(x)).
DiscreteMeasure step(const RevisionProtocol& protocol, const ReferenceMeasure& lambda_ref,
                     const DiscreteMeasure& x,
                     const std::function<PayoffVector(const DiscreteMeasure&)>& rho_provider,
                     double dt, Integrator method, RunStats* stats = nullptr);

struct SimulationOptions {
  double t_end = 10.0;
  double dt = 0.01;
  Index sample_every = 10;
  Integrator method = Integrator::rk4;
  void validate() const;
};

struct SampleDiagnostics {
  double nash_gap = 0.0;   // against the game payoff F(x)
  double storage = 0.0;    // at the state payoff rho
  double sigma = 0.0;
  double mass_error = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DiscreteMeasure> states;
  std::vector<PayoffVector> payoffs;  // the payoff state rho(t); F(x(t)) for static feedback
  std::vector<SampleDiagnostics> diagnostics;
  RunStats stats;

  Index size() const { return static_cast<Index>(times.size()); }
  const DiscreteMeasure& final_state() const { return states.back(); }
};

Trajectory simulate_edm(const PayoffKernel& kernel, const RevisionProtocol& protocol,
                        const ReferenceMeasure& lambda_ref, const DiscreteMeasure& x0,
                        const SimulationOptions& options);

/// Couples xdot = v(x, rho) with rhodot = lambda_s (F(x) - rho).
Trajectory simulate_dpedm(const PayoffKernel& kernel, const RevisionProtocol& protocol,
                          const ReferenceMeasure& lambda_ref, const SmoothingConfig& smoothing,
                          const DiscreteMeasure& x0, const PayoffVector& rho0,
                          const SimulationOptions& options);

}  // namespace evodyn
