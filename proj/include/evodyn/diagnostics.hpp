#pragma once

#include "evodyn/dynamics.hpp"

#include <optional>

namespace evodyn {

/// max_i rho_i - <rho, mu>.
double nash_gap(const DiscreteMeasure& mu, const PayoffVector& rho);

struct NashViolation {
  Index s = 0;        // grid index of the better reply
  Index s_prime = 0;  // supported strategy it beats
  double amount = 0.0;
};

struct NashCheck {
  bool is_nash = true;
  std::optional<NashViolation> worst;
};

/// rho(s) <= rho(s') + tol for every grid s and every s' with mu(s') > support_tol.
NashCheck nash_check(const DiscreteMeasure& mu, const PayoffVector& rho, double tol,
                     double support_tol = 1e-9);

// Storage functions. The first argument may be a signed measure, in which
// case the storage is extended linearly in it (pairwise case).
double bnn_storage(const DiscreteMeasure& mu, const PayoffVector& rho,
                   const ReferenceMeasure& lambda_ref);
double pc_storage(const DiscreteMeasure& mu, const PayoffVector& rho,
                  const ReferenceMeasure& lambda_ref,
                  const RevisionProtocol::RateFunction& tau);

/// Storage for the protocol, with its rate folded into the reference weights.
double storage(const RevisionProtocol& protocol, const DiscreteMeasure& mu, const PayoffVector& rho,
               const ReferenceMeasure& lambda_ref);

double dissipation_rate(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                        const PayoffVector& rho, const ReferenceMeasure& lambda_ref);

/// Directional derivative of the storage at (mu, rho) along (nu, eta), from
/// the closed forms of its partial derivatives.
double storage_derivative(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                          const PayoffVector& rho, const ReferenceMeasure& lambda_ref,
                          const DiscreteMeasure& nu, const PayoffVector& eta);

double supply_rate(const DiscreteMeasure& nu, const PayoffVector& eta);

/// <F(v), v>; for kernel games DF(mu) v = F(v).
double closed_loop_supply(const PayoffKernel& kernel, const DiscreteMeasure& v);

struct DissipativityReport {
  double storage = 0.0;
  double dissipation_sigma = 0.0;
  double supply_w = 0.0;
  double derivative = 0.0;     // closed form
  double fd_derivative = 0.0;  // central difference with step h
  double slack = 0.0;          // -sigma + w - derivative
};

/// Evaluates the dissipation inequality at (mu, rho) for the input direction eta.
DissipativityReport dissipativity_report(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                                         const PayoffVector& rho, const ReferenceMeasure& lambda_ref,
                                         const PayoffVector& eta, double h = 1e-6);

struct StorageTraceReport {
  double max_increase = 0.0;
  double energy_balance_residual = 0.0;  // max over interior samples
  std::vector<double> storage;
};

/// Checks storage decrease along a static-feedback trajectory of a monotone
/// game. Throws ValidationError if the kernel fails the monotonicity test.
StorageTraceReport storage_trace_check(const Trajectory& trajectory, const RevisionProtocol& protocol,
                                       const PayoffKernel& kernel, const ReferenceMeasure& lambda_ref);

struct RestPointCheck {
  bool is_rest_point = false;
  double field_tv = 0.0;
  bool nash = false;  // nash_check at 100x the tolerance
  double gap = 0.0;
};

RestPointCheck rest_point_check(const DiscreteMeasure& mu, const PayoffKernel& kernel,
                                const RevisionProtocol& protocol, const ReferenceMeasure& lambda_ref,
                                double tol);

/// <F((1 - eta) mu + eta nu), nu - mu>.
double score_function(const PayoffKernel& kernel, const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                      double eta);

}  // namespace evodyn
