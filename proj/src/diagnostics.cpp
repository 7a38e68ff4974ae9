#include "evodyn/diagnostics.hpp"

#include <cmath>

namespace evodyn {

namespace {

Vector scaled_lambda(const RevisionProtocol& protocol, const ReferenceMeasure& lambda_ref) {
  return protocol.rate() * lambda_ref.weights();
}

Vector bnn_excess(const Vector& w, const Vector& rho) {
  return (rho.array() - rho.dot(w)).cwiseMax(0.0).matrix();
}

double bnn_storage_raw(const Vector& w, const Vector& rho, const Vector& lambda) {
  return 0.5 * lambda.dot(bnn_excess(w, rho).cwiseAbs2());
}

template <typename Tau>
double pc_storage_raw(const Vector& w, const Vector& rho, const Vector& lambda, Tau&& tau) {
  const Index n = w.size();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (w(i) == 0.0) continue;
    double inner = 0.0;
    for (Index j = 0; j < n; ++j) inner += lambda(j) * tau(rho(j) - rho(i));
    total += w(i) * inner;
  }
  return total;
}

double protocol_storage_raw(const RevisionProtocol& protocol, const Vector& w, const Vector& rho,
                            const Vector& lambda) {
  if (protocol.kind() == RevisionProtocol::Kind::bnn) return bnn_storage_raw(w, rho, lambda);
  return pc_storage_raw(w, rho, lambda, [&protocol](double r) { return protocol.tau(r); });
}

void check_aligned(const DiscreteMeasure& mu, const PayoffVector& rho, const ReferenceMeasure& lambda,
                   const char* what) {
  require_same_grid(mu.grid(), rho.grid(), what);
  require_same_grid(mu.grid(), lambda.grid(), what);
}

}  // namespace

double nash_gap(const DiscreteMeasure& mu, const PayoffVector& rho) {
  require_same_grid(mu.grid(), rho.grid(), "nash_gap");
  return rho.values().maxCoeff() - pairing(rho, mu);
}

NashCheck nash_check(const DiscreteMeasure& mu, const PayoffVector& rho, double tol,
                     double support_tol) {
  require_same_grid(mu.grid(), rho.grid(), "nash_check");
  if (tol < 0.0) throw ValidationError("nash_check tolerance must be >= 0");
  NashCheck result;
  const std::vector<Index> supp = support(mu, support_tol);
  if (supp.empty()) return result;
  Index worst_supported = supp.front();
  for (Index j : supp)
    if (rho[j] < rho[worst_supported]) worst_supported = j;
  Index best = 0;
  rho.values().maxCoeff(&best);
  const double amount = rho[best] - rho[worst_supported];
  if (amount > 0.0) result.worst = NashViolation{best, worst_supported, amount};
  result.is_nash = amount <= tol;
  return result;
}

double bnn_storage(const DiscreteMeasure& mu, const PayoffVector& rho,
                   const ReferenceMeasure& lambda_ref) {
  check_aligned(mu, rho, lambda_ref, "bnn_storage");
  return bnn_storage_raw(mu.weights(), rho.values(), lambda_ref.weights());
}

double pc_storage(const DiscreteMeasure& mu, const PayoffVector& rho,
                  const ReferenceMeasure& lambda_ref, const RevisionProtocol::RateFunction& tau) {
  check_aligned(mu, rho, lambda_ref, "pc_storage");
  if (!tau) throw ValidationError("pc_storage needs the integrated rate function tau");
  return pc_storage_raw(mu.weights(), rho.values(), lambda_ref.weights(), tau);
}

double storage(const RevisionProtocol& protocol, const DiscreteMeasure& mu, const PayoffVector& rho,
               const ReferenceMeasure& lambda_ref) {
  check_aligned(mu, rho, lambda_ref, "storage");
  return protocol_storage_raw(protocol, mu.weights(), rho.values(),
                              scaled_lambda(protocol, lambda_ref));
}

double dissipation_rate(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                        const PayoffVector& rho, const ReferenceMeasure& lambda_ref) {
  check_aligned(mu, rho, lambda_ref, "dissipation_rate");
  const Vector lambda = scaled_lambda(protocol, lambda_ref);
  if (protocol.kind() == RevisionProtocol::Kind::bnn) {
    // <rho, v> = sum lambda e^2 because e_i (rho_i - <rho, mu>) = e_i^2.
    const Vector e = bnn_excess(mu.weights(), rho.values());
    return lambda.dot(e.cwiseAbs2()) * lambda.dot(e);
  }
  const Vector v = mean_field_raw(protocol, mu.weights(), rho.values(), lambda_ref.weights());
  return -protocol_storage_raw(protocol, v, rho.values(), lambda);
}

double storage_derivative(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                          const PayoffVector& rho, const ReferenceMeasure& lambda_ref,
                          const DiscreteMeasure& nu, const PayoffVector& eta) {
  check_aligned(mu, rho, lambda_ref, "storage_derivative");
  require_same_grid(mu.grid(), nu.grid(), "storage_derivative");
  require_same_grid(mu.grid(), eta.grid(), "storage_derivative");
  const Vector lambda = scaled_lambda(protocol, lambda_ref);
  const Vector& w = mu.weights();
  const Vector& r = rho.values();
  const Vector& e = eta.values();
  if (protocol.kind() == RevisionProtocol::Kind::bnn) {
    const Vector weighted = lambda.cwiseProduct(bnn_excess(w, r));
    const double d_mu = -r.dot(nu.weights()) * weighted.sum();
    const double d_rho = weighted.dot((e.array() - e.dot(w)).matrix());
    return d_mu + d_rho;
  }
  const double d_mu = protocol_storage_raw(protocol, nu.weights(), r, lambda);
  const Index n = w.size();
  double d_rho = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (w(i) == 0.0) continue;
    double inner = 0.0;
    for (Index j = 0; j < n; ++j) inner += lambda(j) * protocol.phi(r(j) - r(i)) * (e(j) - e(i));
    d_rho += w(i) * inner;
  }
  return d_mu + d_rho;
}

double supply_rate(const DiscreteMeasure& nu, const PayoffVector& eta) { return pairing(eta, nu); }

double closed_loop_supply(const PayoffKernel& kernel, const DiscreteMeasure& v) {
  return bilinear_form(kernel, v, v);
}

DissipativityReport dissipativity_report(const RevisionProtocol& protocol, const DiscreteMeasure& mu,
                                         const PayoffVector& rho, const ReferenceMeasure& lambda_ref,
                                         const PayoffVector& eta, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be > 0");
  DissipativityReport report;
  const DiscreteMeasure v = mean_field(protocol, mu, rho, lambda_ref);
  report.storage = storage(protocol, mu, rho, lambda_ref);
  report.dissipation_sigma = dissipation_rate(protocol, mu, rho, lambda_ref);
  report.supply_w = supply_rate(v, eta);
  report.derivative = storage_derivative(protocol, mu, rho, lambda_ref, v, eta);
  const Vector lambda = scaled_lambda(protocol, lambda_ref);
  const double up = protocol_storage_raw(protocol, mu.weights() + h * v.weights(),
                                         rho.values() + h * eta.values(), lambda);
  const double down = protocol_storage_raw(protocol, mu.weights() - h * v.weights(),
                                           rho.values() - h * eta.values(), lambda);
  report.fd_derivative = (up - down) / (2.0 * h);
  report.slack = -report.dissipation_sigma + report.supply_w - report.derivative;
  return report;
}

StorageTraceReport storage_trace_check(const Trajectory& trajectory, const RevisionProtocol& protocol,
                                       const PayoffKernel& kernel, const ReferenceMeasure& lambda_ref) {
  const MonotonicityReport mono = monotonicity_test(kernel, 200, 0x6d6f6e6fULL);
  if (!mono.monotone)
    throw ValidationError("storage_trace_check needs a monotone game; bilinear form reached " +
                          std::to_string(mono.max_value));
  StorageTraceReport report;
  const Index m = trajectory.size();
  std::vector<double> predicted(static_cast<std::size_t>(m));
  report.storage.resize(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    const DiscreteMeasure& mu = trajectory.states[static_cast<std::size_t>(k)];
    const PayoffVector f = evaluate_payoffs(kernel, mu);
    report.storage[k] = storage(protocol, mu, f, lambda_ref);
    const DiscreteMeasure v = mean_field(protocol, mu, f, lambda_ref);
    predicted[k] = -dissipation_rate(protocol, mu, f, lambda_ref) + closed_loop_supply(kernel, v);
  }
  report.max_increase = m > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (Index k = 0; k + 1 < m; ++k)
    report.max_increase = std::max(report.max_increase, report.storage[k + 1] - report.storage[k]);
  // Three-point derivative, second order on nonuniform spacing.
  for (Index k = 1; k + 1 < m; ++k) {
    const auto& t = trajectory.times;
    const auto& s = report.storage;
    const double hm = t[k] - t[k - 1];
    const double hp = t[k + 1] - t[k];
    const double derivative =
        (hm * hm * s[k + 1] - hp * hp * s[k - 1] + (hp * hp - hm * hm) * s[k]) / (hm * hp * (hm + hp));
    report.energy_balance_residual =
        std::max(report.energy_balance_residual, std::abs(derivative - predicted[k]));
  }
  return report;
}

RestPointCheck rest_point_check(const DiscreteMeasure& mu, const PayoffKernel& kernel,
                                const RevisionProtocol& protocol, const ReferenceMeasure& lambda_ref,
                                double tol) {
  if (tol < 0.0) throw ValidationError("rest_point_check tolerance must be >= 0");
  const PayoffVector f = evaluate_payoffs(kernel, mu);
  RestPointCheck result;
  result.field_tv = tv_norm(mean_field(protocol, mu, f, lambda_ref));
  result.is_rest_point = result.field_tv <= tol;
  result.nash = nash_check(mu, f, 100.0 * tol).is_nash;
  result.gap = nash_gap(mu, f);
  return result;
}

double score_function(const PayoffKernel& kernel, const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                      double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("score_function needs 0 < eta <= 1");
  if (!nu.is_probability() || !mu.is_probability())
    throw ValidationError("score_function needs probability measures");
  const DiscreteMeasure mixed = (1.0 - eta) * mu + eta * nu;
  return pairing(evaluate_payoffs(kernel, mixed), nu - mu);
}

}  // namespace evodyn
