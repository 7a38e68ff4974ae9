#pragma once

#include "evodyn/types.hpp"

#include <algorithm>

// Finite mean-dynamics vector fields on raw Eigen vectors. Index i is the
// destination strategy, j the origin:
//   xdot_i = rate * (lambda_i * sum_j G(j,i) x_j - x_i * sum_j G(i,j) lambda_j).

namespace evodyn::fields {

/// BNN: G(j,i) = max(0, rho_i - <rho,x>), independent of j.
template <typename DX, typename DR, typename DL>
Vector bnn(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DR>& rho,
           const Eigen::MatrixBase<DL>& lambda, double rate) {
  const double mean = rho.dot(x);
  const Vector excess = (rho.array() - mean).cwiseMax(0.0).matrix();
  const double outflow = lambda.dot(excess);
  return rate * (lambda.cwiseProduct(excess) * x.sum() - x * outflow);
}

/// Pairwise comparison: G(j,i) = phi(rho_i - rho_j).
template <typename DX, typename DR, typename DL, typename Phi>
Vector pairwise(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DR>& rho,
                const Eigen::MatrixBase<DL>& lambda, double rate, Phi&& phi) {
  const Index n = x.size();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double ri = rho(i);
    double in = 0.0;
    double away = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double r = rho(j);
      in += x(j) * phi(ri - r);
      away += lambda(j) * phi(r - ri);
    }
    out(i) = rate * (lambda(i) * in - x(i) * away);
  }
  return out;
}

inline double smith_rate(double r) { return std::max(r, 0.0); }

}  // namespace evodyn::fields
