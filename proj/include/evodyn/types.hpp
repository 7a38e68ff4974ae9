#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace evodyn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bad input: out-of-range parameters, mismatched grids, malformed config.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The integrator produced a state it cannot repair (NaN, or a weight below
// the clamp tolerance, which usually means dt is too large).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evodyn
