#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vanbo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Violated precondition or interface contract (caller bug).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Numerical failure that survived all recovery attempts (jitter ladder etc).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration input; message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vanbo
