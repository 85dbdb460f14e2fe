#pragma once

#include <stdexcept>
#include <string>

namespace pals {

/// Input outside the mathematical domain of a function (negative radius, indefinite weight).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration value or file content. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Violated caller contract, e.g. mismatched vector lengths.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical breakdown. The CLI maps this (and its subclasses) to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An ellipsoidal (or Cholesky) basis whose shape matrix is not positive definite.
class SingularBasisError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A shape matrix left the domain of the log-det barrier.
class BarrierViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Operation not defined for the requested basis parameterization.
class UnsupportedKindError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pals
