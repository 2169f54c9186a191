#pragma once

#include <stdexcept>
#include <string>

namespace kas {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Value outside the mathematical domain of an operation (non-finite entries,
/// zero denominators, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied parameter is invalid.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input coordinate lies outside its declared bounds.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed even after jitter escalation.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, double last_jitter)
      : Error(what), last_jitter_(last_jitter) {}
  double last_jitter() const noexcept { return last_jitter_; }

 private:
  double last_jitter_;
};

/// Feature-map Jacobian is rank deficient, so gradients cannot be lifted.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// On-disk data does not match the expected layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A cell could not be parsed as a number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Object is missing state required by the requested operation.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Operation is not defined for this variant of its input.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Gaussian-process hyperparameter fitting failed.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace kas
