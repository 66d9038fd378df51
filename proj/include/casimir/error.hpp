#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

/// Base of every library error; `exit_code()` follows the CLI contract
/// (2 = input/config problem, 3 = numerical failure).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration / input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Query outside the region covered by a table, map or profile.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for the requested estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Quadrature, summation or minimization did not reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  explicit NumericalError(const std::string& what) : Error(what) {}
  int exit_code() const noexcept override { return 3; }
  double residual() const noexcept { return residual_; }

 private:
  double residual_ = 0.0;
};

}  // namespace casimir
