#pragma once

#include <stdexcept>
#include <string>

namespace cnode {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform to the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Caller passed an argument outside the documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// NaN/Inf produced or encountered where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Data passed structural parsing but violates a domain rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? what + " at line " + std::to_string(line) : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or model/parameter mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cnode
