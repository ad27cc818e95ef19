#pragma once

#include <stdexcept>
#include <string>

namespace fcuc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (syntax, missing columns, non-numeric cells).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant. `field()` names the offender.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A required input artifact does not exist.
class MissingInputError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by a caller (bad index, non-physical argument).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Frequency simulation could not be brought within limits (system collapse).
class CollapseError : public Error {
 public:
  using Error::Error;
};

/// Numerical routine failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// MILP backend failure: no incumbent, backend crash, unreadable output.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace fcuc
