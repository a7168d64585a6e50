#pragma once

#include <stdexcept>
#include <string>

namespace epw {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from one of the three
// families below rather than from Error directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Family: invalid input (exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EvaluationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ContractError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnboundedSearchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegeneratePeriodError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateCornerError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StepTooLargeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Family: solver failure (exit code 2).
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

// Family: a runtime property monitor failed (exit code 3).
class MonitorViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace epw
