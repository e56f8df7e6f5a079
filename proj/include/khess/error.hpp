#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace khess {

/// Broad failure classes; the CLI maps each onto an exit code.
enum class ErrorCategory {
  usage,       // bad input files, flags or configuration
  numerical,   // non-convergence, overflow, quadrature failure, table range
  hypothesis,  // a structural assumption on the data is violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

/// Syntax error in an expression; offset is a byte index into the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(ErrorCategory::usage, what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

/// Evaluation produced a non-finite value (log of a negative number, 0^-1, ...).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Adaptive quadrature did not reach its tolerance; best_value is still usable.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double best_value, double error_estimate)
      : NumericalError(what), best_value_(best_value), error_estimate_(error_estimate) {}

  double best_value() const noexcept { return best_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_value_;
  double error_estimate_;
};

/// A value requested from a finite table lies outside its tabulated range.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class HypothesisError : public Error {
 public:
  explicit HypothesisError(const std::string& what) : Error(ErrorCategory::hypothesis, what) {}
};

}  // namespace khess
