#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odescm {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model text could not be parsed or failed validation. Line and column are
/// 1-based; zero means "not tied to a source position".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class DivisionByZero : public EvalError {
 public:
  DivisionByZero() : EvalError("division by zero") {}
};

class UnboundName : public EvalError {
 public:
  explicit UnboundName(const std::string& name) : EvalError("unbound name '" + name + "'") {}
};

/// A value (initial condition, intervention clamp) lies outside its declared domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A closed-form mechanism was evaluated where its leading coefficient vanishes.
class DegenerateMechanism : public Error {
 public:
  DegenerateMechanism(std::string label, const std::string& detail)
      : Error("degenerate mechanism for " + label + ": " + detail), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

/// The inner root solve of an implicit mechanism did not converge.
class MechanismSolveError : public Error {
 public:
  using Error::Error;
};

/// SCM derivation was refused because structural solvability probes failed.
class SolvabilityRefused : public Error {
 public:
  using Error::Error;
};

}  // namespace odescm
