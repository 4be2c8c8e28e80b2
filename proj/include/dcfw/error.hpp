#pragma once

#include <stdexcept>
#include <string>

namespace dcfw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose shapes or kinds cannot be combined.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative routine exhausted its budget.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Backtracking exceeded its cap without satisfying the sufficient-decrease test.
class LineSearchStalled : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number (0 when not line-specific).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dcfw
