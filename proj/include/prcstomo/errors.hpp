#pragma once

#include <stdexcept>
#include <string>

namespace prcstomo {

/// Bad configuration or structurally invalid input (CLI exit code 1).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: ill-conditioning, non-convergence (CLI exit code 2).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean photon numbers too close for a stable linear inversion.
class IllConditionedError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// One-dimensional fit did not converge.
class FitError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Filesystem or file-format failure (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text file; carries the offending line number.
class ParseError : public IoError {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : IoError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace prcstomo
