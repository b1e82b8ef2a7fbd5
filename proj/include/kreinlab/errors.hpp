#pragma once

#include <stdexcept>
#include <string>

namespace kreinlab {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes: InputError -> 1, AccuracyError/InconclusiveError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or domain violation in caller-supplied data.
class InputError : public Error {
 public:
  using Error::Error;
};

// Requested operation is outside the supported catalog.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed to reach its tolerance. Carries the best
// estimate obtained before giving up.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate = 0.0)
      : Error(what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

// Evidence does not support any decision (e.g. ambiguous truncation ladder).
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

// Internal numerical failure (eigensolver non-convergence, broken invariant).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace kreinlab
