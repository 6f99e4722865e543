#pragma once

#include <stdexcept>
#include <string>

namespace realeig {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative or adaptive method exhausted its budget above tolerance.
/// The best available estimate is kept for diagnostics.
class NonConvergent : public Error {
 public:
  NonConvergent(const std::string& what, double partial, double err_est)
      : Error(what), partial_(partial), err_est_(err_est) {}
  double partial() const noexcept { return partial_; }
  double err_est() const noexcept { return err_est_; }

 private:
  double partial_;
  double err_est_;
};

/// An integrand or series produced NaN.
class NanEncountered : public Error {
 public:
  using Error::Error;
};

/// Floating-point cancellation destroyed the requested accuracy.
class PrecisionLoss : public Error {
 public:
  using Error::Error;
};

/// A series needed more terms than its budget allows.
class SlowConvergence : public Error {
 public:
  using Error::Error;
};

/// The real Schur iteration hit its iteration cap.
class SchurNoConvergence : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a cache / report file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace realeig
