#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace realeig {

/// A real number stored as sign and natural log of its magnitude.
///
/// sign == 0 is exact zero and log_mag is then ignored. A sign of +-1 with
/// log_mag == +inf encodes a signed infinity (used for integrable
/// singularities that callers must not evaluate pointwise).
struct SignedLogValue {
  int sign = 0;
  double log_mag = 0.0;

  static constexpr SignedLogValue zero() noexcept { return {0, 0.0}; }

  static constexpr SignedLogValue from_log(double log_mag, int sign = 1) noexcept {
    return {sign, log_mag};
  }

  static SignedLogValue infinity(int sign = 1) noexcept {
    return {sign, std::numeric_limits<double>::infinity()};
  }

  static SignedLogValue from_double(double v) noexcept {
    if (v == 0.0) return zero();
    return {v > 0.0 ? 1 : -1, std::log(std::fabs(v))};
  }

  bool is_zero() const noexcept { return sign == 0; }
  bool is_infinite() const noexcept { return sign != 0 && std::isinf(log_mag) && log_mag > 0; }

  double to_double() const noexcept {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_mag);
  }

  /// Magnitude-only power; requires sign >= 0.
  SignedLogValue pow(double p) const noexcept {
    if (sign == 0) return p > 0 ? zero() : infinity();
    return {1, log_mag * p};
  }

  SignedLogValue abs() const noexcept { return {sign == 0 ? 0 : 1, log_mag}; }

  friend SignedLogValue operator-(SignedLogValue a) noexcept { return {-a.sign, a.log_mag}; }

  friend SignedLogValue operator*(SignedLogValue a, SignedLogValue b) noexcept {
    if (a.sign == 0 || b.sign == 0) return zero();
    return {a.sign * b.sign, a.log_mag + b.log_mag};
  }

  friend SignedLogValue operator/(SignedLogValue a, SignedLogValue b) noexcept {
    if (a.sign == 0) return zero();
    if (b.sign == 0) return infinity(a.sign);
    return {a.sign * b.sign, a.log_mag - b.log_mag};
  }

  // Signed log-sum-exp.
  friend SignedLogValue operator+(SignedLogValue a, SignedLogValue b) noexcept {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.log_mag < b.log_mag) std::swap(a, b);
    if (std::isinf(a.log_mag)) return a;
    const double d = std::exp(b.log_mag - a.log_mag);
    if (a.sign == b.sign) return {a.sign, a.log_mag + std::log1p(d)};
    if (d == 1.0) return zero();
    return {a.sign, a.log_mag + std::log1p(-d)};
  }

  friend SignedLogValue operator-(SignedLogValue a, SignedLogValue b) noexcept { return a + (-b); }

  friend std::ostream& operator<<(std::ostream& os, const SignedLogValue& v) {
    return os << (v.sign < 0 ? "-" : v.sign == 0 ? "0*" : "+") << "exp(" << v.log_mag << ")";
  }
};

}  // namespace realeig
