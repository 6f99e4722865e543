#pragma once

#include <complex>
#include <cstdint>

namespace realeig {

/// ln Gamma(x) for finite x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// Principal branch of ln Gamma(z) (analytic on C minus the non-positive
/// real axis, conjugate symmetric). Lanczos series for Re z >= 1/2,
/// upward recurrence for moderately negative Re z and reflection beyond.
/// Throws DomainError within 1e-6 of a pole.
std::complex<double> log_gamma_complex(std::complex<double> z);

/// ln Gamma(z + a) - ln Gamma(z + b), modulo 2 pi i. Stays accurate for
/// |Im z| far beyond the range where the two log-gammas could be
/// subtracted directly.
std::complex<double> log_gamma_ratio(std::complex<double> z, double a, double b);

/// ln B(a, b) for a, b > 0.
double log_beta(double a, double b);

/// ln C(n, k) for 0 <= k <= n.
double log_binomial(std::int64_t n, std::int64_t k);

}  // namespace realeig
