#pragma once

#include <vector>

#include "realeig/numerics/signed_log.hpp"

namespace realeig {

/// (N, L, m) with gamma = L / N and alpha = 1 / (1 + gamma).
struct SeriesParams {
  int N = 2;
  int L = 1;
  int m = 1;
  double gamma = 0.5;
  double alpha = 2.0 / 3.0;

  /// Validates N >= 2, L >= 1, m >= 1 and fills gamma, alpha.
  static SeriesParams make(int N, int L, int m);
};

/// Result of a compensated series evaluation. The rounding error of the
/// linear-space accumulation is bounded by terms * 2^-52 * max partial sum.
struct SeriesSum {
  SignedLogValue value;
  double log_max_partial = -1.0 / 0.0;
  long terms = 0;

  /// True when max_partial * 2^-52 > 1e-6 |value|: cancellation has eaten
  /// more than six of the sixteen digits.
  bool precision_loss() const;
  /// ln of an absolute error bound on value.
  double log_error_bound() const;
};

/// sum_{n=0}^{N-2} C(L+n, n)^m x^n for |x| <= 1.
SeriesSum f_truncated(double x, const SeriesParams& p);

/// f_truncated with the log-coefficients precomputed, for repeated
/// evaluation inside integrands. Thread-safe after construction.
class TruncatedSeries {
 public:
  explicit TruncatedSeries(const SeriesParams& p);
  SeriesSum operator()(double x) const;
  /// Same for the Ginibre coefficients 1 / (n!)^m.
  static TruncatedSeries ginibre(int N, int m);

 private:
  TruncatedSeries() = default;
  std::vector<double> log_coef_;
};

/// sum_{n>=0} C(L+n, n)^m x^n for |x| < 1. Stops once the term ratio has
/// fallen below one and the geometric tail bound is below tol * |sum|.
/// Throws SlowConvergence for |x| > 1 - 1e-6.
SignedLogValue f_infinite(double x, int L, int m, double tol = 1e-15);

/// Large-L form (1 - x^{1/m})^{-mL-1} L^{-(m-1)/2} (2 pi)^{-(m-1)/2}
/// m^{-1/2} x^{-(m-1)/(2m)} for 0 < x < 1.
SignedLogValue f_inf_asymptotic(double x, int L, int m);

/// gamma^{-m gamma N - m/2} (1 + gamma)^{m N (1 + gamma) - 3m/2} (2 pi N)^{-m/2}.
SignedLogValue e_nm(const SeriesParams& p);

/// Relative gap between f_truncated and the two-term split
///   f_infinite(x) 1{-(alpha+omega)^m < x < (alpha-omega)^m}
///     + x^{N-1} / (x - alpha^m) e_nm.
/// Throws DomainError for x inside ((alpha-omega)^m, (alpha+omega)^m).
double f_decomposition_residual(double x, const SeriesParams& p, double omega);

/// sum_{n=0}^{N-2} t^n / (n!)^m, with t = N^m x already scaled.
SeriesSum f_gin_truncated(double t, int N, int m);

/// sum_{n>=0} t^n / (n!)^m; m = 1 gives e^t.
SignedLogValue f_gin_infinite(double t, int m, double tol = 1e-15);

/// (2 pi)^{-(m-1)/2} t^{-(m-1)/(2m)} e^{m t^{1/m}} / sqrt(m) for t > 0.
SignedLogValue f_gin_inf_asymptotic(double t, int m);

}  // namespace realeig
