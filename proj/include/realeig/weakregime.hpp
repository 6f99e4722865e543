#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "realeig/exactdensity.hpp"
#include "realeig/numerics/quadrature.hpp"
#include "realeig/rng.hpp"

namespace realeig {

/// One Meijer-G coefficient g_j for fixed (L, m). value and err_est
/// underflow for large L; log_value and rel_err stay representable.
struct GjValue {
  int j = 0;
  int L = 1;
  int m = 1;
  double value = 0.0;
  double log_value = 0.0;
  double err_est = 0.0;
  double rel_err = 0.0;
};

/// Mean and standard error of a Monte Carlo estimate.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
  /// Fraction of samples with a nonzero statistic.
  double acceptance = 0.0;
};

/// Accuracy used for g_j when the caller does not pass a spec.
QuadratureSpec default_gj_spec();

/// g_j = (1 / 2 pi i) int [G(1/2+s) G(j+1-s) / (G((L+1)/2+s) G(L/2+1+j-s))]^m
///       ds / (ceil(j/2) - s)
/// along the vertical line through the minimum of the integrand on the real
/// segment (-1/2, ceil(j/2)). The integrand is scaled by that minimum so
/// the tolerances are relative for every j.
GjValue g_j_contour(int j, int L, int m, const QuadratureSpec& spec = default_gj_spec());

/// The same coefficient from the 2m-dimensional real integral over
/// [0,1]^{2m}, with t and r drawn from their Beta marginals so only the
/// indicator prod r > prod t is random. Deterministic in (seed, stream).
McEstimate g_j_mc(int j, int L, int m, long n_samples, std::uint64_t seed, std::uint64_t stream = 0);

/// (1/2) (G(j+1) / G(j+1+L/2))^{2m}: the symmetric part of g_{2j}.
double g_j_sym(int j, int L, int m);

/// mL/8 + (1/2) G(mL) / G(mL/2)^2 2^{-mL}.
double a_lm_closed(int L, int m);

/// A_{L,m} by sampling t, r ~ Gamma(L/2, 1) and averaging
/// (sum t / 2) 1{sum r < sum t}. With symmetry_baseline the weight sum t / 2
/// is replaced by 1/2, whose mean is 1/4.
McEstimate a_lm_mc(int L, int m, long n_samples, std::uint64_t seed, bool symmetry_baseline = false);

/// Large-j forms of (g_{2j}, g_{2j+1}): g_j_sym(j) +- A_{L,m} / j^{mL+1}.
std::pair<double, double> g_j_even_odd_asy(int j, int L, int m);

/// Growable, thread-safe table of g_0 .. g_{n-1} for one (L, m). New
/// entries are computed in parallel and written to the cache.
class GjTable {
 public:
  static std::shared_ptr<GjTable> get(int L, int m);

  /// Values for j < count, extending the table if needed.
  std::vector<GjValue> values(int count);

  int L() const { return L_; }
  int m() const { return m_; }

 private:
  GjTable(int L, int m) : L_(L), m_(m) {}
  void extend(int count);

  int L_;
  int m_;
  std::mutex mutex_;
  std::vector<GjValue> entries_;
  bool cache_checked_ = false;
};

/// (L Gamma(L/2) Gamma((L+1)/2) / (2 sqrt(pi)))^m.
double q_lm(int L, int m);

/// E(N_R) = 2 q_{L,m} sum_{j=0}^{N-2} C(L+j, L)^m (-1)^j g_j, summed in
/// adjacent (2j, 2j+1) pairs with compensation. For odd N one is added:
/// the alternating sum accounts only for the paired part of the spectrum
/// (checked against the odd-N quadrature route).
ExactValue expected_real_sum(int N, int L, int m);

/// log(N) / B(mL/2, 1/2).
double weak_asymptotic(int N, int L, int m);
/// 1 / B(mL/2, 1/2).
double weak_coefficient(int L, int m);

/// 2 q_{L,m} 2^{mL} / (L!)^m (2 A_{L,m} - mL/4), the coefficient of log N
/// obtained before simplification; equals weak_coefficient(L, m).
double weak_coefficient_from_alm(int L, int m);

}  // namespace realeig
