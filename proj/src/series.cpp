#include "realeig/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "realeig/errors.hpp"
#include "realeig/numerics/special.hpp"
#include "realeig/numerics/summation.hpp"

namespace realeig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093453;
constexpr long kMaxTerms = 50'000'000;

void check_lm(int L, int m) {
  if (L < 1) throw DomainError("series: L must be >= 1, got " + std::to_string(L));
  if (m < 1) throw DomainError("series: m must be >= 1, got " + std::to_string(m));
}

}  // namespace

SeriesParams SeriesParams::make(int N, int L, int m) {
  if (N < 2) throw DomainError("SeriesParams: N must be >= 2, got " + std::to_string(N));
  check_lm(L, m);
  SeriesParams p;
  p.N = N;
  p.L = L;
  p.m = m;
  p.gamma = static_cast<double>(L) / N;
  // 1 / (1 + L/N) formed as N / (N + L) to avoid a second rounding.
  p.alpha = static_cast<double>(N) / (static_cast<double>(N) + L);
  return p;
}

bool SeriesSum::precision_loss() const {
  if (log_max_partial == -kInf) return false;
  if (value.sign == 0) return true;
  return log_max_partial - 52.0 * std::numbers::ln2 > std::log(1e-6) + value.log_mag;
}

double SeriesSum::log_error_bound() const {
  if (log_max_partial == -kInf) return -kInf;
  return log_max_partial + std::log(static_cast<double>(std::max(1L, terms))) - 52.0 * std::numbers::ln2;
}

TruncatedSeries::TruncatedSeries(const SeriesParams& p) {
  log_coef_.resize(static_cast<std::size_t>(p.N - 1));
  double lbin = 0.0;  // ln C(L+n, n)
  for (std::size_t n = 0; n < log_coef_.size(); ++n) {
    if (n > 0) lbin += std::log1p(static_cast<double>(p.L) / static_cast<double>(n));
    log_coef_[n] = p.m * lbin;
  }
}

TruncatedSeries TruncatedSeries::ginibre(int N, int m) {
  if (N < 2) throw DomainError("f_gin_truncated: N must be >= 2");
  check_lm(1, m);
  TruncatedSeries s;
  s.log_coef_.resize(static_cast<std::size_t>(N - 1));
  double lfact = 0.0;
  for (std::size_t n = 0; n < s.log_coef_.size(); ++n) {
    if (n > 0) lfact += std::log(static_cast<double>(n));
    s.log_coef_[n] = -m * lfact;
  }
  return s;
}

SeriesSum TruncatedSeries::operator()(double x) const {
  SeriesSum out;
  out.terms = static_cast<long>(log_coef_.size());
  if (x == 0.0 || log_coef_.size() == 1) {
    out.value = SignedLogValue::from_log(0.0);
    out.log_max_partial = 0.0;
    return out;
  }
  const double lx = std::log(std::fabs(x));
  const bool alternating = x < 0.0;
  double top = -kInf;
  for (std::size_t n = 0; n < log_coef_.size(); ++n) top = std::max(top, log_coef_[n] + n * lx);
  NeumaierSum acc;
  for (std::size_t n = 0; n < log_coef_.size(); ++n) {
    const double term = std::exp(log_coef_[n] + n * lx - top);
    acc += (alternating && (n & 1U)) ? -term : term;
  }
  out.value = SignedLogValue::from_double(acc.value());
  out.value.log_mag += top;
  out.log_max_partial = std::log(acc.max_partial()) + top;
  return out;
}

SeriesSum f_truncated(double x, const SeriesParams& p) {
  if (!(std::fabs(x) <= 1.0)) throw DomainError("f_truncated: requires |x| <= 1, got " + std::to_string(x));
  return TruncatedSeries(p)(x);
}

SignedLogValue f_infinite(double x, int L, int m, double tol) {
  check_lm(L, m);
  if (!(std::fabs(x) < 1.0)) throw DomainError("f_infinite: requires |x| < 1, got " + std::to_string(x));
  if (!(tol > 0.0)) throw DomainError("f_infinite: tol must be positive");
  if (std::fabs(x) > 1.0 - 1e-6) {
    throw SlowConvergence("f_infinite: |x| = " + std::to_string(std::fabs(x)) + " too close to 1");
  }
  if (x == 0.0) return SignedLogValue::from_log(0.0);
  const double ax = std::fabs(x);
  const double lx = std::log(ax);
  const int sx = x < 0.0 ? -1 : 1;
  // Largest term sits where (1 + L/(n+1))^m |x| crosses 1.
  const double turn = std::max(0.0, L / std::expm1(-lx / m) - 1.0);
  const auto n_top = static_cast<std::int64_t>(std::floor(turn));
  const double scale =
      std::max(0.0, m * log_binomial(L + n_top, n_top) + static_cast<double>(n_top) * lx);
  NeumaierSum acc;
  double lbin = 0.0;
  int sign = 1;
  for (long n = 0; n < kMaxTerms; ++n) {
    if (n > 0) {
      lbin += std::log1p(static_cast<double>(L) / static_cast<double>(n));
      sign *= sx;
    }
    const double term = std::exp(m * lbin + n * lx - scale);
    acc += sign * term;
    const double ratio = std::exp(m * std::log1p(static_cast<double>(L) / (n + 1.0)) + lx);
    if (ratio < 1.0 && n >= n_top) {
      const double tail = term * ratio / (1.0 - ratio);
      if (tail <= tol * std::fabs(acc.value())) break;
    }
    if (n + 1 == kMaxTerms) throw SlowConvergence("f_infinite: term budget exhausted");
  }
  auto v = SignedLogValue::from_double(acc.value());
  v.log_mag += scale;
  return v;
}

SignedLogValue f_inf_asymptotic(double x, int L, int m) {
  check_lm(L, m);
  if (!(x > 0.0 && x < 1.0)) throw DomainError("f_inf_asymptotic: requires 0 < x < 1");
  const double lx = std::log(x);
  const double v = -(static_cast<double>(m) * L + 1.0) * std::log(-std::expm1(lx / m)) -
                   0.5 * (m - 1) * std::log(static_cast<double>(L)) - 0.5 * (m - 1) * kLog2Pi -
                   0.5 * std::log(static_cast<double>(m)) - (m - 1.0) / (2.0 * m) * lx;
  return SignedLogValue::from_log(v);
}

SignedLogValue e_nm(const SeriesParams& p) {
  const double g = p.gamma;
  const double N = p.N;
  const double m = p.m;
  const double v = -(m * g * N + 0.5 * m) * std::log(g) + (m * N * (1.0 + g) - 1.5 * m) * std::log1p(g) -
                   0.5 * m * (kLog2Pi + std::log(N));
  return SignedLogValue::from_log(v);
}

double f_decomposition_residual(double x, const SeriesParams& p, double omega) {
  if (!(omega > 0.0)) throw DomainError("f_decomposition_residual: omega must be positive");
  if (!(std::fabs(x) <= 1.0)) throw DomainError("f_decomposition_residual: requires |x| <= 1");
  const double lo = std::pow(p.alpha - omega, p.m);
  const double hi = std::pow(p.alpha + omega, p.m);
  if (p.alpha - omega > 0.0 && x > lo && x < hi) {
    throw DomainError("f_decomposition_residual: x inside the excluded window around alpha^m");
  }
  const auto exact = f_truncated(x, p).value;
  SignedLogValue predicted = SignedLogValue::zero();
  const bool inside = x > -hi && (p.alpha - omega > 0.0 ? x < lo : false);
  if (inside) predicted = f_infinite(x, p.L, p.m);
  if (x != 0.0) {
    const double am = std::pow(p.alpha, p.m);
    const int sx = (x < 0.0 && (p.N - 1) % 2 == 1) ? -1 : 1;
    const auto power = SignedLogValue::from_log((p.N - 1) * std::log(std::fabs(x)), sx);
    predicted = predicted + power / SignedLogValue::from_double(x - am) * e_nm(p);
  }
  const auto gap = exact - predicted;
  if (gap.sign == 0) return 0.0;
  return std::exp(gap.log_mag - exact.log_mag);
}

SeriesSum f_gin_truncated(double t, int N, int m) {
  if (!std::isfinite(t)) throw DomainError("f_gin_truncated: t must be finite");
  return TruncatedSeries::ginibre(N, m)(t);
}

SignedLogValue f_gin_infinite(double t, int m, double tol) {
  check_lm(1, m);
  if (!std::isfinite(t)) throw DomainError("f_gin_infinite: t must be finite");
  if (!(tol > 0.0)) throw DomainError("f_gin_infinite: tol must be positive");
  if (t == 0.0) return SignedLogValue::from_log(0.0);
  const double lt = std::log(std::fabs(t));
  const int st = t < 0.0 ? -1 : 1;
  // Largest term near n = |t|^{1/m}.
  const double n_top = std::floor(std::exp(lt / m));
  const double scale = std::max(0.0, n_top * lt - m * log_gamma(n_top + 1.0));
  NeumaierSum acc;
  double lfact = 0.0;
  int sign = 1;
  for (long n = 0; n < kMaxTerms; ++n) {
    if (n > 0) {
      lfact += std::log(static_cast<double>(n));
      sign *= st;
    }
    const double term = std::exp(n * lt - m * lfact - scale);
    acc += sign * term;
    const double ratio = std::exp(lt - m * std::log(n + 1.0));
    if (ratio < 0.5 && n >= n_top) {
      const double tail = term * ratio / (1.0 - ratio);
      if (tail <= tol * std::fabs(acc.value())) break;
    }
    if (n + 1 == kMaxTerms) throw SlowConvergence("f_gin_infinite: term budget exhausted");
  }
  auto v = SignedLogValue::from_double(acc.value());
  v.log_mag += scale;
  return v;
}

SignedLogValue f_gin_inf_asymptotic(double t, int m) {
  check_lm(1, m);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("f_gin_inf_asymptotic: requires finite t > 0");
  const double lt = std::log(t);
  const double v = -0.5 * (m - 1) * kLog2Pi - (m - 1.0) / (2.0 * m) * lt + m * std::exp(lt / m) -
                   0.5 * std::log(static_cast<double>(m));
  return SignedLogValue::from_log(v);
}

}  // namespace realeig
