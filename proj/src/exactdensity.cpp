#include "realeig/exactdensity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "realeig/errors.hpp"
#include "realeig/numerics/special.hpp"
#include "realeig/parallel.hpp"
#include "realeig/weights.hpp"

namespace realeig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kLossTol = 1e-6;

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void check_exact_range(const SeriesParams& p) {
  if (p.N > kExactMaxN || p.L > kExactMaxL) {
    throw PrecisionLoss("exact density: (N, L) = (" + std::to_string(p.N) + ", " + std::to_string(p.L) +
                        ") is outside the double-precision envelope N, L <= 256; use the sum or asymptotic route");
  }
}

QuadratureSpec singular_rule(QuadratureSpec spec) {
  spec.rule = QuadratureRule::TanhSinh;
  return spec;
}

// Interior breaks of [lo, hi]: kinks, the origin and the points where
// x y crosses the transition band (centre +- omega)^m.
std::vector<double> breaks_for(double x, double lo, double hi, double centre, int N, int m) {
  std::vector<double> b{lo, hi};
  auto add = [&](double v) {
    if (v > lo && v < hi) b.push_back(v);
  };
  add(0.0);
  add(x);
  if (x != 0.0) {
    const double omega = 1.0 / std::sqrt(static_cast<double>(N));
    for (double c : {centre - omega, centre, centre + omega}) {
      if (c <= 0.0) continue;
      const double y = std::pow(c, m) / std::fabs(x);
      add(y);
      add(-y);
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// Largest series round-off bound and largest integrand magnitude seen.
struct LossTracker {
  double max_err = 0.0;
  double max_abs = 0.0;

  double note(double err, double value) {
    max_err = std::max(max_err, err);
    max_abs = std::max(max_abs, std::fabs(value));
    return value;
  }
};

// Shared integrand machinery for S and rho on [-1, 1].
struct TruncatedIntegrand {
  const WeightTable* table;
  const TruncatedSeries* series;
  double x1;
  double log_wx;
  LossTracker* loss;

  // Returns exp(log w(y) + log w(x1) + log f(x1 y)) with the sign of f, times
  // the algebraic factor supplied by the caller.
  double operator()(double y, double from_lo, double to_hi, double factor) const {
    if (factor == 0.0) return 0.0;
    const auto wy = std::fabs(y) < 0.5 ? table->weight(y) : table->weight_from_gap(std::min(from_lo, to_hi));
    if (wy.is_zero()) return 0.0;
    const auto f = (*series)(x1 * y);
    const double base = std::log(std::fabs(factor)) + log_wx + wy.log_mag;
    const double err = std::exp(base + f.log_error_bound());
    if (f.value.is_zero()) return loss->note(err, 0.0);
    return loss->note(err, (factor < 0.0 ? -1.0 : 1.0) * f.value.sign * std::exp(base + f.value.log_mag));
  }
};

// The series round-off is judged against the result or, when the integral
// itself cancels, against the integrand scale.
ExactValue finish(const QuadratureResult& r, const LossTracker& t, double width, const char* what) {
  const double loss = t.max_err * width;
  if (loss > kLossTol * std::max(std::fabs(r.value), t.max_abs * width)) {
    throw PrecisionLoss(std::string(what) + ": series cancellation error bound " + fmt_g(loss) +
                        " exceeds 1e-6 of the result " + fmt_g(r.value));
  }
  return {r.value, r.err_est + loss};
}

// For odd N the monomial x^{N-1} is left unpaired by the skew-orthogonal
// pairing. The kernel is then the even-size kernel built from f_{N-3} plus
// a rank-one term
//   C w(x1) [x1^{N-1} int_0^{|x2|} w y^{N-2} - x1^{N-2} int_0^{x2} w y^{N-1}]
// with C = 2 b_{N-3} mu_{N-3} / mu_{N-1}, b_n = C(L+n, n)^m and
// mu_k = int w y^k. The identity C mu_{N-1} int_0^1 w y^{N-2} = 1 has
// already been used to drop the x1^{N-1} term.
class OddCorrection {
 public:
  OddCorrection(const WeightTable* table, const SeriesParams& p, const QuadratureSpec& spec)
      : table_(table), N_(p.N), spec_(singular_rule(spec)) {
    const int n = p.N - 3;
    const double half_l = 0.5 * p.L;
    log_c_ = std::log(2.0) +
             p.m * (log_binomial(p.L + n, n) + log_beta(0.5 * (n + 1), half_l) - log_beta(0.5 * (n + 3), half_l));
  }

  // Rank-one part of S(x1, x2).
  ExactValue kernel(double x1, SignedLogValue wx1, double x2) const {
    const double a = std::fabs(x2);
    if (a == 0.0 || x1 == 0.0) return {0.0, 0.0};
    const auto lo = moment(a, 0);
    const auto hi = moment(a, 1);
    const double s = (x1 < 0.0) == (x2 < 0.0) ? 1.0 : -1.0;
    const double scale =
        std::exp(log_c_ + wx1.log_mag + (N_ - 2) * (std::log(std::fabs(x1)) + std::log(a)));
    return {scale * (std::fabs(x1) * lo.value - s * a * hi.value),
            scale * (std::fabs(x1) * lo.err_est + a * hi.err_est)};
  }

  // Rank-one part of rho(x): C w(x) |x|^{N-2} int_0^{|x|} w y^{N-2} (|x| - y) dy.
  ExactValue density(double x, SignedLogValue wx) const {
    const double a = std::fabs(x);
    if (a == 0.0) return {0.0, 0.0};
    const auto r = moment(a, -1);
    const double scale = std::exp(log_c_ + wx.log_mag + (2 * N_ - 3) * std::log(a));
    return {scale * r.value, scale * r.err_est};
  }

 private:
  // int_0^a w(y) (y/a)^{N-2} g(y/a) dy with g = 1, u, or 1 - u for
  // extra = 0, 1, -1.
  ExactValue moment(double a, int extra) const {
    const double gap_a = 1.0 - a;
    const auto r = integrate_pieces(
        [&](double y, double from_lo, double to_hi) {
          if (from_lo == 0.0) return 0.0;
          const double u = from_lo / a;
          const auto w = y < 0.5 ? table_->weight(y) : table_->weight_from_gap(gap_a + to_hi);
          if (w.is_zero()) return 0.0;
          const double g = extra == 0 ? 1.0 : (extra > 0 ? u : to_hi / a);
          return g * std::exp(w.log_mag + (N_ - 2) * std::log(u));
        },
        std::vector<double>{0.0, a}, spec_);
    return {r.value, r.err_est};
  }

  const WeightTable* table_;
  int N_;
  QuadratureSpec spec_;
  double log_c_ = 0.0;
};

SeriesParams paired_params(const SeriesParams& p) {
  return p.N % 2 == 0 ? p : SeriesParams::make(p.N - 1, p.L, p.m);
}

}  // namespace

QuadratureSpec default_inner_spec() {
  QuadratureSpec s;
  s.rel_tol = 1e-11;
  s.rule = QuadratureRule::TanhSinh;
  return s;
}

double kernel_S(double x1, double x2, const SeriesParams& p, const QuadratureSpec& spec) {
  if (!(std::fabs(x1) < 1.0) || !(std::fabs(x2) < 1.0)) throw DomainError("kernel_S: requires x1, x2 in (-1, 1)");
  check_exact_range(p);
  const auto table = WeightTable::get(p.L, p.m);
  const auto wx = table->weight(x1);
  if (wx.is_infinite()) throw DomainError("kernel_S: weight is infinite at x1 = 0 for m > 1");
  if (wx.is_zero()) return 0.0;
  const TruncatedSeries series(paired_params(p));
  LossTracker loss;
  const TruncatedIntegrand g{table.get(), &series, x1, wx.log_mag, &loss};
  auto br = breaks_for(x1, -1.0, 1.0, p.alpha, p.N, p.m);
  if (x2 > -1.0 && x2 < 1.0) br.push_back(x2);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  const auto r = integrate_pieces(
      [&](double y, double da, double db) {
        const double sgn = y < x2 ? 1.0 : (y > x2 ? -1.0 : 0.0);
        return g(y, da, db, (x1 - y) * sgn);
      },
      br, singular_rule(spec));
  const double even = finish(r, loss, 2.0, "kernel_S").value;
  if (p.N % 2 == 0) return even;
  return even + OddCorrection(table.get(), p, spec).kernel(x1, wx, x2).value;
}

namespace {

// rho at x with gap = 1 - |x| supplied exactly by the caller.
ExactValue density_at(double x, double gap, const SeriesParams& p, const QuadratureSpec& spec) {
  if (x == 0.0 && p.m > 1) throw DomainError("density_rho: infinite at x = 0 for m > 1");
  check_exact_range(p);
  const auto table = WeightTable::get(p.L, p.m);
  const auto wx = std::fabs(x) < 0.5 ? table->weight(x) : table->weight_from_gap(gap);
  if (wx.is_zero()) return {0.0, 0.0};
  const TruncatedSeries series(paired_params(p));
  LossTracker loss;
  const TruncatedIntegrand g{table.get(), &series, x, wx.log_mag, &loss};
  const auto br = breaks_for(x, -1.0, 1.0, p.alpha, p.N, p.m);
  const auto r = integrate_pieces([&](double y, double da, double db) { return g(y, da, db, std::fabs(x - y)); },
                                  br, singular_rule(spec));
  const auto even = finish(r, loss, 2.0, "density_rho");
  if (p.N % 2 == 0) return even;
  const auto odd = OddCorrection(table.get(), p, spec).density(x, wx);
  return {even.value + odd.value, even.err_est + odd.err_est};
}

}  // namespace

ExactValue density_rho_detail(double x, const SeriesParams& p, const QuadratureSpec& spec) {
  if (!(std::fabs(x) <= 1.0)) throw DomainError("density_rho: requires |x| <= 1");
  return density_at(x, 1.0 - std::fabs(x), p, spec);
}

double density_rho(double x, const SeriesParams& p, const QuadratureSpec& spec) {
  return density_rho_detail(x, p, spec).value;
}

ExactValue density_cell_integral(double a, double b, const SeriesParams& p, const QuadratureSpec& spec) {
  if (!(a < b) || a < -1.0 || b > 1.0) throw DomainError("density_cell_integral: need -1 <= a < b <= 1");
  const auto inner = default_inner_spec();
  double inner_err = 0.0;
  std::vector<double> br{a, b};
  if (a < 0.0 && b > 0.0) br.insert(br.begin() + 1, 0.0);
  const auto r = integrate_pieces(
      [&](double x, double from_lo, double to_hi) {
        if (x == 0.0) return 0.0;
        const double gap = x < 0.0 ? from_lo + (1.0 + a) : to_hi + (1.0 - b);
        const auto v = density_at(x, gap, p, inner);
        inner_err = std::max(inner_err, v.err_est);
        return v.value;
      },
      br, singular_rule(spec));
  return {r.value, r.err_est + inner_err * (b - a)};
}

ExactValue expected_real_quadrature(const SeriesParams& p, const QuadratureSpec& spec) {
  check_exact_range(p);
  const auto inner = default_inner_spec();
  double inner_err = 0.0;
  std::vector<double> br{0.0, 1.0};
  const double edge = std::pow(p.alpha, 0.5 * p.m);
  if (edge > 0.0 && edge < 1.0) br.insert(br.begin() + 1, edge);
  const auto r = integrate_pieces(
      [&](double x, double, double to_hi) {
        if (x == 0.0) return 0.0;
        const auto v = density_at(x, to_hi, p, inner);
        inner_err = std::max(inner_err, v.err_est);
        return v.value;
      },
      br, singular_rule(spec));
  return {2.0 * r.value, 2.0 * (r.err_est + inner_err)};
}

double limiting_density(double x, int m, double alpha_t) {
  if (m < 1) throw DomainError("limiting_density: m must be >= 1");
  if (!(alpha_t > 0.0 && alpha_t < 1.0)) throw DomainError("limiting_density: alpha must lie in (0, 1)");
  if (!(std::fabs(x) <= 1.0)) throw DomainError("limiting_density: requires |x| <= 1");
  if (x == 0.0) throw DomainError("limiting_density: x = 0 is excluded");
  const double ax = std::fabs(x);
  const double u = std::pow(ax, 1.0 / m);
  if (!(u < std::sqrt(alpha_t))) return 0.0;
  return std::pow(ax, 1.0 / m - 1.0) / ((1.0 - u * u) * 2.0 * m * std::atanh(std::sqrt(alpha_t)));
}

double limiting_mass(double a, double b, int m, double alpha_t) {
  if (m < 1) throw DomainError("limiting_mass: m must be >= 1");
  if (!(alpha_t > 0.0 && alpha_t < 1.0)) throw DomainError("limiting_mass: alpha must lie in (0, 1)");
  if (!(a <= b)) throw DomainError("limiting_mass: need a <= b");
  // In u = |x|^{1/m} the density is 1 / (2 A (1 - u^2)), A = artanh(sqrt(alpha)).
  const double cap = std::sqrt(alpha_t);
  const double norm = 2.0 * std::atanh(cap);
  auto signed_cdf = [&](double x) {
    const double u = std::min(std::pow(std::fabs(x), 1.0 / m), cap);
    return std::copysign(std::atanh(u) / norm, x);
  };
  return signed_cdf(b) - signed_cdf(a);
}

double asympt_expected(int N, int L, int m) {
  if (N < 1 || L < 1 || m < 1) throw DomainError("asympt_expected: N, L, m must be positive");
  const double gamma = static_cast<double>(L) / N;
  const double alpha = static_cast<double>(N) / (static_cast<double>(N) + L);
  return std::sqrt(2.0 * m * gamma * N / kPi) * std::atanh(std::sqrt(alpha));
}

double gin_asympt_expected(int N, int m) {
  if (N < 1 || m < 1) throw DomainError("gin_asympt_expected: N and m must be positive");
  return std::sqrt(2.0 * N * m / kPi);
}

double gin_limiting_density(double x, int m) {
  if (m < 1) throw DomainError("gin_limiting_density: m must be >= 1");
  if (x == 0.0 || !std::isfinite(x)) throw DomainError("gin_limiting_density: x must be finite and non-zero");
  const double ax = std::fabs(x);
  if (ax >= 1.0) return 0.0;
  return std::pow(ax, 1.0 / m - 1.0) / (2.0 * m);
}

double gin_limiting_mass(double a, double b, int m) {
  if (m < 1) throw DomainError("gin_limiting_mass: m must be >= 1");
  if (!(a <= b)) throw DomainError("gin_limiting_mass: need a <= b");
  auto signed_cdf = [&](double x) { return std::copysign(std::min(std::pow(std::fabs(x), 1.0 / m), 1.0) / 2.0, x); };
  return signed_cdf(b) - signed_cdf(a);
}

namespace {

void check_gin(int N, int m) {
  if (N < 2 || N % 2 != 0) {
    throw DomainError("Ginibre exact formula is available for even N >= 2 only, got N=" + std::to_string(N));
  }
  if (m < 1) throw DomainError("Ginibre exact formula: m must be >= 1");
}

// Half-width in x beyond which the Ginibre integrand is below e^{-40}
// relative to its diagonal, for a point at u = |x|^{1/m}.
double gin_reach(double u, int N, int m) {
  return std::pow(std::max(1.0, u) + std::sqrt(80.0 / (static_cast<double>(N) * m)), m);
}

}  // namespace

ExactValue gin_density_rho(double x, int N, int m, const QuadratureSpec& spec) {
  check_gin(N, m);
  if (!std::isfinite(x)) throw DomainError("gin_density_rho: x must be finite");
  if (x == 0.0 && m > 1) throw DomainError("gin_density_rho: infinite at x = 0 for m > 1");
  const double scale_w = std::pow(static_cast<double>(N), 0.5 * m);
  const double scale_f = std::pow(static_cast<double>(N), m);
  const double log_pre = 1.5 * m * std::log(static_cast<double>(N)) - m * std::log(2.0 * std::sqrt(2.0 * kPi));
  const auto wx = ginibre_weight(scale_w * x, m);
  if (wx.is_zero()) return {0.0, 0.0};
  const auto series = TruncatedSeries::ginibre(N, m);
  const double reach = gin_reach(std::pow(std::fabs(x), 1.0 / m), N, m);
  const auto br = breaks_for(x, -reach, reach, 1.0, N, m);
  LossTracker loss;
  const auto r = integrate_pieces(
      [&](double y, double, double) {
        const double d = std::fabs(x - y);
        if (d == 0.0) return 0.0;
        const auto wy = ginibre_weight(scale_w * y, m);
        if (wy.is_zero()) return 0.0;
        const auto f = series(scale_f * x * y);
        const double base = log_pre + std::log(d) + wx.log_mag + wy.log_mag;
        const double err = std::exp(base + f.log_error_bound());
        if (f.value.is_zero()) return loss.note(err, 0.0);
        return loss.note(err, f.value.sign * std::exp(base + f.value.log_mag));
      },
      br, singular_rule(spec));
  return finish(r, loss, 2.0 * reach, "gin_density_rho");
}

ExactValue gin_expected_real_quadrature(int N, int m, const QuadratureSpec& spec) {
  check_gin(N, m);
  const auto inner = default_inner_spec();
  const double reach = gin_reach(1.0, N, m);
  double inner_err = 0.0;
  const std::vector<double> br{0.0, 1.0, reach};
  const auto r = integrate_pieces(
      [&](double x, double, double) {
        if (x == 0.0) return 0.0;
        const auto v = gin_density_rho(x, N, m, inner);
        inner_err = std::max(inner_err, v.err_est);
        return v.value;
      },
      br, singular_rule(spec));
  return {2.0 * r.value, 2.0 * (r.err_est + inner_err)};
}

DensityCurve exact_density_curve(const EnsembleSpec& ensemble, const std::vector<double>& abscissae, bool normalize,
                                 const QuadratureSpec& spec) {
  ensemble.validate();
  DensityCurve c;
  c.ensemble = ensemble;
  c.abscissae = abscissae;
  c.values.assign(abscissae.size(), 0.0);
  c.normalized = normalize;
  const bool gin = ensemble.kind == EnsembleKind::RealGinibre;
  const SeriesParams p = gin ? SeriesParams{} : SeriesParams::make(ensemble.N, ensemble.L, ensemble.m);
  if (gin) check_gin(ensemble.N, ensemble.m);
  parallel_for(abscissae.size(), [&](std::size_t i) {
    const double x = abscissae[i];
    c.values[i] = gin ? gin_density_rho(x, ensemble.N, ensemble.m).value : density_rho(x, p);
  });
  if (normalize) {
    const double e = gin ? gin_expected_real_quadrature(ensemble.N, ensemble.m, spec).value
                         : expected_real_quadrature(p, spec).value;
    for (auto& v : c.values) v /= e;
  }
  return c;
}

}  // namespace realeig
