#include "realeig/weights.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "realeig/cache.hpp"
#include "realeig/errors.hpp"
#include "realeig/numerics/special.hpp"
#include "realeig/parallel.hpp"

namespace realeig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kTableTol = 1e-12;
constexpr double kMassTol = 1e-6;
constexpr int kMaxNodes = 8192;

void check_params(int L, int m) {
  if (L < 1) throw DomainError("weight: L must be >= 1, got " + std::to_string(L));
  if (m < 1) throw DomainError("weight: m must be >= 1, got " + std::to_string(m));
}

// ln P with P = L / (2 B(L/2, 1/2)).
double log_prefactor(int L) { return std::log(L / 2.0) - log_beta(L / 2.0, 0.5); }

// ln (1 - e^{-2u}) for u >= 0.
double log_one_minus_exp2(double u) {
  if (u == 0.0) return -kInf;
  return std::log(-std::expm1(-2.0 * u));
}

// ln h_1 at t = -ln|y|.
double log_h1(double t, int L) {
  const double e = L / 2.0 - 1.0;
  if (e == 0.0) return 0.0;
  return e * log_one_minus_exp2(t);
}

// -ln|x| computed without cancellation near |x| = 1.
double minus_log_abs(double ax) { return ax < 0.5 ? -std::log(ax) : -std::log1p(ax - 1.0); }

SignedLogValue from_log_h(double log_h, int L, int m) {
  if (log_h == -kInf) return SignedLogValue::zero();
  if (log_h == kInf) return SignedLogValue::infinity();
  return SignedLogValue::from_log(0.5 * m * log_prefactor(L) + log_h);
}

QuadratureSpec table_spec() {
  QuadratureSpec s;
  s.rel_tol = kTableTol;
  s.max_depth = 14;
  s.rule = QuadratureRule::TanhSinh;
  return s;
}

}  // namespace

std::shared_ptr<const WeightTable> WeightTable::build(int L, int m, int nodes) {
  check_params(L, m);
  if (nodes < kInterpOrder) throw DomainError("WeightTable: need at least 4 nodes");
  std::shared_ptr<WeightTable> t(new WeightTable(L, m));
  if (m == 1) return t;
  t->below_ = get(L, m - 1);
  const double expected = m * log_beta(L / 2.0, 0.5);
  for (int n = nodes; n <= kMaxNodes; n *= 2) {
    const std::vector<std::int64_t> key{L, m, n};
    const std::vector<double> meta{kLambdaMax, kTableTol};
    if (auto data = cache_load("weights", key, meta); data && t->deserialize(*data)) return t;
    t->fill(n);
    const double mass = t->mass();
    if (std::fabs(std::log(mass) - expected) <= kMassTol) {
      cache_store({"weights", key, meta, t->serialize()});
      return t;
    }
  }
  throw NonConvergent("WeightTable: mass identity not met with " + std::to_string(kMaxNodes) + " nodes",
                      t->mass(), std::fabs(t->mass() - std::exp(expected)));
}

std::shared_ptr<const WeightTable> WeightTable::get(int L, int m) {
  check_params(L, m);
  static std::recursive_mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const WeightTable>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[{L, m}];
  if (!slot) slot = build(L, m);
  return slot;
}

std::vector<double> WeightTable::grid() const {
  std::vector<double> g(lambda_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[g.size() - 1 - i] = std::exp(-m_ * lambda_[i]);
  return g;
}

std::vector<SignedLogValue> WeightTable::log_values() const {
  std::vector<SignedLogValue> v(lambda_.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[v.size() - 1 - i] = SignedLogValue::from_log(log_h(m_ * lambda_[i]));
  }
  return v;
}

double WeightTable::log_ratio(double lambda) const {
  const int n = size();
  if (n == 0) return 0.0;
  // Invert lambda_j = lambda_max (1 - cos(pi j / (2 (n - 1)))).
  const double c = std::clamp(1.0 - lambda / kLambdaMax, -1.0, 1.0);
  const double pos = std::acos(c) * 2.0 * (n - 1) / kPi;
  int i = static_cast<int>(std::floor(pos)) - 1;
  i = std::clamp(i, 0, n - kInterpOrder);
  double acc = 0.0;
  for (int a = i; a < i + kInterpOrder; ++a) {
    double basis = 1.0;
    for (int b = i; b < i + kInterpOrder; ++b) {
      if (b != a) basis *= (lambda - lambda_[b]) / (lambda_[a] - lambda_[b]);
    }
    acc += basis * log_r_[a];
  }
  return acc;
}

double WeightTable::log_h(double t) const {
  if (m_ == 1) return log_h1(t, L_);
  if (t == kInf) return kInf;
  const double e = m_ * L_ / 2.0 - 1.0;
  const double lambda = t / m_;
  if (lambda > kLambdaMax) return direct_log_h(t);
  const double lr = log_ratio(lambda);
  if (e == 0.0) return lr;
  return lr + e * log_one_minus_exp2(lambda);
}

double WeightTable::direct_log_h(double t) const {
  const double e = m_ * L_ / 2.0 - 1.0;
  const double ref = e == 0.0 ? 0.0 : e * log_one_minus_exp2(t / m_);
  if (t == 0.0) {
    // Closed-form limit, see fill().
    return ref == -kInf ? -kInf : node_log_ratio(0);
  }
  const auto* below = below_.get();
  const int L = L_;
  const auto r = integrate_endpoint(
      [below, L, ref](double, double s, double rest) {
        return std::exp(below->log_h(rest) + log_h1(s, L) - ref);
      },
      0.0, t, table_spec());
  return std::log(2.0 * r.value) + ref;
}

void WeightTable::fill(int nodes) {
  lambda_.assign(static_cast<std::size_t>(nodes), 0.0);
  log_r_.assign(static_cast<std::size_t>(nodes), 0.0);
  for (int j = 0; j < nodes; ++j) {
    lambda_[j] = kLambdaMax * (1.0 - std::cos(kPi * j / (2.0 * (nodes - 1))));
  }
  // r at |x| = 1 from the leading endpoint behaviour of both factors:
  // a Beta integral of s^{L/2-1} (t-s)^{(m-1)L/2-1}.
  {
    const double a = L_ / 2.0;
    const double b = (m_ - 1) * L_ / 2.0;
    const int k = m_ - 1;
    log_r_[0] = std::log(2.0) + below_->log_ratio(0.0) + (a - 1.0) * std::log(2.0) +
                (b - 1.0) * std::log(2.0 / k) + log_beta(a, b) - (a + b - 1.0) * std::log(2.0 / m_);
  }
  const double e = m_ * L_ / 2.0 - 1.0;
  parallel_for(static_cast<std::size_t>(nodes - 1), [&](std::size_t idx) {
    const std::size_t j = idx + 1;
    const double lambda = lambda_[j];
    const double ref = e == 0.0 ? 0.0 : e * log_one_minus_exp2(lambda);
    log_r_[j] = direct_log_h(m_ * lambda) - ref;
  });
}

double WeightTable::mass() const {
  const double top = m_ * kLambdaMax;
  const std::array<double, 5> breaks{0.0, 1.0, 4.0, 16.0, top};
  const auto r = integrate_pieces(
      [this](double t, double, double) {
        const double lh = log_h(t);
        return lh == -kInf ? 0.0 : std::exp(lh - t);
      },
      breaks, table_spec());
  return 2.0 * r.value;
}

SignedLogValue WeightTable::weight_log_arg(double t) const {
  if (!(t >= 0.0) || std::isnan(t)) throw DomainError("weight: argument outside [-1, 1]");
  if (t == 0.0 && m_ == 1 && L_ < 2) throw DomainError("weight: diverges at |x| = 1 for L = 1");
  return from_log_h(log_h(t), L_, m_);
}

SignedLogValue WeightTable::weight_from_gap(double gap) const {
  if (!(gap >= 0.0 && gap <= 1.0)) throw DomainError("weight: gap outside [0, 1]");
  if (gap == 1.0) return weight_log_arg(kInf);
  return weight_log_arg(-std::log1p(-gap));
}

SignedLogValue WeightTable::weight(double x) const {
  if (!std::isfinite(x) || std::fabs(x) > 1.0) {
    throw DomainError("weight: x must lie in [-1, 1], got " + std::to_string(x));
  }
  const double ax = std::fabs(x);
  if (ax == 0.0) return weight_log_arg(kInf);
  return weight_log_arg(minus_log_abs(ax));
}

std::vector<double> WeightTable::serialize() const {
  std::vector<double> out;
  out.reserve(2 * lambda_.size());
  out.insert(out.end(), lambda_.begin(), lambda_.end());
  out.insert(out.end(), log_r_.begin(), log_r_.end());
  return out;
}

bool WeightTable::deserialize(const std::vector<double>& data) {
  if (data.size() < 2 * kInterpOrder || data.size() % 2 != 0) return false;
  const std::size_t n = data.size() / 2;
  lambda_.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
  log_r_.assign(data.begin() + static_cast<std::ptrdiff_t>(n), data.end());
  return true;
}

SignedLogValue weight_base(double x, int L) {
  check_params(L, 1);
  if (!std::isfinite(x) || std::fabs(x) > 1.0) {
    throw DomainError("weight_base: x must lie in [-1, 1], got " + std::to_string(x));
  }
  const double ax = std::fabs(x);
  if (ax == 1.0 && L < 2) throw DomainError("weight_base: diverges at |x| = 1 for L = 1");
  const double e = L / 2.0 - 1.0;
  const double half_log_p = 0.5 * log_prefactor(L);
  if (e == 0.0) return SignedLogValue::from_log(half_log_p);
  if (ax == 1.0) return SignedLogValue::zero();
  // 1 - x^2 = (1 - |x|)(1 + |x|), exact for |x| near 1.
  return SignedLogValue::from_log(half_log_p + e * (std::log1p(-ax) + std::log1p(ax)));
}

SignedLogValue weight_product(double x, int L, int m, const QuadratureSpec& spec) {
  spec.validate();
  if (m == 1) return weight_base(x, L);
  return WeightTable::get(L, m)->weight(x);
}

double log_weight_asymptotic_constant(int L, int m) {
  check_params(L, m);
  return std::log(0.5) + 0.5 * std::log(L / (kPi * m)) + 0.5 * m * (std::log(2.0 * kPi) - log_beta(L / 2.0, 0.5));
}

SignedLogValue weight_asymptotic(double x, int L, int m) {
  check_params(L, m);
  const double ax = std::fabs(x);
  if (!(ax > 0.0 && ax < 1.0)) throw DomainError("weight_asymptotic: requires 0 < |x| < 1");
  const double lx = std::log(ax);
  const double e = m * L / 2.0 - 1.0;
  double log_val = log_weight_asymptotic_constant(L, m) + (1.0 / m - 1.0) * lx;
  if (e != 0.0) log_val += e * std::log(-std::expm1(2.0 * lx / m));
  return SignedLogValue::from_log(log_val);
}

SignedLogValue weight_mellin(double x, int L, int m, const QuadratureSpec& spec) {
  check_params(L, m);
  if (m * L < 5) throw DomainError("weight_mellin: needs mL >= 5 for a convergent inversion");
  const double ax = std::fabs(x);
  if (!(ax > 0.0 && ax < 1.0)) throw DomainError("weight_mellin: requires 0 < |x| < 1");
  const double lx = std::log(ax);
  const double lg_half_l = log_gamma(L / 2.0);
  const auto r = contour_line_integral(
      [&](std::complex<double> s) {
        const auto lb = lg_half_l + log_gamma_ratio(0.5 * s, 0.0, L / 2.0);
        return 0.5 * std::exp(static_cast<double>(m) * lb - s * lx);
      },
      1.0, spec, {.conjugate_symmetric = true});
  const double h = r.value.real();
  if (!(h > 0.0)) throw NonConvergent("weight_mellin: non-positive inversion", h, r.err_est);
  return from_log_h(std::log(h), L, m);
}

namespace {

double log_bessel_k0(double a) {
  if (a < 600.0) return std::log(std::cyl_bessel_k(0.0, a));
  // Hankel expansion; terms beyond the third are below 1e-16 here.
  const double inv = 1.0 / (8.0 * a);
  const double series = 1.0 - inv + 9.0 * inv * inv / 2.0 - 225.0 * inv * inv * inv / 6.0;
  return 0.5 * std::log(kPi / (2.0 * a)) - a + std::log(series);
}

double log_ginibre(double a, int m, const QuadratureSpec& spec) {
  if (m == 1) return -0.5 * a * a;
  if (a == 0.0) return kInf;
  if (m == 2) return std::log(2.0) + log_bessel_k0(a);
  // g_m(a) = 2 int g_{m-1}(a e^{-s}) exp(-e^{2s}/2) ds over the real line.
  const int k = m - 1;
  const double ref = -0.5 * m * std::pow(a, 2.0 / m);
  const double t_big = std::pow(1600.0 / k, 0.5 * k);
  const double s_lo = std::log(a) - std::log(t_big);
  const double s_hi = 0.5 * std::log(1600.0);
  const double s_peak = std::log(a) / m;
  std::vector<double> breaks{s_lo};
  if (s_peak > s_lo && s_peak < s_hi) breaks.push_back(s_peak);
  breaks.push_back(s_hi);
  const auto r = integrate_pieces(
      [&](double s, double, double) {
        return std::exp(log_ginibre(a * std::exp(-s), k, spec) - 0.5 * std::exp(2.0 * s) - ref);
      },
      breaks, spec);
  return std::log(2.0 * r.value) + ref;
}

}  // namespace

SignedLogValue ginibre_weight(double t, int m, const QuadratureSpec& spec) {
  check_params(1, m);
  spec.validate();
  if (!std::isfinite(t)) throw DomainError("ginibre_weight: t must be finite");
  const double lv = log_ginibre(std::fabs(t), m, spec);
  if (lv == kInf) return SignedLogValue::infinity();
  if (lv == -kInf) return SignedLogValue::zero();
  return SignedLogValue::from_log(lv);
}

SignedLogValue ginibre_weight_asymptotic(double x, int N, int m) {
  check_params(1, m);
  if (N < 1) throw DomainError("ginibre_weight_asymptotic: N must be positive");
  const double ax = std::fabs(x);
  if (!(ax > 0.0) || !std::isfinite(ax)) throw DomainError("ginibre_weight_asymptotic: requires finite x != 0");
  const double lx = std::log(ax);
  const double v = -0.5 * (m - 1) * std::log(static_cast<double>(N)) - 0.5 * N * m * std::exp(2.0 * lx / m) +
                   0.5 * (m - 1) * std::log(4.0 * kPi) - 0.5 * std::log(static_cast<double>(m)) -
                   (m - 1.0) / m * lx;
  return SignedLogValue::from_log(v);
}

}  // namespace realeig
