#include "realeig/weakregime.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "realeig/cache.hpp"
#include "realeig/errors.hpp"
#include "realeig/numerics/special.hpp"
#include "realeig/numerics/summation.hpp"
#include "realeig/parallel.hpp"

namespace realeig {

namespace {

using cplx = std::complex<double>;

constexpr long kMcBlock = 1L << 14;

void check_lm(int L, int m, const char* what) {
  if (L < 1 || m < 1) {
    throw DomainError(std::string(what) + ": requires L >= 1 and m >= 1, got L=" + std::to_string(L) +
                      " m=" + std::to_string(m));
  }
}

int half_up(int j) { return (j + 1) / 2; }

// Streams of one estimator never overlap: the key mixes seed and stream,
// the counter is the block index.
std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Count, mean and sum of squared deviations, merged with Chan's formula.
struct Moments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  long nonzero = 0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
    if (x != 0.0) ++nonzero;
  }

  static Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    Moments r;
    r.n = a.n + b.n;
    const double d = b.mean - a.mean;
    const double nb = static_cast<double>(b.n) / static_cast<double>(r.n);
    r.mean = a.mean + d * nb;
    r.m2 = a.m2 + b.m2 + d * d * static_cast<double>(a.n) * nb;
    r.nonzero = a.nonzero + b.nonzero;
    return r;
  }
};

Moments pairwise_merge(const std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return Moments::merge(pairwise_merge(parts, lo, mid), pairwise_merge(parts, mid, hi));
}

// Runs sample(rng) n times in fixed blocks and reduces in a fixed tree, so
// the result does not depend on the thread count.
template <typename Sample>
McEstimate block_monte_carlo(long n, std::uint64_t seed, std::uint64_t stream, Sample sample) {
  const long blocks = (n + kMcBlock - 1) / kMcBlock;
  std::vector<Moments> parts(static_cast<std::size_t>(blocks));
  const std::uint64_t key = mix_key(seed, stream);
  parallel_for(parts.size(), [&](std::size_t b) {
    Philox4x32 rng(key, b);
    const long count = std::min(kMcBlock, n - static_cast<long>(b) * kMcBlock);
    Moments acc;
    for (long i = 0; i < count; ++i) acc.add(sample(rng));
    parts[b] = acc;
  });
  const Moments all = pairwise_merge(parts, 0, parts.size());
  McEstimate est;
  est.samples = all.n;
  est.mean = all.mean;
  est.std_error = all.n > 1 ? std::sqrt(all.m2 / static_cast<double>(all.n - 1) / static_cast<double>(all.n)) : 0.0;
  est.acceptance = static_cast<double>(all.nonzero) / static_cast<double>(all.n);
  return est;
}

double log_beta_draw(std::gamma_distribution<double>& ga, std::gamma_distribution<double>& gb, Philox4x32& rng) {
  const double x = ga(rng);
  const double y = gb(rng);
  return std::log(x) - std::log(x + y);
}

std::vector<double> flatten(const std::vector<GjValue>& v) {
  std::vector<double> out;
  out.reserve(3 * v.size());
  for (const auto& g : v) {
    out.push_back(g.value);
    out.push_back(g.log_value);
    out.push_back(g.rel_err);
  }
  return out;
}

}  // namespace

QuadratureSpec default_gj_spec() {
  QuadratureSpec s;
  s.rel_tol = 1e-13;
  return s;
}

GjValue g_j_contour(int j, int L, int m, const QuadratureSpec& spec) {
  if (j < 0) throw DomainError("g_j_contour: requires j >= 0");
  check_lm(L, m, "g_j_contour");
  const double pole = half_up(j);
  const double a_top = 0.5 * (L + 1);
  const double b_top = 0.5 * L + 1.0 + j;
  auto log_f = [&](cplx s) {
    return static_cast<double>(m) * (log_gamma_ratio(s, 0.5, a_top) + log_gamma_ratio(-s, j + 1.0, b_top)) -
           std::log(pole - s);
  };
  // On the real axis between the poles -1/2 and ceil(j/2) the integrand is
  // positive and log-convex, and every vertical line is bounded by its value
  // there. Integrating through the minimum (the saddle point) removes the
  // oscillation that otherwise cancels the result down to round-off for
  // large j and L.
  const double lo = -0.5, hi = pole;
  const double pad = 1e-6 * (hi - lo);
  const auto [line, log_scale] = boost::math::tools::brent_find_minima(
      [&](double c) { return log_f(cplx(c, 0.0)).real(); }, lo + pad, hi - pad, 40);
  ContourOptions opts;
  opts.conjugate_symmetric = true;
  const auto r = contour_line_integral([&](cplx s) { return std::exp(log_f(s) - log_scale); }, line, spec, opts);
  const double scaled = r.value.real();
  if (!(scaled > 0.0)) {
    throw NonConvergent("g_j_contour: non-positive value for j=" + std::to_string(j), scaled, r.err_est);
  }
  GjValue g;
  g.j = j;
  g.L = L;
  g.m = m;
  g.log_value = log_scale + std::log(scaled);
  g.value = std::exp(g.log_value);
  g.rel_err = r.err_est / scaled;
  g.err_est = g.value * g.rel_err;
  return g;
}

McEstimate g_j_mc(int j, int L, int m, long n_samples, std::uint64_t seed, std::uint64_t stream) {
  if (j < 0) throw DomainError("g_j_mc: requires j >= 0");
  check_lm(L, m, "g_j_mc");
  if (n_samples < 1000) throw DomainError("g_j_mc: requires at least 1000 samples");
  const double b = 0.5 * L;
  const double a_t = half_up(j) + 0.5;
  const double a_r = j - half_up(j) + 1.0;
  // The Beta densities absorb the integrand; this constant is what is left.
  const double scale = std::exp(m * (log_beta(a_t, b) + log_beta(a_r, b) - 2.0 * log_gamma(b)));
  auto est = block_monte_carlo(n_samples, seed, stream, [&](Philox4x32& rng) {
    std::gamma_distribution<double> gt(a_t), gr(a_r), gb(b);
    double log_t = 0.0, log_r = 0.0;
    for (int l = 0; l < m; ++l) {
      log_t += log_beta_draw(gt, gb, rng);
      log_r += log_beta_draw(gr, gb, rng);
    }
    return log_r > log_t ? scale : 0.0;
  });
  return est;
}

double g_j_sym(int j, int L, int m) {
  if (j < 0) throw DomainError("g_j_sym: requires j >= 0");
  check_lm(L, m, "g_j_sym");
  return 0.5 * std::exp(2.0 * m * (log_gamma(j + 1.0) - log_gamma(j + 1.0 + 0.5 * L)));
}

double a_lm_closed(int L, int m) {
  check_lm(L, m, "a_lm_closed");
  const double ml = static_cast<double>(m) * L;
  return ml / 8.0 + 0.5 * std::exp(log_gamma(ml) - 2.0 * log_gamma(0.5 * ml) - ml * std::log(2.0));
}

McEstimate a_lm_mc(int L, int m, long n_samples, std::uint64_t seed, bool symmetry_baseline) {
  check_lm(L, m, "a_lm_mc");
  if (n_samples < 10000) throw DomainError("a_lm_mc: requires at least 10^4 samples");
  return block_monte_carlo(n_samples, seed, 0, [&](Philox4x32& rng) {
    std::gamma_distribution<double> g(0.5 * L);
    double st = 0.0, sr = 0.0;
    for (int l = 0; l < m; ++l) {
      st += g(rng);
      sr += g(rng);
    }
    if (!(sr < st)) return 0.0;
    return symmetry_baseline ? 0.5 : 0.5 * st;
  });
}

std::pair<double, double> g_j_even_odd_asy(int j, int L, int m) {
  if (j < 1) throw DomainError("g_j_even_odd_asy: requires j >= 1");
  const double sym = g_j_sym(j, L, m);
  const double shift = a_lm_closed(L, m) * std::pow(static_cast<double>(j), -(static_cast<double>(m) * L + 1.0));
  return {sym + shift, sym - shift};
}

std::shared_ptr<GjTable> GjTable::get(int L, int m) {
  check_lm(L, m, "GjTable");
  static std::mutex registry_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<GjTable>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[{L, m}];
  if (!slot) slot.reset(new GjTable(L, m));
  return slot;
}

std::vector<GjValue> GjTable::values(int count) {
  if (count < 0) throw DomainError("GjTable::values: negative count");
  std::lock_guard lock(mutex_);
  extend(count);
  return {entries_.begin(), entries_.begin() + count};
}

void GjTable::extend(int count) {
  const std::vector<std::int64_t> key{L_, m_};
  // Second entry: record layout (value, log value, relative error).
  const std::vector<double> meta{default_gj_spec().rel_tol, 2.0};
  if (!cache_checked_) {
    cache_checked_ = true;
    if (auto data = cache_load("gj", key, meta); data && data->size() % 3 == 0) {
      for (std::size_t i = 0; i < data->size(); i += 3) {
        GjValue g;
        g.j = static_cast<int>(i / 3);
        g.L = L_;
        g.m = m_;
        g.value = (*data)[i];
        g.log_value = (*data)[i + 1];
        g.rel_err = (*data)[i + 2];
        g.err_est = g.value * g.rel_err;
        entries_.push_back(g);
      }
    }
  }
  const int have = static_cast<int>(entries_.size());
  if (count <= have) return;
  std::vector<GjValue> fresh(static_cast<std::size_t>(count - have));
  parallel_for(fresh.size(), [&](std::size_t i) { fresh[i] = g_j_contour(have + static_cast<int>(i), L_, m_); });
  entries_.insert(entries_.end(), fresh.begin(), fresh.end());
  cache_store({"gj", key, meta, flatten(entries_)});
}

namespace {

double log_q_lm(int L, int m) {
  return m * (std::log(static_cast<double>(L)) + log_gamma(0.5 * L) + log_gamma(0.5 * (L + 1)) -
              std::log(2.0 * std::sqrt(std::numbers::pi)));
}

}  // namespace

double q_lm(int L, int m) {
  check_lm(L, m, "q_lm");
  return std::exp(log_q_lm(L, m));
}

ExactValue expected_real_sum(int N, int L, int m) {
  if (N < 2) throw DomainError("expected_real_sum: requires N >= 2");
  check_lm(L, m, "expected_real_sum");
  const auto g = GjTable::get(L, m)->values(N - 1);
  const double log_q2 = std::log(2.0) + log_q_lm(L, m);
  auto term = [&](int j) { return std::exp(log_q2 + m * log_binomial(L + j, L) + g[static_cast<std::size_t>(j)].log_value); };
  auto term_err = [&](int j) { return term(j) * g[static_cast<std::size_t>(j)].rel_err; };
  NeumaierSum sum;
  double max_term = 0.0;
  double err = 0.0;
  for (int j = 0; j <= N - 2; j += 2) {
    const double even = term(j);
    const double odd = j + 1 <= N - 2 ? term(j + 1) : 0.0;
    max_term = std::max({max_term, even, odd});
    err += term_err(j) + (j + 1 <= N - 2 ? term_err(j + 1) : 0.0);
    sum += even - odd;
  }
  const double rounding = std::max(sum.max_partial(), max_term) * 0x1.0p-52 * static_cast<double>(N);
  const double value = sum.value() + (N % 2 == 1 ? 1.0 : 0.0);
  if (rounding > 1e-6 * std::fabs(value)) {
    throw PrecisionLoss("expected_real_sum: cancellation bound " + std::to_string(rounding) +
                        " exceeds 1e-6 of the result " + std::to_string(value));
  }
  return {value, err + rounding};
}

double weak_coefficient(int L, int m) {
  check_lm(L, m, "weak_coefficient");
  return std::exp(-log_beta(0.5 * m * L, 0.5));
}

double weak_asymptotic(int N, int L, int m) {
  if (N < 1) throw DomainError("weak_asymptotic: requires N >= 1");
  return weak_coefficient(L, m) * std::log(static_cast<double>(N));
}

double weak_coefficient_from_alm(int L, int m) {
  check_lm(L, m, "weak_coefficient_from_alm");
  const double ml = static_cast<double>(m) * L;
  const double log_ratio = ml * std::log(2.0) - m * log_gamma(L + 1.0);
  return 2.0 * std::exp(log_q_lm(L, m) + log_ratio) * (2.0 * a_lm_closed(L, m) - ml / 4.0);
}

}  // namespace realeig
