#include "realeig/numerics/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "realeig/errors.hpp"
#include "realeig/numerics/summation.hpp"

namespace realeig {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

double checked(double v, double x) {
  if (!std::isfinite(v)) {
    throw NanEncountered("integrand returned " + std::to_string(v) + " at x=" + std::to_string(x));
  }
  return v;
}

double tolerance(const QuadratureSpec& spec, double value) {
  return std::max(spec.abs_tol, spec.rel_tol * std::fabs(value));
}

// A panel of the global interval [lo, hi], stored as offsets from both ends
// so points near either end keep their distance exactly.
struct Panel {
  double from_lo;
  double to_hi;
  double width;
  int depth;
  double value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

struct KronrodOut {
  double value;
  double err;
};

KronrodOut kronrod15(const EndpointIntegrand& f, double lo, double hi, const Panel& p) {
  const double half = 0.5 * p.width;
  const bool near_lo = p.from_lo <= p.to_hi;
  auto eval = [&](double xk) {
    // xk in [-1, 1] relative to the panel centre.
    const double da = p.from_lo + half * (1.0 + xk);
    const double db = p.to_hi + half * (1.0 - xk);
    const double x = near_lo ? lo + da : hi - db;
    return checked(f(x, da, db), x);
  };
  const double fc = eval(0.0);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::fabs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    f1[j] = eval(-kXgk[j]);
    f2[j] = eval(kXgk[j]);
    resk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::fabs(f1[j] - reskh) + std::fabs(f2[j] - reskh));
  const double value = resk * half;
  resabs *= half;
  resasc *= half;
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
  return {value, err};
}

QuadratureResult gauss_kronrod(const EndpointIntegrand& f, std::span<const double> breaks,
                               const QuadratureSpec& spec) {
  const double lo = breaks.front();
  const double hi = breaks.back();
  std::priority_queue<Panel> open;
  std::vector<Panel> frozen;
  long evals = 0;
  double value = 0.0, err = 0.0, frozen_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double w = breaks[i + 1] - breaks[i];
    if (!(w > 0.0)) continue;
    Panel p{breaks[i] - lo, hi - breaks[i + 1], w, 0, 0.0, 0.0};
    if (i + 2 == breaks.size()) p.to_hi = 0.0;
    if (i == 0) p.from_lo = 0.0;
    const auto r = kronrod15(f, lo, hi, p);
    evals += 15;
    p.value = r.value;
    p.err = r.err;
    value += p.value;
    err += p.err;
    open.push(p);
  }
  constexpr long kMaxEvals = 4'000'000;
  int iter = 0;
  while (err > tolerance(spec, value) && !open.empty()) {
    if (evals > kMaxEvals) break;
    Panel worst = open.top();
    open.pop();
    if (worst.depth >= spec.max_depth) {
      frozen.push_back(worst);
      frozen_err += worst.err;
      // Panels at the depth cap can no longer improve.
      if (frozen_err > tolerance(spec, value)) break;
      continue;
    }
    const double half = 0.5 * worst.width;
    Panel left{worst.from_lo, worst.to_hi + half, half, worst.depth + 1, 0.0, 0.0};
    Panel right{worst.from_lo + half, worst.to_hi, half, worst.depth + 1, 0.0, 0.0};
    const auto rl = kronrod15(f, lo, hi, left);
    const auto rr = kronrod15(f, lo, hi, right);
    evals += 30;
    left.value = rl.value;
    left.err = rl.err;
    right.value = rr.value;
    right.err = rr.err;
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    open.push(left);
    open.push(right);
    if (++iter % 64 == 0) {
      // Re-sum to stop drift of the running totals.
      NeumaierSum v, e;
      auto copy = open;
      while (!copy.empty()) {
        v += copy.top().value;
        e += copy.top().err;
        copy.pop();
      }
      for (const auto& p : frozen) {
        v += p.value;
        e += p.err;
      }
      value = v.value();
      err = e.value();
    }
  }
  NeumaierSum v, e;
  while (!open.empty()) {
    v += open.top().value;
    e += open.top().err;
    open.pop();
  }
  for (const auto& p : frozen) {
    v += p.value;
    e += p.err;
  }
  QuadratureResult out{v.value(), e.value(), evals};
  if (out.err_est > tolerance(spec, out.value)) {
    throw NonConvergent("gauss-kronrod: error estimate " + std::to_string(out.err_est) +
                            " above tolerance after " + std::to_string(evals) + " evaluations",
                        out.value, out.err_est);
  }
  return out;
}

// One tanh-sinh panel refined by halving the step in t. Nodes are laid out
// as x = a + near or b - near with the distance to the nearer end computed
// directly, so endpoint singularities never see a rounded x.
class TanhSinhPanel {
 public:
  static constexpr double kTmax = 4.0;

  TanhSinhPanel(EndpointIntegrand f, double a, double b) : f_(std::move(f)), a_(a), b_(b), half_(0.5 * (b - a)) {
    for (int k = 0; k <= static_cast<int>(kTmax); ++k) add_node(k);
    estimate_ = h_ * acc_.value();
  }

  void refine() {
    h_ *= 0.5;
    for (double t = h_; t <= kTmax; t += 2.0 * h_) add_node(t);
    const double next = h_ * acc_.value();
    err_ = std::fabs(next - estimate_);
    estimate_ = next;
    ++level_;
  }

  double estimate() const { return estimate_; }
  double abs_estimate() const { return h_ * abs_.value(); }
  double err() const { return err_; }
  int level() const { return level_; }
  long evaluations() const { return evals_; }

 private:
  void add_node(double t) {
    constexpr double halfpi = 0.5 * std::numbers::pi;
    const double s = halfpi * std::sinh(t);
    const double ch = std::cosh(s);
    const double w = half_ * halfpi * std::cosh(t) / (ch * ch);
    if (w == 0.0) return;
    if (t == 0.0) {
      const double x = a_ + half_;
      const double v = w * checked(f_(x, half_, half_), x);
      ++evals_;
      acc_ += v;
      abs_ += std::fabs(v);
      return;
    }
    const double near = half_ * 2.0 / (std::exp(2.0 * s) + 1.0);
    const double far = 2.0 * half_ - near;
    const double xr = b_ - near;
    const double xl = a_ + near;
    evals_ += 2;
    const double vr = w * checked(f_(xr, far, near), xr);
    const double vl = w * checked(f_(xl, near, far), xl);
    acc_ += vr + vl;
    abs_ += std::fabs(vr) + std::fabs(vl);
  }

  EndpointIntegrand f_;
  double a_, b_, half_;
  double h_ = 1.0;
  NeumaierSum acc_, abs_;
  double estimate_ = 0.0;
  double err_ = std::numeric_limits<double>::infinity();
  int level_ = 0;
  long evals_ = 0;
};

// All panels share one tolerance: a panel is refined while its error
// exceeds its share of max(abs_tol, rel_tol |total|, round-off floor).
QuadratureResult tanh_sinh(std::vector<TanhSinhPanel>& panels, const QuadratureSpec& spec) {
  const int max_level = std::min(spec.max_depth, 14);
  const double share = 1.0 / static_cast<double>(panels.size());
  for (;;) {
    NeumaierSum total, total_abs, total_err;
    for (const auto& p : panels) {
      total += p.estimate();
      total_abs += p.abs_estimate();
      total_err += p.err();
    }
    const double floor = 64.0 * kEps * total_abs.value();
    const double tol = std::max({spec.abs_tol, spec.rel_tol * std::fabs(total.value()), floor});
    bool refined = false;
    bool done = total_err.value() <= tol;
    for (auto& p : panels) {
      if (p.level() < 3) done = false;
      if ((p.level() < 3 || p.err() > tol * share) && p.level() < max_level) {
        p.refine();
        refined = true;
      }
    }
    if (done || !refined) {
      if (!done) {
        throw NonConvergent("tanh-sinh: error estimate " + std::to_string(total_err.value()) +
                                " above tolerance " + std::to_string(tol),
                            total.value(), total_err.value());
      }
      long evals = 0;
      for (const auto& p : panels) evals += p.evaluations();
      return {total.value(), std::max(total_err.value(), floor), evals};
    }
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol >= std::ldexp(1.0, -50)) || !std::isfinite(rel_tol)) {
    throw DomainError("QuadratureSpec: rel_tol must be >= 2^-50, got " + std::to_string(rel_tol));
  }
  if (!(abs_tol >= 0.0)) throw DomainError("QuadratureSpec: abs_tol must be >= 0");
  if (max_depth < 1) throw DomainError("QuadratureSpec: max_depth must be positive");
}

QuadratureResult integrate_pieces(const EndpointIntegrand& f, std::span<const double> breaks,
                                  const QuadratureSpec& spec) {
  spec.validate();
  if (breaks.size() < 2) throw DomainError("integrate: need at least two break points");
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i] <= breaks[i + 1]) || !std::isfinite(breaks[i]) || !std::isfinite(breaks[i + 1])) {
      throw DomainError("integrate: break points must be finite and non-decreasing");
    }
  }
  if (!(breaks.front() < breaks.back())) throw DomainError("integrate: requires a < b");
  if (spec.rule == QuadratureRule::GaussKronrod) return gauss_kronrod(f, breaks, spec);

  // Tanh-sinh panels report distances to the global ends, not their own.
  const double lo = breaks.front();
  const double hi = breaks.back();
  const std::size_t count = breaks.size() - 1;
  std::vector<TanhSinhPanel> panels;
  panels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (!(b > a)) continue;
    const double off_a = i == 0 ? 0.0 : a - lo;
    const double off_b = i + 1 == count ? 0.0 : hi - b;
    panels.emplace_back(
        [&f, off_a, off_b](double x, double da, double db) { return f(x, off_a + da, off_b + db); }, a, b);
  }
  return tanh_sinh(panels, spec);
}

QuadratureResult integrate_endpoint(const EndpointIntegrand& f, double a, double b,
                                    const QuadratureSpec& spec) {
  const std::array<double, 2> br{a, b};
  return integrate_pieces(f, br, spec);
}

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
  return integrate_endpoint([&f](double x, double, double) { return f(x); }, a, b, spec);
}

ContourResult contour_line_integral(const std::function<std::complex<double>(std::complex<double>)>& f,
                                    double re_line, const QuadratureSpec& spec,
                                    const ContourOptions& options) {
  spec.validate();
  using cplx = std::complex<double>;
  long evals = 0;
  // ds / (2 pi i) = cosh(u) du / (2 pi).
  auto mapped = [&](double u) -> cplx {
    const cplx s(re_line, std::sinh(u));
    const cplx v = f(s) * (std::cosh(u) / (2.0 * std::numbers::pi));
    ++evals;
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NanEncountered("contour integrand non-finite at Im s=" + std::to_string(s.imag()));
    }
    return v;
  };
  const bool sym = options.conjugate_symmetric;
  // Sum over nodes u = k h with k odd (odd_only) or all k, restricted to
  // lo < |u| <= hi (the centre is added separately).
  auto band = [&](double h, double lo, double hi, bool odd_only) {
    cplx acc = 0.0;
    const long kmin = static_cast<long>(std::floor(lo / h)) + 1;
    const long kmax = static_cast<long>(std::floor(hi / h + 1e-9));
    for (long k = kmin; k <= kmax; ++k) {
      if (odd_only && k % 2 == 0) continue;
      const double u = k * h;
      if (sym) {
        acc += 2.0 * mapped(u).real();
      } else {
        acc += mapped(u) + mapped(-u);
      }
    }
    return acc;
  };

  double h = options.initial_step;
  double range = 4.0;
  constexpr double kMaxRange = 64.0;
  cplx centre = mapped(0.0);
  if (sym) centre = centre.real();
  cplx sum = centre + band(h, 0.0, range, false);
  // Grow the range until the last panel is negligible.
  for (;;) {
    const cplx panel = band(h, range, 2.0 * range, false);
    sum += panel;
    range *= 2.0;
    if (std::abs(panel) * h <= 0.1 * spec.rel_tol * std::abs(sum) * h + spec.abs_tol) break;
    if (range >= kMaxRange) {
      throw NonConvergent("contour_line_integral: tail does not decay within |u| <= 64",
                          (h * sum).real(), std::abs(panel) * h);
    }
  }
  cplx estimate = h * sum;
  double err = std::numeric_limits<double>::infinity();
  const int max_level = std::min(spec.max_depth, 12);
  bool converged = false;
  for (int level = 0; level < max_level; ++level) {
    h *= 0.5;
    sum += band(h, 0.0, range, true);
    const cplx next = h * sum;
    err = std::abs(next - estimate);
    estimate = next;
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(estimate))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NonConvergent("contour_line_integral: trapezoid refinement did not converge",
                        estimate.real(), err);
  }
  if (std::fabs(estimate.imag()) <= 1e-10 * std::abs(estimate)) estimate = estimate.real();
  return {estimate, std::max(err, 64.0 * kEps * std::abs(estimate)), evals};
}

}  // namespace realeig
