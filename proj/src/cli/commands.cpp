#include "realeig/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "realeig/errors.hpp"
#include "realeig/exactdensity.hpp"
#include "realeig/montecarlo/sampling.hpp"
#include "realeig/montecarlo/schur.hpp"
#include "realeig/numerics/special.hpp"
#include "realeig/parallel.hpp"
#include "realeig/weakregime.hpp"
#include "realeig/weights.hpp"

namespace realeig {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v, auto&& to_str) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_str(v[i]);
  return s;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Metadata provenance(const RunConfig& c, const Stopwatch& clock) {
  Metadata md = c.describe();
  md.emplace_back("wall_time_s", fmt(clock.seconds()));
  return md;
}

GapCheck compare(const ReportRow& a, const ReportRow& b, const RunConfig& c) {
  GapCheck g;
  g.label = a.quantity + ": " + to_string(a.method) + " vs " + to_string(b.method);
  g.gap = std::fabs(a.value - b.value);
  const bool mc = a.method == Method::MonteCarlo || b.method == Method::MonteCarlo;
  const double sigma = std::hypot(a.err_est, b.err_est);
  if (a.method == Method::Asymptotic || b.method == Method::Asymptotic) {
    g.allowed = mc ? std::max(c.sigmas * sigma, c.abs_tol) : c.abs_tol;
  } else if (mc) {
    g.allowed = c.sigmas * sigma;
  } else {
    g.allowed = c.rel_tol * std::max(std::fabs(a.value), std::fabs(b.value));
  }
  g.passed = g.gap <= g.allowed;
  return g;
}

std::vector<GapCheck> all_pairs(const std::vector<ReportRow>& rows, const RunConfig& c) {
  std::vector<GapCheck> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = i + 1; k < rows.size(); ++k) out.push_back(compare(rows[i], rows[k], c));
  }
  return out;
}

int outcome_code(const std::vector<GapCheck>& checks) {
  for (const auto& g : checks) {
    if (!g.passed) return kExitTolerance;
  }
  return kExitOk;
}

bool truncated(const RunConfig& c) { return c.ensemble.kind == EnsembleKind::TruncatedOrthogonal; }

}  // namespace

Metadata RunConfig::describe() const {
  auto itos = [](int v) { return std::to_string(v); };
  auto mtos = [](Method m) { return to_string(m); };
  auto stos = [](const std::string& s) { return s; };
  return {{"command", command},
          {"ensemble", to_string(ensemble.kind)},
          {"N", std::to_string(ensemble.N)},
          {"L", std::to_string(ensemble.L)},
          {"m", std::to_string(ensemble.m)},
          {"sweep", join(sweep, itos)},
          {"j", std::to_string(j)},
          {"methods", join(methods, mtos)},
          {"trials", std::to_string(trials)},
          {"seed", std::to_string(seed)},
          {"threads", std::to_string(threads)},
          {"rel_tol", format_double(rel_tol)},
          {"abs_tol", format_double(abs_tol)},
          {"sigmas", format_double(sigmas)},
          {"slope_tol", format_double(slope_tol)},
          {"grid", std::to_string(grid)},
          {"bins", std::to_string(bins)},
          {"range", format_double(resolved_range())},
          {"only", join(only, stos)},
          {"out", out.value_or("")},
          {"format", to_string(format)},
          {"cache_dir", cache_dir.value_or("")}};
}

double RunConfig::resolved_range() const {
  if (range > 0.0) return range;
  return ensemble.kind == EnsembleKind::RealGinibre ? 1.25 : 1.0;
}

int ComparisonOutcome::exit_code() const { return outcome_code(checks); }
int TableOutcome::exit_code() const { return outcome_code(checks); }

std::pair<double, double> fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("fit_slope: need at least two (x, y) pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_slope: all x values coincide");
  const double slope = sxy / sxx;
  if (n == 2) return {slope, 0.0};
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    rss += r * r;
  }
  return {slope, std::sqrt(rss / (n - 2) / sxx)};
}

ComparisonOutcome cmd_expected(const RunConfig& c) {
  c.ensemble.validate();
  if (c.methods.empty()) throw DomainError("expected: no methods selected");
  const Stopwatch clock;
  const auto& e = c.ensemble;
  const std::string q = "E(N_R)";
  ComparisonOutcome out;
  for (Method m : c.methods) {
    ReportRow row{q, m, 0.0, 0.0};
    switch (m) {
      case Method::Quadrature: {
        const ExactValue v = truncated(c) ? expected_real_quadrature(SeriesParams::make(e.N, e.L, e.m))
                                          : gin_expected_real_quadrature(e.N, e.m);
        row.value = v.value;
        row.err_est = v.err_est;
        break;
      }
      case Method::Sum: {
        if (!truncated(c)) throw DomainError("expected: the sum route exists for the truncated ensemble only");
        const ExactValue v = expected_real_sum(e.N, e.L, e.m);
        row.value = v.value;
        row.err_est = v.err_est;
        break;
      }
      case Method::MonteCarlo: {
        const auto est = estimate_expected_real(e, c.trials, c.seed, c.threads);
        row.value = est.mean;
        row.err_est = est.std_error;
        break;
      }
      case Method::Asymptotic:
        row.value = truncated(c) ? asympt_expected(e.N, e.L, e.m) : gin_asympt_expected(e.N, e.m);
        break;
      case Method::ClosedForm:
        throw DomainError("expected: no closed form for E(N_R)");
    }
    out.report.rows.push_back(row);
  }
  out.checks = all_pairs(out.report.rows, c);
  out.report.metadata = provenance(c, clock);
  return out;
}

TableOutcome cmd_density(const RunConfig& c) {
  c.ensemble.validate();
  const auto& e = c.ensemble;
  if (c.grid < 16) throw DomainError("density: grid must have at least 16 cells");
  if (e.m > 1 && c.grid % 2 != 0) throw DomainError("density: grid must be even for m > 1 so no cell straddles 0");
  const double range = c.resolved_range();
  if (truncated(c) && range > 1.0) throw DomainError("density: range exceeds the support (-1, 1)");
  const Stopwatch clock;
  const HistogramSpec cells{-range, range, c.grid};
  const double width = cells.width();

  std::vector<double> exact(static_cast<std::size_t>(c.grid)), exact_err(exact.size());
  double total = 0.0;
  if (truncated(c)) {
    const auto p = SeriesParams::make(e.N, e.L, e.m);
    total = expected_real_quadrature(p).value;
    parallel_for(exact.size(), c.threads, [&](std::size_t i) {
      const int k = static_cast<int>(i);
      const auto v = density_cell_integral(cells.bin_left(k), cells.bin_right(k), p);
      exact[i] = v.value;
      exact_err[i] = v.err_est;
    });
  } else {
    total = gin_expected_real_quadrature(e.N, e.m).value;
    const auto spec = QuadratureSpec{}.with_rule(QuadratureRule::TanhSinh).with_rel_tol(1e-9);
    parallel_for(exact.size(), c.threads, [&](std::size_t i) {
      const int k = static_cast<int>(i);
      const auto r = integrate(
          [&](double x) { return x == 0.0 ? 0.0 : gin_density_rho(x, e.N, e.m).value; }, cells.bin_left(k),
          cells.bin_right(k), spec);
      exact[i] = r.value;
      exact_err[i] = r.err_est;
    });
  }

  std::optional<Histogram> hist;
  if (c.trials > 0) hist = estimate_expected_real(e, c.trials, c.seed, c.threads, cells).histogram;

  TableOutcome out;
  out.report.columns = {"x", "exact", "mc", "mc_err", "limit"};
  // Each cell is compared in units of its own standard error: the Poisson
  // error of the count the exact density predicts, combined with the
  // quadrature error.
  double worst_z = 0.0;
  long total_hits = 0;
  if (hist) {
    total_hits = hist->outside;
    for (long n : hist->counts) total_hits += n;
  }
  const double hits_width = static_cast<double>(total_hits) * width;
  const double nan = std::nan("");
  for (int k = 0; k < c.grid; ++k) {
    const double a = cells.bin_left(k), b = cells.bin_right(k);
    const double ex = exact[static_cast<std::size_t>(k)] / (total * width);
    const double lim = truncated(c) ? limiting_mass(a, b, e.m, SeriesParams::make(e.N, e.L, e.m).alpha) / width
                                    : gin_limiting_mass(a, b, e.m) / width;
    double mc = nan, mc_err = nan;
    if (hist && total_hits > 0) {
      mc = hist->normalized(k);
      mc_err = std::sqrt(static_cast<double>(hist->counts[static_cast<std::size_t>(k)])) / hits_width;
      const double ex_err = exact_err[static_cast<std::size_t>(k)] / (total * width);
      const double sigma = std::hypot(std::sqrt(std::max(ex, 0.0) / hits_width), ex_err);
      if (sigma > 0.0) worst_z = std::max(worst_z, std::fabs(mc - ex) / sigma);
    }
    out.report.rows.push_back({0.5 * (a + b), ex, mc, mc_err, lim});
  }
  if (hist) {
    GapCheck g{"density: max |mc - exact| in pooled standard errors", worst_z, c.sigmas, false};
    g.passed = g.gap <= g.allowed;
    out.checks.push_back(g);
  }
  out.report.metadata = provenance(c, clock);
  out.report.metadata.emplace_back("expected_real", format_double(total));
  return out;
}

ComparisonOutcome cmd_weak(const RunConfig& c) {
  const auto& e = c.ensemble;
  if (e.L < 1 || e.m < 1) throw DomainError("weak: L and m must be positive");
  if (c.sweep.size() < 2) throw DomainError("weak: the sweep needs at least two values of N");
  std::vector<int> sweep = c.sweep;
  std::sort(sweep.begin(), sweep.end());
  if (std::adjacent_find(sweep.begin(), sweep.end()) != sweep.end()) throw DomainError("weak: repeated N in sweep");
  const Stopwatch clock;
  ComparisonOutcome out;
  std::vector<double> logs, values;
  for (int n : sweep) {
    const ExactValue s = expected_real_sum(n, e.L, e.m);
    const double asy = weak_asymptotic(n, e.L, e.m);
    const std::string tag = "[N=" + std::to_string(n) + "]";
    out.report.rows.push_back({"E(N_R)" + tag, Method::Sum, s.value, s.err_est});
    out.report.rows.push_back({"E(N_R)" + tag, Method::Asymptotic, asy, 0.0});
    const ExactValue twice = expected_real_sum(2 * n, e.L, e.m);
    out.report.rows.push_back({"D" + tag, Method::Sum, twice.value - s.value, twice.err_est + s.err_est});
    logs.push_back(std::log(static_cast<double>(n)));
    values.push_back(s.value);
  }
  const std::size_t top = std::max<std::size_t>(2, sweep.size() - sweep.size() / 2);
  const std::vector<double> x(logs.end() - static_cast<long>(top), logs.end());
  const std::vector<double> y(values.end() - static_cast<long>(top), values.end());
  const auto [slope, slope_err] = fit_slope(x, y);
  const double coef = weak_coefficient(e.L, e.m);
  out.report.rows.push_back({"slope", Method::Sum, slope, slope_err});
  out.report.rows.push_back({"slope", Method::Asymptotic, coef, 0.0});
  GapCheck g{"slope: fitted vs log-law coefficient", std::fabs(slope - coef), c.slope_tol * coef, false};
  g.passed = g.gap <= g.allowed;
  out.checks.push_back(g);
  out.report.metadata = provenance(c, clock);
  return out;
}

ComparisonOutcome cmd_gj(const RunConfig& c) {
  const auto& e = c.ensemble;
  const Stopwatch clock;
  ComparisonOutcome out;
  const std::string q = "g_" + std::to_string(c.j);
  const GjValue v = g_j_contour(c.j, e.L, e.m);
  out.report.rows.push_back({q, Method::Quadrature, v.value, v.err_est});
  if (c.trials > 0) {
    const McEstimate mc = g_j_mc(c.j, e.L, e.m, c.trials, c.seed);
    out.report.rows.push_back({q, Method::MonteCarlo, mc.mean, mc.std_error});
    out.checks.push_back(compare(out.report.rows[0], out.report.rows[1], c));
  }
  if (c.j >= 2) {
    const auto [even, odd] = g_j_even_odd_asy(c.j / 2, e.L, e.m);
    out.report.rows.push_back({q, Method::Asymptotic, c.j % 2 == 0 ? even : odd, 0.0});
  }
  out.report.metadata = provenance(c, clock);
  return out;
}

ComparisonOutcome cmd_alm(const RunConfig& c) {
  const auto& e = c.ensemble;
  const Stopwatch clock;
  ComparisonOutcome out;
  const std::string q = "A_{L;m}";
  out.report.rows.push_back({q, Method::ClosedForm, a_lm_closed(e.L, e.m), 0.0});
  if (c.trials > 0) {
    const McEstimate mc = a_lm_mc(e.L, e.m, c.trials, c.seed);
    out.report.rows.push_back({q, Method::MonteCarlo, mc.mean, mc.std_error});
    out.checks.push_back(compare(out.report.rows[0], out.report.rows[1], c));
  }
  const ReportRow direct{"log_coefficient", Method::ClosedForm, weak_coefficient(e.L, e.m), 0.0};
  const ReportRow via_alm{"log_coefficient", Method::Sum, weak_coefficient_from_alm(e.L, e.m), 0.0};
  out.report.rows.push_back(direct);
  out.report.rows.push_back(via_alm);
  out.checks.push_back(compare(direct, via_alm, c));
  out.report.metadata = provenance(c, clock);
  return out;
}

SimulationEstimate cmd_sample(const RunConfig& c) {
  const double range = c.resolved_range();
  return estimate_expected_real(c.ensemble, c.trials, c.seed, c.threads, HistogramSpec{-range, range, c.bins});
}

// ---------------------------------------------------------------- verify

namespace {

using CheckFn = CheckResult (*)(const RunConfig&);

CheckResult check_gaussbnd(const RunConfig& c) {
  // (1-u^2)(1-v^2) = (1-uv)^2 - (u-v)^2, so the left side is evaluated as
  // 1 - ((u-v)/(1-uv))^2 to keep rounding from manufacturing violations.
  Philox4x32 rng(c.seed, 0);
  long violations = 0;
  double worst = -1.0;
  const long n = 100000;
  for (long i = 0; i < n; ++i) {
    const double u = rng.uniform(), v = rng.uniform();
    const double r = (u - v) / (1.0 - u * v);
    const double lhs = 1.0 - r * r;
    const double rhs = std::exp(-(u - v) * (u - v));
    worst = std::max(worst, lhs - rhs);
    if (lhs > rhs) ++violations;
  }
  return {"gaussbnd", violations == 0,
          std::to_string(violations) + " violations in " + std::to_string(n) + " points, max lhs-rhs " + fmt(worst)};
}

CheckResult check_mass(const RunConfig&) {
  double worst = 0.0;
  for (int L : {1, 2, 3, 4}) {
    for (int m : {1, 2, 3}) {
      const double mass = WeightTable::get(L, m)->mass();
      const double expect = std::exp(m * log_beta(0.5 * L, 0.5));
      worst = std::max(worst, std::fabs(mass / expect - 1.0));
    }
  }
  return {"mass", worst <= 1e-6, "max relative mass error " + fmt(worst) + " (allowed 1e-06)"};
}

CheckResult check_haar(const RunConfig& c) {
  double worst = 0.0;
  Philox4x32 rng(c.seed, 1);
  for (int n : {5, 50}) {
    for (int k = 0; k < 20; ++k) {
      const Eigen::MatrixXd q = sample_haar_orthogonal(n, rng);
      const Eigen::MatrixXd r = q.transpose() * q - Eigen::MatrixXd::Identity(n, n);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  return {"haar", worst <= 1e-12, "max |Q^T Q - I| " + fmt(worst) + " (allowed 1e-12)"};
}

CheckResult check_parity(const RunConfig& c) {
  const EnsembleSpec specs[] = {{7, 2, 1, EnsembleKind::TruncatedOrthogonal},
                                {8, 3, 2, EnsembleKind::TruncatedOrthogonal},
                                {9, 1, 2, EnsembleKind::RealGinibre}};
  long trials = 0;
  for (const auto& s : specs) trials += estimate_expected_real(s, 20000, c.seed, c.threads).trials;
  return {"parity", true, "no parity violations in " + std::to_string(trials) + " trials"};
}

CheckResult check_scale(const RunConfig& c) {
  Philox4x32 rng(c.seed, 2);
  int mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::MatrixXd m = sample_gaussian(10, 10, rng);
    const int base = count_real_eigs(m);
    for (double s : {0.1, 10.0}) mismatches += count_real_eigs(s * m) != base;
  }
  return {"scale", mismatches == 0, std::to_string(mismatches) + " count changes under scaling of 100 matrices"};
}

CheckResult check_evenness(const RunConfig&) {
  double worst = 0.0;
  for (auto [N, L, m] : {std::tuple{8, 2, 1}, std::tuple{7, 3, 1}, std::tuple{6, 2, 2}}) {
    const auto p = SeriesParams::make(N, L, m);
    for (double x : {0.1, 0.35, 0.7, 0.95}) {
      const double a = density_rho(x, p), b = density_rho(-x, p);
      worst = std::max(worst, std::fabs(a - b) / std::fabs(a));
    }
  }
  return {"evenness", worst <= 1e-8, "max relative |rho(x) - rho(-x)| " + fmt(worst) + " (allowed 1e-08)"};
}

CheckResult check_identity(const RunConfig& c) {
  double worst = 0.0;
  for (auto [N, L, m] : {std::tuple{6, 2, 1}, std::tuple{7, 2, 1}, std::tuple{8, 2, 2}}) {
    const double q = expected_real_quadrature(SeriesParams::make(N, L, m)).value;
    const double s = expected_real_sum(N, L, m).value;
    worst = std::max(worst, std::fabs(q - s) / std::fabs(s));
  }
  return {"identity", worst <= c.rel_tol,
          "max relative quadrature-sum gap " + fmt(worst) + " (allowed " + fmt(c.rel_tol) + ")"};
}

CheckResult check_gj(const RunConfig& c) {
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (auto [j, L, m] : {std::tuple{0, 2, 1}, std::tuple{3, 2, 1}, std::tuple{4, 1, 2}, std::tuple{5, 3, 2}}) {
    const double exact = g_j_contour(j, L, m).value;
    const McEstimate mc = g_j_mc(j, L, m, 200000, c.seed, stream++);
    worst = std::max(worst, std::fabs(mc.mean - exact) / mc.std_error);
  }
  return {"gj", worst <= c.sigmas, "max contour-MC gap " + fmt(worst) + " sigma (allowed " + fmt(c.sigmas) + ")"};
}

CheckResult check_alm(const RunConfig& c) {
  std::string detail;
  bool ok = true;
  for (auto [L, m] : {std::pair{2, 1}, std::pair{4, 1}, std::pair{2, 2}}) {
    const double closed = a_lm_closed(L, m);
    const McEstimate mc = a_lm_mc(L, m, 1000000, c.seed);
    const double z = std::fabs(mc.mean - closed) / mc.std_error;
    ok = ok && z <= c.sigmas;
    detail += (detail.empty() ? "" : "; ") + std::string("(") + std::to_string(L) + "," + std::to_string(m) +
              ") |mc - " + fmt(closed) + "| = " + fmt(std::fabs(mc.mean - closed)) + " = " + fmt(z) + " sigma";
  }
  return {"alm", ok, detail};
}

CheckResult check_weakcoef(const RunConfig&) {
  double worst = 0.0;
  for (int L = 1; L <= 4; ++L) {
    for (int m = 1; m <= 3; ++m) {
      worst = std::max(worst, std::fabs(weak_coefficient_from_alm(L, m) / weak_coefficient(L, m) - 1.0));
    }
  }
  return {"weakcoef", worst <= 1e-10, "max relative gap between coefficient forms " + fmt(worst)};
}

CheckResult check_limitmass(const RunConfig&) {
  double worst = 0.0;
  for (int m : {1, 2, 3}) {
    const double alpha = SeriesParams::make(100, 50, m).alpha;
    worst = std::max(worst, std::fabs(limiting_mass(-1.0, 1.0, m, alpha) - 1.0));
    worst = std::max(worst, std::fabs(gin_limiting_mass(-1.0, 1.0, m) - 1.0));
  }
  return {"limitmass", worst <= 1e-10, "max |mass - 1| " + fmt(worst)};
}

CheckResult check_determinism(const RunConfig& c) {
  const EnsembleSpec s{8, 2, 1, EnsembleKind::TruncatedOrthogonal};
  const HistogramSpec h{-1.0, 1.0, 40};
  const std::string one = write_json(estimate_expected_real(s, 5000, c.seed, 1, h));
  bool same = true;
  for (int t : {4, 16}) same = same && write_json(estimate_expected_real(s, 5000, c.seed, t, h)) == one;
  return {"determinism", same, same ? "identical estimates for 1, 4 and 16 threads" : "estimates differ by thread count"};
}

const std::vector<std::pair<std::string, CheckFn>>& battery() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"gaussbnd", check_gaussbnd}, {"mass", check_mass},         {"haar", check_haar},
      {"parity", check_parity},     {"scale", check_scale},       {"evenness", check_evenness},
      {"identity", check_identity}, {"gj", check_gj},             {"alm", check_alm},
      {"weakcoef", check_weakcoef}, {"limitmass", check_limitmass}, {"determinism", check_determinism}};
  return checks;
}

}  // namespace

std::vector<std::string> verify_check_names() {
  std::vector<std::string> names;
  for (const auto& [n, f] : battery()) names.push_back(n);
  return names;
}

std::vector<CheckResult> cmd_verify(const RunConfig& c) {
  const auto names = verify_check_names();
  for (const auto& o : c.only) {
    if (std::find(names.begin(), names.end(), o) == names.end()) throw DomainError("verify: unknown check '" + o + "'");
  }
  std::vector<CheckResult> results;
  for (const auto& [name, fn] : battery()) {
    if (!c.only.empty() && std::find(c.only.begin(), c.only.end(), name) == c.only.end()) continue;
    try {
      results.push_back(fn(c));
    } catch (const NonConvergent& e) {
      results.push_back({name, false, e.what(), true});
    } catch (const PrecisionLoss& e) {
      results.push_back({name, false, e.what(), true});
    } catch (const SlowConvergence& e) {
      results.push_back({name, false, e.what(), true});
    } catch (const SchurNoConvergence& e) {
      results.push_back({name, false, e.what(), true});
    } catch (const Error& e) {
      results.push_back({name, false, e.what(), false});
    }
  }
  return results;
}

int verify_exit_code(const std::vector<CheckResult>& results) {
  bool any = false, tolerance = false;
  for (const auto& r : results) {
    if (r.passed) continue;
    any = true;
    tolerance = tolerance || !r.nonconvergent;
  }
  if (!any) return kExitOk;
  return tolerance ? kExitTolerance : kExitNonConvergence;
}

}  // namespace realeig
