#pragma once

#include <complex>
#include <functional>
#include <span>

namespace realeig {

enum class QuadratureRule { GaussKronrod, TanhSinh };

/// Controls every integrator in the library.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_depth = 48;
  QuadratureRule rule = QuadratureRule::GaussKronrod;

  /// Throws DomainError on rel_tol < 2^-50, negative abs_tol or max_depth < 1.
  void validate() const;

  QuadratureSpec with_rule(QuadratureRule r) const {
    QuadratureSpec s = *this;
    s.rule = r;
    return s;
  }
  QuadratureSpec with_rel_tol(double tol) const {
    QuadratureSpec s = *this;
    s.rel_tol = tol;
    return s;
  }
  QuadratureSpec with_abs_tol(double tol) const {
    QuadratureSpec s = *this;
    s.abs_tol = tol;
    return s;
  }
};

struct QuadratureResult {
  double value = 0.0;
  double err_est = 0.0;
  long evaluations = 0;

  QuadratureResult& operator+=(const QuadratureResult& o) {
    value += o.value;
    err_est += o.err_est;
    evaluations += o.evaluations;
    return *this;
  }
};

using Integrand = std::function<double(double)>;

/// Integrand that also receives x - a and b - x computed without
/// cancellation, so algebraic endpoint singularities can be evaluated
/// accurately even where x rounds to an endpoint.
using EndpointIntegrand = std::function<double(double x, double from_a, double to_b)>;

/// Integral of f over [a, b] with the rule chosen in spec.
/// Throws NonConvergent when the budget is exhausted above tolerance and
/// NanEncountered when f returns a non-finite value.
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec);
QuadratureResult integrate_endpoint(const EndpointIntegrand& f, double a, double b,
                                    const QuadratureSpec& spec);

/// Integral over [breaks.front(), breaks.back()] with the interior points
/// isolated as panel boundaries (kinks, integrable singularities).
/// Breaks must be non-decreasing; zero-width panels are skipped.
QuadratureResult integrate_pieces(const EndpointIntegrand& f, std::span<const double> breaks,
                                  const QuadratureSpec& spec);

struct ContourOptions {
  /// f(conj s) == conj f(s): only Im s >= 0 is sampled and the result is real.
  bool conjugate_symmetric = false;
  /// Starting trapezoid step in the sinh-mapped variable.
  double initial_step = 0.125;
};

struct ContourResult {
  std::complex<double> value;
  double err_est = 0.0;
  long evaluations = 0;
};

/// (1 / 2 pi i) * integral of f along Re s = re_line, bottom to top.
///
/// Im s = sinh(u) and the trapezoid rule in u is refined by halving.
/// The range |u| <= U starts at 4 and is doubled until the outermost panel
/// contributes less than rel_tol / 10 of the total. An imaginary part below
/// 1e-10 of the magnitude is zeroed.
ContourResult contour_line_integral(const std::function<std::complex<double>(std::complex<double>)>& f,
                                    double re_line, const QuadratureSpec& spec,
                                    const ContourOptions& options = {});

}  // namespace realeig
