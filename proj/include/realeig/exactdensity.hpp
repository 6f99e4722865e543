#pragma once

#include <vector>

#include "realeig/ensemble.hpp"
#include "realeig/numerics/quadrature.hpp"
#include "realeig/series.hpp"

namespace realeig {

/// A value from nested quadrature with its accumulated error estimate.
struct ExactValue {
  double value = 0.0;
  double err_est = 0.0;
};

/// Largest N and L for which the exact finite-N route is trusted in
/// double precision.
inline constexpr int kExactMaxN = 256;
inline constexpr int kExactMaxL = 256;

/// Accuracy of the inner (dy) integrals; the outer integral over x uses
/// the caller's spec.
QuadratureSpec default_inner_spec();

/// S(x1, x2) = int_{-1}^{1} (x1 - y) sgn(x2 - y) w(x1) w(y) f_{N-2}(x1 y) dy
/// for even N. For odd N the kernel is built from f_{N-3} and gains the
/// rank-one term of the unpaired monomial x^{N-1}.
double kernel_S(double x1, double x2, const SeriesParams& p, const QuadratureSpec& spec = default_inner_spec());

/// rho_N(x) = S(x, x). Throws DomainError at x = 0 for m > 1, and
/// PrecisionLoss when the series cancellation could exceed 1e-6 of the
/// result or N, L exceed the trusted range.
ExactValue density_rho_detail(double x, const SeriesParams& p, const QuadratureSpec& spec = default_inner_spec());
double density_rho(double x, const SeriesParams& p, const QuadratureSpec& spec = default_inner_spec());

/// E(N_R) = 2 int_0^1 rho_N(x) dx. The inner integrals use
/// default_inner_spec(); spec controls the outer integral.
ExactValue expected_real_quadrature(const SeriesParams& p, const QuadratureSpec& spec = {});

/// Cell average of rho_N over [a, b] (b > a, either side of zero).
ExactValue density_cell_integral(double a, double b, const SeriesParams& p, const QuadratureSpec& spec = {});

/// Limiting density [2m artanh(sqrt(alpha_t))]^{-1} |x|^{1/m-1} (1 - |x|^{2/m})^{-1}
/// on |x| < alpha_t^{m/2}, zero outside. Throws DomainError at x = 0.
double limiting_density(double x, int m, double alpha_t);
/// Integral of limiting_density over [a, b].
double limiting_mass(double a, double b, int m, double alpha_t);

/// sqrt(2 m gamma N / pi) artanh(sqrt(alpha)) with gamma = L/N.
double asympt_expected(int N, int L, int m);

/// sqrt(2 N m / pi).
double gin_asympt_expected(int N, int m);
/// (2m)^{-1} |x|^{1/m - 1} on (-1, 1). Throws DomainError at x = 0.
double gin_limiting_density(double x, int m);
double gin_limiting_mass(double a, double b, int m);

/// Density of real eigenvalues of N^{-m/2} G_1...G_m (not normalised),
/// from the Ginibre analogue of the exact formula. N must be even.
ExactValue gin_density_rho(double x, int N, int m, const QuadratureSpec& spec = default_inner_spec());
/// Total of gin_density_rho over the real line. N must be even.
ExactValue gin_expected_real_quadrature(int N, int m, const QuadratureSpec& spec = {});

/// rho_N sampled on a grid, optionally normalised by E(N_R).
struct DensityCurve {
  EnsembleSpec ensemble;
  std::vector<double> abscissae;
  std::vector<double> values;
  bool normalized = false;
};

/// Evaluates the exact density at every abscissa in parallel; output is
/// independent of the thread count.
DensityCurve exact_density_curve(const EnsembleSpec& ensemble, const std::vector<double>& abscissae, bool normalize,
                                 const QuadratureSpec& spec = {});

}  // namespace realeig
