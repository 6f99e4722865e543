#pragma once

#include <memory>
#include <vector>

#include "realeig/numerics/quadrature.hpp"
#include "realeig/numerics/signed_log.hpp"

namespace realeig {

/// Tabulated m-fold multiplicative convolution of the base density
/// (1 - y^2)^{L/2 - 1}, i.e. the unnormalized weight of a product of m
/// symmetric Beta-type scalars.
///
/// Level k is tabulated in lambda = -ln|x| / k on Chebyshev-type nodes over
/// [0, lambda_max]. Each node stores ln r where
///   h_k(x) = r(lambda) * (1 - |x|^{2/k})^{kL/2 - 1},
/// so r is smooth at |x| = 1 and grows only logarithmically near x = 0.
/// Between nodes ln r is interpolated with 4-point Lagrange; beyond
/// lambda_max the value is computed directly from the level below.
class WeightTable {
 public:
  static constexpr int kInterpOrder = 4;
  static constexpr int kDefaultNodes = 512;
  static constexpr double kLambdaMax = 32.0;

  /// Builds (or loads from the cache) the table for (L, m). The node count
  /// starts at `nodes` and doubles until the mass identity holds to 1e-6.
  static std::shared_ptr<const WeightTable> build(int L, int m, int nodes = kDefaultNodes);

  /// Shared per-process table for (L, m); built on first use.
  static std::shared_ptr<const WeightTable> get(int L, int m);

  int L() const noexcept { return L_; }
  int m() const noexcept { return m_; }
  int size() const noexcept { return static_cast<int>(lambda_.size()); }

  /// Node abscissa in x, strictly increasing in (0, 1].
  std::vector<double> grid() const;
  /// ln h_m at the node abscissae (same order as grid()).
  std::vector<SignedLogValue> log_values() const;

  /// ln h_m(x) as a function of t = -ln|x| >= 0. +inf at t = infinity
  /// for m > 1, -inf where h vanishes.
  double log_h(double t) const;

  /// ln r at lambda; exact at the nodes.
  double log_ratio(double lambda) const;
  double node_lambda(int i) const { return lambda_[static_cast<std::size_t>(i)]; }
  double node_log_ratio(int i) const { return log_r_[static_cast<std::size_t>(i)]; }

  /// Weight w_L^{(m)} = P^{m/2} h_m with P = L / (2 B(L/2, 1/2)).
  SignedLogValue weight(double x) const;
  /// Same, with the argument given through t = -ln|x|.
  SignedLogValue weight_log_arg(double t) const;
  /// Same, with the argument given as gap = 1 - |x| (exact near |x| = 1).
  SignedLogValue weight_from_gap(double gap) const;

  /// 2 * integral over (0, 1) of h_m, by quadrature of the table.
  double mass() const;

 private:
  WeightTable(int L, int m) : L_(L), m_(m) {}
  double direct_log_h(double t) const;
  void fill(int nodes);
  std::vector<double> serialize() const;
  bool deserialize(const std::vector<double>& data);

  int L_;
  int m_;
  std::shared_ptr<const WeightTable> below_;
  std::vector<double> lambda_;
  std::vector<double> log_r_;
};

/// (L / (2 B(L/2, 1/2)))^{1/2} (1 - x^2)^{L/2 - 1}.
SignedLogValue weight_base(double x, int L);

/// The m-fold weight via the shared WeightTable. At x = 0 with m > 1 the
/// value is infinite and a signed infinity is returned. spec controls the
/// direct quadrature used below the tabulated range.
SignedLogValue weight_product(double x, int L, int m, const QuadratureSpec& spec = {});

/// Uniform large-L approximation d (1 - |x|^{2/m})^{mL/2 - 1} |x|^{1/m - 1}.
SignedLogValue weight_asymptotic(double x, int L, int m);

/// ln d_{L,m} = ln(1/2 sqrt(L / (pi m)) (2 pi / B(L/2, 1/2))^{m/2}).
double log_weight_asymptotic_constant(int L, int m);

/// Independent evaluation of weight_product by inverting its Mellin
/// transform (1/2) B(s/2, L/2)^m on Re s = 1. Requires mL >= 5 so the
/// oscillating inversion integrand decays faster than |s|^{-2}. Near that
/// bound and at small |x| the line integral may not settle to tolerance,
/// which is reported as NonConvergent.
SignedLogValue weight_mellin(double x, int L, int m, const QuadratureSpec& spec = {});

/// Density (up to normalisation) of a product of m standard Gaussians,
/// evaluated at t: e^{-t^2/2}, 2 K_0(|t|), then nested quadrature.
SignedLogValue ginibre_weight(double t, int m, const QuadratureSpec& spec = {});

/// N^{-(m-1)/2} e^{-N m x^{2/m} / 2} (4 pi)^{(m-1)/2} m^{-1/2} |x|^{-(m-1)/m}.
SignedLogValue ginibre_weight_asymptotic(double x, int N, int m);

}  // namespace realeig
