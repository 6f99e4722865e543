#include "realeig/montecarlo/sampling.hpp"

#include <cmath>
#include <random>

namespace realeig {

Eigen::MatrixXd sample_gaussian(int rows, int cols, Philox4x32& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

Eigen::MatrixXd sample_haar_columns(int n, int k, Philox4x32& rng) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(sample_gaussian(n, k, rng));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  const auto& r = qr.matrixQR();
  for (int i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  return q;
}

Eigen::MatrixXd sample_haar_orthogonal(int n, Philox4x32& rng) { return sample_haar_columns(n, n, rng); }

Eigen::MatrixXd sample_product(const EnsembleSpec& spec, Philox4x32& rng) {
  spec.validate();
  const int n = spec.N;
  Eigen::MatrixXd product;
  for (int f = 0; f < spec.m; ++f) {
    Eigen::MatrixXd factor;
    if (spec.kind == EnsembleKind::TruncatedOrthogonal) {
      factor = sample_haar_columns(n + spec.L, n, rng).topRows(n);
    } else {
      factor = sample_gaussian(n, n, rng) / std::sqrt(static_cast<double>(n));
    }
    product = f == 0 ? factor : Eigen::MatrixXd(product * factor);
  }
  return product;
}

}  // namespace realeig
