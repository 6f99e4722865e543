#pragma once

#include <Eigen/Dense>

#include "realeig/ensemble.hpp"
#include "realeig/rng.hpp"

namespace realeig {

/// n x n matrix of independent standard normals.
Eigen::MatrixXd sample_gaussian(int rows, int cols, Philox4x32& rng);

/// Haar-distributed n x n orthogonal matrix: Q from the QR factorisation of
/// a Gaussian matrix with column i multiplied by sign(R_ii).
Eigen::MatrixXd sample_haar_orthogonal(int n, Philox4x32& rng);

/// The first k columns of a Haar orthogonal n x n matrix, from the thin QR
/// of an n x k Gaussian matrix with the same sign correction. Costs
/// O(n k^2) instead of O(n^3).
Eigen::MatrixXd sample_haar_columns(int n, int k, Philox4x32& rng);

/// Product of m independent factors. Truncated factors are the top-left
/// N x N corner of an (N+L) x (N+L) Haar matrix, taken from its first N
/// columns; Ginibre factors are
/// standard Gaussian scaled by N^{-1/2} so eigenvalues are on the unit
/// scale of the density routines.
Eigen::MatrixXd sample_product(const EnsembleSpec& spec, Philox4x32& rng);

}  // namespace realeig
