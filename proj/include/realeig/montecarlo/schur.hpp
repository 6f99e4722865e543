#pragma once

#include <vector>

#include <Eigen/Dense>

namespace realeig {

/// Number of 1 x 1 diagonal blocks in the real Schur form of M. Eigen's
/// RealSchur writes an exact zero below every block it splits off as real,
/// so no tolerance is involved. Throws SchurNoConvergence when the QR
/// iteration hits its cap and DomainError on non-finite entries.
int count_real_eigs(const Eigen::MatrixXd& M);

/// The 1 x 1 Schur block values, in Schur order.
std::vector<double> real_eigs(const Eigen::MatrixXd& M);

}  // namespace realeig
