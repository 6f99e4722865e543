#include "realeig/montecarlo/schur.hpp"

#include "realeig/errors.hpp"

namespace realeig {

namespace {

Eigen::MatrixXd schur_form(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw DomainError("real Schur form: matrix must be square");
  if (!M.allFinite()) throw DomainError("real Schur form: non-finite entry");
  if (M.rows() == 0) return M;
  Eigen::RealSchur<Eigen::MatrixXd> schur(M, false);
  if (schur.info() != Eigen::Success) {
    throw SchurNoConvergence("real Schur form: QR iteration did not converge for n=" + std::to_string(M.rows()));
  }
  return schur.matrixT();
}

template <typename Visit>
void walk_blocks(const Eigen::MatrixXd& t, Visit visit) {
  const Eigen::Index n = t.rows();
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      i += 2;
    } else {
      visit(t(i, i));
      ++i;
    }
  }
}

}  // namespace

int count_real_eigs(const Eigen::MatrixXd& M) {
  int count = 0;
  walk_blocks(schur_form(M), [&](double) { ++count; });
  return count;
}

std::vector<double> real_eigs(const Eigen::MatrixXd& M) {
  std::vector<double> out;
  walk_blocks(schur_form(M), [&](double v) { out.push_back(v); });
  return out;
}

}  // namespace realeig
