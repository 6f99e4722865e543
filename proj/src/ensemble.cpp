#include "realeig/ensemble.hpp"

#include "realeig/errors.hpp"

namespace realeig {

std::string to_string(EnsembleKind k) {
  return k == EnsembleKind::TruncatedOrthogonal ? "TruncatedOrthogonal" : "RealGinibre";
}

EnsembleKind parse_ensemble_kind(const std::string& s) {
  if (s == "truncated" || s == "orthogonal" || s == "TruncatedOrthogonal") return EnsembleKind::TruncatedOrthogonal;
  if (s == "ginibre" || s == "RealGinibre") return EnsembleKind::RealGinibre;
  throw DomainError("unknown ensemble '" + s + "' (expected truncated or ginibre)");
}

void EnsembleSpec::validate() const {
  if (N < 1) throw DomainError("EnsembleSpec: N must be >= 1");
  if (m < 1) throw DomainError("EnsembleSpec: m must be >= 1");
  if (L < 0) throw DomainError("EnsembleSpec: L must be >= 0");
  if (kind == EnsembleKind::TruncatedOrthogonal && L < 1) {
    throw DomainError("EnsembleSpec: truncated orthogonal ensemble needs L >= 1");
  }
}

}  // namespace realeig
