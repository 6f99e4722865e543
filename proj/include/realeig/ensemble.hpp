#pragma once

#include <string>

namespace realeig {

enum class EnsembleKind { TruncatedOrthogonal, RealGinibre };

std::string to_string(EnsembleKind k);
/// Accepts "truncated"/"orthogonal"/"TruncatedOrthogonal" and
/// "ginibre"/"RealGinibre". Throws DomainError otherwise.
EnsembleKind parse_ensemble_kind(const std::string& s);

/// A product of m N x N factors. For TruncatedOrthogonal each factor is
/// the top-left N x N block of an (N + L) x (N + L) Haar orthogonal matrix.
struct EnsembleSpec {
  int N = 2;
  int L = 1;
  int m = 1;
  EnsembleKind kind = EnsembleKind::TruncatedOrthogonal;

  /// Throws DomainError on N < 1, m < 1, L < 0, or L = 0 for the
  /// truncated ensemble.
  void validate() const;
  bool operator==(const EnsembleSpec&) const = default;
};

}  // namespace realeig
