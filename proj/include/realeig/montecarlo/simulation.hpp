#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "realeig/ensemble.hpp"

namespace realeig {

/// Equal-width bins on [lo, hi).
struct HistogramSpec {
  double lo = -1.0;
  double hi = 1.0;
  int bins = 40;

  void validate() const;
  double width() const { return (hi - lo) / bins; }
  /// Edges are exact at both ends, and mirror images of each other bit for
  /// bit when lo = -hi.
  double bin_left(int i) const {
    if (i <= 0) return lo;
    if (i >= bins) return hi;
    return ((bins - i) * lo + i * hi) / bins;
  }
  double bin_right(int i) const { return bin_left(i + 1); }
};

struct Histogram {
  HistogramSpec spec;
  std::vector<long> counts;
  /// Eigenvalues outside [lo, hi).
  long outside = 0;

  double bin_left(int i) const { return spec.bin_left(i); }
  double bin_right(int i) const { return spec.bin_right(i); }
  /// counts / (all real eigenvalues * width): estimates rho_N / E(N_R).
  double normalized(int i) const;
  /// counts / (trials * width): estimates rho_N, with its standard error.
  double density(int i, long trials) const;
  double density_err(int i, long trials) const;
};

struct SimulationEstimate {
  EnsembleSpec ensemble;
  double mean = 0.0;
  double std_error = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
  /// Trials dropped because the Schur iteration did not converge.
  long schur_failures = 0;
  std::optional<Histogram> histogram;
};

/// Mean number of real eigenvalues over `trials` independent products.
/// Trial t draws from Philox4x32(seed, t), and counts are accumulated as
/// exact integers, so the result is identical for every thread count.
/// Throws Error on a parity violation (count != N mod 2) and
/// SchurNoConvergence when more than 0.1% of trials fail.
SimulationEstimate estimate_expected_real(const EnsembleSpec& spec, long trials, std::uint64_t seed, int threads,
                                          const std::optional<HistogramSpec>& histogram = std::nullopt);

}  // namespace realeig
