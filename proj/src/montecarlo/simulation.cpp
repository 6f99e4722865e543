#include "realeig/montecarlo/simulation.hpp"

#include <cmath>
#include <string>

#include "realeig/errors.hpp"
#include "realeig/montecarlo/sampling.hpp"
#include "realeig/montecarlo/schur.hpp"
#include "realeig/parallel.hpp"

namespace realeig {

namespace {

constexpr long kChunk = 64;

struct ChunkTotals {
  long trials = 0;
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  long failures = 0;
  long parity_violations = 0;
  long first_violation = -1;
  std::vector<long> counts;
  long outside = 0;
};

}  // namespace

void HistogramSpec::validate() const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("histogram: need finite lo < hi");
  if (bins < 1) throw DomainError("histogram: need at least one bin");
}

double Histogram::normalized(int i) const {
  long total = outside;
  for (long c : counts) total += c;
  if (total == 0) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(i)]) / (static_cast<double>(total) * spec.width());
}

double Histogram::density(int i, long trials) const {
  return static_cast<double>(counts[static_cast<std::size_t>(i)]) / (static_cast<double>(trials) * spec.width());
}

double Histogram::density_err(int i, long trials) const {
  // Several eigenvalues of one trial can share a bin, but per-bin counts per
  // trial are almost always 0 or 1, so the Poisson form is used.
  return std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(i)])) /
         (static_cast<double>(trials) * spec.width());
}

SimulationEstimate estimate_expected_real(const EnsembleSpec& spec, long trials, std::uint64_t seed, int threads,
                                          const std::optional<HistogramSpec>& histogram) {
  spec.validate();
  if (trials < 100) throw DomainError("estimate_expected_real: requires at least 100 trials");
  if (threads < 1) throw DomainError("estimate_expected_real: threads must be positive");
  if (histogram) histogram->validate();

  const long chunks = (trials + kChunk - 1) / kChunk;
  std::vector<ChunkTotals> parts(static_cast<std::size_t>(chunks));
  parallel_for(parts.size(), threads, [&](std::size_t c) {
    ChunkTotals& acc = parts[c];
    if (histogram) acc.counts.assign(static_cast<std::size_t>(histogram->bins), 0);
    const long begin = static_cast<long>(c) * kChunk;
    const long end = std::min(trials, begin + kChunk);
    for (long t = begin; t < end; ++t) {
      Philox4x32 rng(seed, static_cast<std::uint64_t>(t));
      const Eigen::MatrixXd x = sample_product(spec, rng);
      std::vector<double> eigs;
      try {
        eigs = real_eigs(x);
      } catch (const SchurNoConvergence&) {
        ++acc.failures;
        continue;
      }
      const auto n = static_cast<std::int64_t>(eigs.size());
      if ((n - spec.N) % 2 != 0) {
        if (acc.first_violation < 0) acc.first_violation = t;
        ++acc.parity_violations;
      }
      ++acc.trials;
      acc.sum += n;
      acc.sum_sq += n * n;
      if (histogram) {
        for (double v : eigs) {
          const double pos = (v - histogram->lo) / histogram->width();
          if (pos >= 0.0 && pos < histogram->bins) {
            ++acc.counts[static_cast<std::size_t>(pos)];
          } else {
            ++acc.outside;
          }
        }
      }
    }
  });

  ChunkTotals all;
  if (histogram) all.counts.assign(static_cast<std::size_t>(histogram->bins), 0);
  for (const auto& p : parts) {
    all.trials += p.trials;
    all.sum += p.sum;
    all.sum_sq += p.sum_sq;
    all.failures += p.failures;
    all.parity_violations += p.parity_violations;
    if (all.first_violation < 0) all.first_violation = p.first_violation;
    all.outside += p.outside;
    for (std::size_t i = 0; i < p.counts.size(); ++i) all.counts[i] += p.counts[i];
  }
  if (all.parity_violations > 0) {
    throw Error("estimate_expected_real: " + std::to_string(all.parity_violations) +
                " trials with a real-eigenvalue count of the wrong parity (first at trial " +
                std::to_string(all.first_violation) + ")");
  }
  if (static_cast<double>(all.failures) > 1e-3 * static_cast<double>(trials)) {
    throw SchurNoConvergence("estimate_expected_real: " + std::to_string(all.failures) + " of " +
                             std::to_string(trials) + " trials failed the Schur iteration");
  }
  if (all.trials < 2) throw SchurNoConvergence("estimate_expected_real: fewer than two usable trials");

  SimulationEstimate est;
  est.ensemble = spec;
  est.trials = all.trials;
  est.seed = seed;
  est.schur_failures = all.failures;
  const auto n = static_cast<__int128>(all.trials);
  const __int128 num = n * all.sum_sq - static_cast<__int128>(all.sum) * all.sum;
  const double nd = static_cast<double>(all.trials);
  est.mean = static_cast<double>(all.sum) / nd;
  const double variance = static_cast<double>(num) / (nd * (nd - 1.0));
  est.std_error = std::sqrt(variance / nd);
  if (histogram) est.histogram = Histogram{*histogram, all.counts, all.outside};
  return est;
}

}  // namespace realeig
