#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "realeig/errors.hpp"
#include "realeig/exactdensity.hpp"
#include "realeig/montecarlo/sampling.hpp"
#include "realeig/montecarlo/schur.hpp"
#include "realeig/montecarlo/simulation.hpp"
#include "realeig/rng.hpp"

using namespace realeig;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd rotation(double angle) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

EnsembleSpec truncated(int N, int L, int m) { return {N, L, m, EnsembleKind::TruncatedOrthogonal}; }

}  // namespace

TEST(Philox, KnownAnswerVectors) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::bijection(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::bijection(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::bijection(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreIndependentAndReproducible) {
  Philox4x32 a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  int same_stream = 0, same_seed = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    same_stream += x == c();
    same_seed += x == d();
  }
  EXPECT_LT(same_stream, 2);
  EXPECT_LT(same_seed, 2);
}

TEST(Philox, UniformIsInsideOpenInterval) {
  Philox4x32 rng(3, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST(CountRealEigs, SmallExamples) {
  EXPECT_EQ(count_real_eigs(Eigen::MatrixXd::Identity(3, 3)), 3);
  EXPECT_EQ(count_real_eigs(rotation(kPi / 2)), 0);
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_EQ(count_real_eigs(swap), 2);
}

TEST(CountRealEigs, RejectsNonFiniteEntries) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(count_real_eigs(m), DomainError);
}

TEST(RealEigs, BlockValues) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = -0.25;
  auto v = real_eigs(d);
  std::sort(v.begin(), v.end());
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0], -0.25, 1e-15);
  EXPECT_NEAR(v[1], 0.5, 1e-15);

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  b.topLeftCorner(2, 2) = rotation(kPi / 3);
  b(2, 2) = 0.7;
  v = real_eigs(b);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NEAR(v[0], 0.7, 1e-14);
}

TEST(RealEigs, TruncatedProductsHaveEigenvaluesInsideUnitInterval) {
  Philox4x32 rng(6, 0);
  for (int i = 0; i < 200; ++i) {
    const auto M = sample_product(truncated(7, 2, 2), rng);
    const auto v = real_eigs(M);
    EXPECT_EQ(static_cast<int>(v.size()), count_real_eigs(M));
    for (double x : v) {
      EXPECT_GT(x, -1.0);
      EXPECT_LT(x, 1.0);
    }
  }
}

TEST(CountRealEigs, ScaleInvariantAndParity) {
  Philox4x32 rng(7, 0);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 9;
    const Eigen::MatrixXd M = sample_gaussian(n, n, rng);
    const int c = count_real_eigs(M);
    EXPECT_EQ(c % 2, n % 2);
    EXPECT_EQ(count_real_eigs(0.1 * M), c);
    EXPECT_EQ(count_real_eigs(10.0 * M), c);
  }
}

TEST(HaarOrthogonal, OrthogonalityAndDeterminant) {
  Philox4x32 rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const auto Q = sample_haar_orthogonal(30, rng);
    const double resid = (Q.transpose() * Q - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff();
    EXPECT_LE(resid, 1e-12);
    EXPECT_NEAR(std::fabs(Q.determinant()), 1.0, 1e-10);
  }
}

TEST(HaarOrthogonal, LeadingColumnsAreOrthonormal) {
  Philox4x32 rng(10, 0);
  for (int i = 0; i < 100; ++i) {
    const auto Q = sample_haar_columns(40, 7, rng);
    ASSERT_EQ(Q.rows(), 40);
    ASSERT_EQ(Q.cols(), 7);
    EXPECT_LE((Q.transpose() * Q - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HaarOrthogonal, FirstEntrySecondMoment) {
  Philox4x32 rng(12, 0);
  const int n = 10;
  const long draws = 100000;
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double q = sample_haar_orthogonal(n, rng)(0, 0);
    s += q * q;
    s2 += q * q * q * q;
  }
  const double mean = s / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, 1.0 / n, 3.0 * se);
}

TEST(HaarOrthogonal, SignCorrectionRemovesDiagonalBias) {
  // Householder QR fixes the sign of R_11, so without the correction Q_11
  // would always have one sign. With it, E[Q_11] = 0.
  Philox4x32 rng(13, 0);
  const long draws = 100000;
  double s = 0.0;
  for (long i = 0; i < draws; ++i) s += sample_haar_orthogonal(4, rng)(0, 0);
  EXPECT_NEAR(s / draws, 0.0, 3.0 * std::sqrt(0.25 / draws));
}

TEST(SampleProduct, TruncatedFactorsAreContractions) {
  Philox4x32 rng(14, 0);
  for (int i = 0; i < 100; ++i) {
    const auto M = sample_product(truncated(6, 3, 1), rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    EXPECT_LE(svd.singularValues()(0), 1.0 + 1e-10);
  }
}

TEST(SampleProduct, HeavilyTruncatedEntriesAreNearlyGaussian) {
  const int N = 5, L = 50 * N;
  Philox4x32 rng(15, 0);
  const long draws = 10000;
  double s2 = 0.0, s4 = 0.0;
  long n = 0;
  for (long i = 0; i < draws; ++i) {
    const Eigen::MatrixXd M = std::sqrt(static_cast<double>(L)) * sample_product(truncated(N, L, 1), rng);
    for (double v : M.reshaped()) {
      s2 += v * v;
      s4 += v * v * v * v;
      ++n;
    }
  }
  // A coordinate of a uniform point on the sphere in R^d has kurtosis
  // 3 d / (d + 2), which tends to the Gaussian 3 but is still 2.4 standard
  // errors below it at d = 255 and this sample size.
  const double d = N + L;
  const double m2 = s2 / n, kurt = (s4 / n) / (m2 * m2);
  EXPECT_NEAR(kurt, 3.0 * d / (d + 2.0), 3.0 * std::sqrt(24.0 / n));
  EXPECT_LT(std::fabs(kurt - 3.0), 0.05);
}

TEST(SampleProduct, DeterminantIsMultiplicative) {
  // Same stream, so the product is assembled from the same factors.
  for (int seed = 0; seed < 10; ++seed) {
    Philox4x32 a(100 + seed, 0), b(100 + seed, 0);
    const auto P = sample_product(truncated(6, 2, 3), a);
    const Eigen::MatrixXd F1 = sample_haar_columns(8, 6, b).topRows(6);
    const Eigen::MatrixXd F2 = sample_haar_columns(8, 6, b).topRows(6);
    const Eigen::MatrixXd F3 = sample_haar_columns(8, 6, b).topRows(6);
    const double lhs = P.determinant();
    const double rhs = F1.determinant() * F2.determinant() * F3.determinant();
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-8);
  }
}

TEST(EstimateExpectedReal, MatchesExactForSizeTwo) {
  const auto est = estimate_expected_real(truncated(2, 2, 1), 100000, 21, 1);
  EXPECT_EQ(est.trials, 100000);
  EXPECT_EQ(est.schur_failures, 0);
  const double exact = expected_real_quadrature(SeriesParams::make(2, 2, 1)).value;
  EXPECT_NEAR(est.mean, exact, 3.0 * est.std_error);
}

TEST(EstimateExpectedReal, GinibreMatchesSquareRootLaw) {
  const auto est = estimate_expected_real({50, 0, 1, EnsembleKind::RealGinibre}, 10000, 22, 1);
  EXPECT_NEAR(est.mean, std::sqrt(2.0 * 50 / kPi), std::max(3.0 * est.std_error, 1.0));
}

TEST(EstimateExpectedReal, ParityOnSeveralEnsembles) {
  // A parity violation throws, so completing is the check; the mean must
  // also respect the bounds.
  for (auto spec : {truncated(3, 1, 2), truncated(4, 2, 3), EnsembleSpec{5, 0, 2, EnsembleKind::RealGinibre}}) {
    SimulationEstimate est;
    ASSERT_NO_THROW(est = estimate_expected_real(spec, 50000, 23, 1));
    EXPECT_GE(est.mean, spec.N % 2);
    EXPECT_LE(est.mean, spec.N);
  }
}

TEST(EstimateExpectedReal, IdenticalAcrossThreadCounts) {
  const HistogramSpec h{-1.0, 1.0, 20};
  const auto a = estimate_expected_real(truncated(6, 2, 2), 20000, 24, 1, h);
  for (int threads : {4, 16}) {
    const auto b = estimate_expected_real(truncated(6, 2, 2), 20000, 24, threads, h);
    EXPECT_EQ(std::memcmp(&a.mean, &b.mean, sizeof(double)), 0) << threads;
    EXPECT_EQ(std::memcmp(&a.std_error, &b.std_error, sizeof(double)), 0) << threads;
    EXPECT_EQ(a.histogram->counts, b.histogram->counts) << threads;
    EXPECT_EQ(a.histogram->outside, b.histogram->outside) << threads;
  }
}

TEST(EstimateExpectedReal, RejectsTooFewTrials) {
  EXPECT_THROW(estimate_expected_real(truncated(4, 2, 1), 99, 1, 1), DomainError);
  EXPECT_THROW(estimate_expected_real(truncated(4, 0, 1), 1000, 1, 1), DomainError);
}

TEST(EstimateExpectedReal, StandardErrorMatchesSampleVariance) {
  // For N = 2 the count is 0 or 2, so the variance follows from the mean.
  const long trials = 40000;
  const auto est = estimate_expected_real(truncated(2, 3, 1), trials, 25, 1);
  const double p = est.mean / 2.0;
  const double sd = 2.0 * std::sqrt(p * (1.0 - p) * trials / (trials - 1.0));
  EXPECT_NEAR(est.std_error, sd / std::sqrt(static_cast<double>(trials)), 1e-12);
}

TEST(EstimateExpectedReal, HistogramMatchesExactDensity) {
  const long trials = 1000000;
  const HistogramSpec spec{-1.0, 1.0, 40};
  const auto est = estimate_expected_real(truncated(8, 2, 1), trials, 26, 1, spec);
  const auto& h = *est.histogram;
  const auto p = SeriesParams::make(8, 2, 1);
  const double e = expected_real_quadrature(p).value;
  long total = h.outside;
  for (long c : h.counts) total += c;
  int within = 0;
  for (int i = 0; i < spec.bins; ++i) {
    const double cell = density_cell_integral(h.bin_left(i), h.bin_right(i), p).value / (e * spec.width());
    const double sigma =
        std::sqrt(static_cast<double>(h.counts[static_cast<std::size_t>(i)])) / (total * spec.width());
    within += std::fabs(h.normalized(i) - cell) <= 3.0 * sigma;
  }
  EXPECT_GE(within, 38);
  EXPECT_EQ(h.outside, 0);
}
