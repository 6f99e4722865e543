#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "realeig/errors.hpp"
#include "realeig/numerics/quadrature.hpp"
#include "realeig/numerics/special.hpp"
#include "realeig/rng.hpp"
#include "realeig/weights.hpp"

using namespace realeig;

namespace {

constexpr double kPi = std::numbers::pi;

const QuadratureSpec kSingular = QuadratureSpec{}.with_rule(QuadratureRule::TanhSinh).with_rel_tol(1e-10);

double w(double x, int L, int m) { return weight_product(x, L, m).to_double(); }

// Integral of the weight over [lo, hi] with lo, hi on the same side of 0.
// Near |x| = 1 the weight is evaluated from the exact distance to the
// edge, where it may diverge (L = 1).
double cell_mass(int L, int m, double lo, double hi) {
  const auto table = WeightTable::get(L, m);
  return integrate_endpoint(
             [&](double x, double from_a, double to_b) {
               if (x == 0.0) return 0.0;
               const double gap = x < 0.0 ? from_a + (1.0 + lo) : to_b + (1.0 - hi);
               return gap < 0.5 ? table->weight_from_gap(gap).to_double() : table->weight(x).to_double();
             },
             lo, hi, kSingular)
      .value;
}

double mass_by_quadrature(int L, int m) { return 2.0 * cell_mass(L, m, 0.0, 1.0); }

// Counts trend violations in a sequence that should decrease.
int increases(const std::vector<double>& v) {
  int n = 0;
  for (std::size_t i = 1; i < v.size(); ++i) n += v[i] >= v[i - 1];
  return n;
}

}  // namespace

TEST(WeightBase, ClosedFormValues) {
  EXPECT_NEAR(weight_base(0.3, 2).to_double(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(weight_base(-0.3, 2).to_double(), std::sqrt(0.5), 1e-12);
  EXPECT_TRUE(weight_base(1.0, 4).is_zero());
  // L = 4: (4 / (2 B(2, 1/2)))^{1/2} (1 - x^2), B(2, 1/2) = 4/3.
  EXPECT_NEAR(weight_base(0.5, 4).to_double(), std::sqrt(1.5) * 0.75, 1e-12);
}

TEST(WeightBase, DomainErrors) {
  EXPECT_THROW(weight_base(1.5, 2), DomainError);
  EXPECT_THROW(weight_base(-1.0, 1), DomainError);
  EXPECT_THROW(weight_base(0.5, 0), DomainError);
}

TEST(WeightProduct, SingleFactorIsTheBase) {
  EXPECT_NEAR(w(0.3, 2, 1), std::sqrt(0.5), 1e-10);
  for (int L = 1; L <= 5; ++L) {
    for (double x : {0.05, 0.4, 0.9}) EXPECT_NEAR(w(x, L, 1), weight_base(x, L).to_double(), 1e-10 * w(x, L, 1));
  }
}

TEST(WeightProduct, TwoUniformFactorsGiveLogarithm) {
  // L = 2: each factor is flat with height sqrt(1/2); the two-fold
  // convolution 2 int_x^1 dy / y gives -ln|x| after the factor 1/2.
  for (double x : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    EXPECT_NEAR(w(x, 2, 2), -std::log(x), 1e-8 * w(x, 2, 2)) << x;
  }
}

TEST(WeightProduct, MassIdentityOnGrid) {
  for (int L = 1; L <= 4; ++L) {
    for (int m = 1; m <= 3; ++m) {
      const double expect = std::pow(0.5 * L * std::exp(log_beta(0.5 * L, 0.5)), 0.5 * m);
      EXPECT_NEAR(mass_by_quadrature(L, m) / expect, 1.0, 1e-6) << "L=" << L << " m=" << m;
    }
  }
  EXPECT_NEAR(mass_by_quadrature(2, 2), 2.0, 2e-6);
}

TEST(WeightProduct, EvenInX) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int L = 1; L <= 4; ++L) {
    for (int m = 1; m <= 3; ++m) {
      for (int k = 0; k < 100; ++k) {
        const double x = u(gen);
        if (x == 0.0 || std::fabs(x) == 1.0) continue;
        EXPECT_NEAR(w(x, L, m), w(-x, L, m), 1e-10 * w(x, L, m));
      }
    }
  }
  EXPECT_EQ(w(0.4, 3, 2), w(-0.4, 3, 2));
}

TEST(WeightProduct, InfiniteAtZeroForSeveralFactors) {
  EXPECT_TRUE(weight_product(0.0, 2, 2).is_infinite());
  EXPECT_FALSE(weight_product(0.0, 2, 1).is_infinite());
}

TEST(WeightProduct, MatchesMellinInversion) {
  for (auto [L, m] : {std::pair{3, 2}, std::pair{8, 1}, std::pair{2, 3}, std::pair{4, 2}}) {
    for (double x : {0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95}) {
      const double a = w(x, L, m);
      const double b = weight_mellin(x, L, m).to_double();
      EXPECT_NEAR(a / b, 1.0, 1e-6) << "L=" << L << " m=" << m << " x=" << x;
    }
  }
}

TEST(WeightProduct, MatchesHistogramOfSampledProducts) {
  // y^2 ~ Beta(1/2, L/2) with a random sign has density proportional to
  // (1 - y^2)^{L/2 - 1}.
  for (auto [L, m] : {std::pair{3, 2}, std::pair{4, 3}}) {
    Philox4x32 rng(2024, static_cast<std::uint64_t>(10 * L + m));
    std::gamma_distribution<double> ga(0.5), gb(0.5 * L);
    const int bins = 40;
    const long draws = 1000000;
    std::vector<long> counts(bins, 0);
    for (long i = 0; i < draws; ++i) {
      double p = 1.0;
      for (int k = 0; k < m; ++k) {
        const double a = ga(rng), b = gb(rng);
        p *= std::sqrt(a / (a + b)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      }
      const int bin = std::min(bins - 1, static_cast<int>((p + 1.0) * 0.5 * bins));
      ++counts[static_cast<std::size_t>(bin)];
    }
    const double total = mass_by_quadrature(L, m);
    const double width = 2.0 / bins;
    int outliers = 0;
    for (int b = 0; b < bins; ++b) {
      const double lo = -1.0 + 2.0 * b / bins, hi = -1.0 + 2.0 * (b + 1) / bins;
      const double cell = cell_mass(L, m, lo, hi) / total;
      const double expect = cell * draws;
      const double z = (counts[static_cast<std::size_t>(b)] - expect) / std::sqrt(expect);
      outliers += std::fabs(z) > 3.0;
    }
    EXPECT_EQ(outliers, 0) << "L=" << L << " m=" << m;
  }
}

TEST(WeightTable, NodesReproduceStoredValues) {
  const auto t = WeightTable::get(3, 2);
  const auto grid = t->grid();
  const auto vals = t->log_values();
  ASSERT_EQ(grid.size(), vals.size());
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_LT(grid[i - 1], grid[i]);
  for (std::size_t i = 0; i < grid.size(); i += 7) {
    EXPECT_EQ(vals[i].sign, 1);
    if (std::isinf(vals[i].log_mag)) {
      EXPECT_EQ(t->log_h(-std::log(grid[i])), vals[i].log_mag);
      continue;
    }
    EXPECT_NEAR(t->log_h(-std::log(grid[i])), vals[i].log_mag, 1e-12 * std::max(1.0, std::fabs(vals[i].log_mag)));
  }
}

TEST(WeightAsymptotic, ExactForUniformFactor) {
  EXPECT_NEAR(weight_asymptotic(0.5, 2, 1).to_double(), std::sqrt(0.5), 1e-12);
  EXPECT_EQ(weight_asymptotic(0.3, 7, 3).sign, 1);
  EXPECT_THROW(weight_asymptotic(0.0, 2, 2), DomainError);
  EXPECT_THROW(weight_asymptotic(1.0, 2, 2), DomainError);
}

TEST(WeightAsymptotic, ErrorDecaysAsLDoubles) {
  std::vector<double> errs;
  for (int L : {8, 16, 32, 64}) {
    const double a = weight_asymptotic(0.5, L, 2).log_mag;
    const double e = weight_product(0.5, L, 2).log_mag;
    errs.push_back(std::fabs(std::expm1(a - e)));
  }
  EXPECT_LE(increases(errs), 1);
  EXPECT_LT(errs.back(), errs.front());
}

TEST(GinibreWeight, ClosedForms) {
  EXPECT_NEAR(ginibre_weight(1.2, 1).to_double(), std::exp(-0.72), 1e-14);
  EXPECT_NEAR(ginibre_weight(1.0, 2).to_double(), 2.0 * std::cyl_bessel_k(0.0, 1.0), 1e-10);
  // 2 K_0(1) = 0.84204887648...; the commonly quoted 0.8420488368 is off
  // in the eighth digit.
  EXPECT_NEAR(ginibre_weight(1.0, 2).to_double(), 0.8420488368, 1e-7);
  EXPECT_TRUE(ginibre_weight(0.0, 2).is_infinite());
}

TEST(GinibreWeight, MassIsGaussianNormalisation) {
  for (int m : {1, 2, 3}) {
    const double mass =
        2.0 * integrate([&](double t) { return t == 0.0 ? 0.0 : ginibre_weight(t, m).to_double(); }, 0.0, 60.0,
                        kSingular)
                  .value;
    EXPECT_NEAR(mass / std::pow(2.0 * kPi, 0.5 * m), 1.0, 1e-7) << m;
  }
}

TEST(GinibreWeightAsymptotic, SingleFactorIsExact) {
  EXPECT_NEAR(ginibre_weight_asymptotic(0.5, 4, 1).to_double(), std::exp(-0.5), 1e-14);
  EXPECT_EQ(ginibre_weight_asymptotic(-0.7, 9, 3).sign, 1);
  EXPECT_THROW(ginibre_weight_asymptotic(0.0, 4, 2), DomainError);
}

TEST(GinibreWeightAsymptotic, ErrorDecaysAsNDoubles) {
  std::vector<double> errs;
  for (int N : {16, 32, 64}) {
    const double t = N * 0.6;
    const double a = ginibre_weight_asymptotic(0.6, N, 2).log_mag;
    const double e = ginibre_weight(t, 2).log_mag;
    errs.push_back(std::fabs(std::expm1(a - e)));
  }
  EXPECT_EQ(increases(errs), 0);
}
