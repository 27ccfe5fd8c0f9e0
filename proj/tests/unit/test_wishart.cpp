#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "polwishart/wishart.hpp"
#include "test_util.hpp"

namespace pw = polwishart;
using pw::ErrorCode;
using pw::HermitianMatrix;
using pw::WishartParams;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate_half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, kInf, 1e-13);
}

HermitianMatrix scalar(double v) { return HermitianMatrix::diagonal({v}); }

}  // namespace

TEST(Params, Validation) {
  EXPECT_ERROR_CODE(WishartParams(2.0, HermitianMatrix::identity(3)), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(WishartParams(2.0 + 1e-7, HermitianMatrix::identity(3)),
                    ErrorCode::DomainError);
  EXPECT_NO_THROW(WishartParams(2.0 + 1e-5, HermitianMatrix::identity(3)));
  EXPECT_ERROR_CODE(WishartParams(4.0, HermitianMatrix::diagonal({1.0, -1.0})),
                    ErrorCode::NotPositiveDefinite);
}

TEST(MatrixSampleType, Invariants) {
  EXPECT_ERROR_CODE(pw::MatrixSample(std::vector<HermitianMatrix>{}), ErrorCode::EmptySample);
  EXPECT_ERROR_CODE(
      pw::MatrixSample({HermitianMatrix::identity(2), HermitianMatrix::identity(3)}),
      ErrorCode::DimensionMismatch);
}

TEST(LogDensity, UnitExponentialAtOne) {
  EXPECT_NEAR(pw::log_density(WishartParams(1.0, scalar(1.0)), scalar(1.0)), -1.0, 1e-15);
}

TEST(LogDensity, IntegratesToOneAtPOne) {
  for (double looks : {1.0, 4.0, 8.0}) {
    for (double s2 : {1.0, 10.0}) {
      const WishartParams params(looks, scalar(s2));
      const double total = integrate_half_line(
          [&](double z) { return z > 0 ? std::exp(pw::log_density(params, scalar(z))) : 0.0; });
      EXPECT_NEAR(total, 1.0, 1e-8) << "L=" << looks << " s2=" << s2;
    }
  }
}

TEST(LogDensity, IntegratesToOneAtPTwo) {
  // Importance sampling over (z11, z22, Re z12, Im z12): z11, z22 ~ Exp(1) and z12
  // uniform on the disk |z12|^2 < z11 z22, which is the positive-definite region.
  const WishartParams law(3.0, HermitianMatrix::from_row_major(2, {{1.5, 0.0}, {0.3, 0.2},
                                                                   {0.3, -0.2}, {0.8, 0.0}}));
  pw::Xoshiro256 rng(2024);
  constexpr int kDraws = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < kDraws; ++k) {
    const double z11 = -std::log(rng.uniform_open_closed());
    const double z22 = -std::log(rng.uniform_open_closed());
    const double radius = std::sqrt(z11 * z22 * rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const pw::Complex z12 = std::polar(radius, angle);
    const auto z = HermitianMatrix::from_row_major(2, {{z11, 0.0}, z12, std::conj(z12), {z22, 0.0}});
    const double log_q = -z11 - z22 - std::log(std::numbers::pi * z11 * z22);
    const double w = std::exp(pw::log_density(law, z) - log_q);
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(mean, 1.0, 4.0 * se);
  EXPECT_LT(se, 0.02);
}

TEST(LogDensity, ForestMatrixMatchesDirectTranscription) {
  const auto b = oracle::matrix_b();
  EXPECT_NEAR(pw::log_density(WishartParams(4.0, b), b), oracle::wishart_log_density(4.0, b, b),
              1e-9);
}

TEST(LogDensity, RandomFixturesMatchDirectTranscription) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const std::size_t p = 1 + seed % 4;
    const double looks = static_cast<double>(p) - 1.0 + 0.25 + static_cast<double>(seed % 9);
    const auto sigma = oracle::random_pd(p, seed, 3.0);
    const auto z = oracle::random_pd(p, seed + 500);
    EXPECT_NEAR(pw::log_density(WishartParams(looks, sigma), z),
                oracle::wishart_log_density(looks, sigma, z), 1e-9)
        << "seed " << seed;
  }
}

TEST(LogDensity, Errors) {
  const WishartParams params(4.0, HermitianMatrix::identity(3));
  EXPECT_ERROR_CODE(pw::log_density(params, HermitianMatrix::identity(2)),
                    ErrorCode::DimensionMismatch);
  EXPECT_ERROR_CODE(pw::log_density(params, HermitianMatrix::diagonal({1.0, 1.0, 0.0})),
                    ErrorCode::NotPositiveDefinite);
}

TEST(LogNormalizingConstant, MatchesDensityAtZeroTraceLimit) {
  // log f = c + (L - p) log|Z| - L tr(Sigma^{-1} Z); check at Z = Sigma.
  const auto b = oracle::matrix_b();
  const WishartParams params(6.0, b);
  const double expected = pw::log_normalizing_constant(params) + (6.0 - 3.0) * pw::log_det(b) - 6.0 * 3.0;
  EXPECT_NEAR(pw::log_density(params, b), expected, 1e-9);
}

TEST(GammaMarginal, Examples) {
  EXPECT_NEAR(pw::gamma_marginal_log_density(1.0, 1.0, 0.5), -0.5, 1e-15);
  for (double looks : {1.5, 4.0, 8.0}) {
    EXPECT_LT(std::exp(pw::gamma_marginal_log_density(1.0, looks, 1e-12)), 1e-5);
  }
  const double mass = integrate_half_line(
      [](double z) { return z > 0 ? std::exp(pw::gamma_marginal_log_density(2.0, 8.0, z)) : 0.0; });
  const double mean = integrate_half_line([](double z) {
    return z > 0 ? z * std::exp(pw::gamma_marginal_log_density(2.0, 8.0, z)) : 0.0;
  });
  EXPECT_NEAR(mass, 1.0, 1e-8);
  EXPECT_NEAR(mean, 2.0, 1e-6);
}

TEST(GammaMarginal, AgreesWithScalarDensity) {
  for (double looks : {0.5, 1.0, 3.7, 12.0}) {
    for (double s2 : {0.3, 1.0, 250.0}) {
      for (double z : {0.01, 0.7, 5.0, 900.0}) {
        EXPECT_NEAR(pw::log_density(WishartParams(looks, scalar(s2)), scalar(z)),
                    pw::gamma_marginal_log_density(s2, looks, z), 1e-12);
      }
    }
  }
}

TEST(GammaMarginal, DomainError) {
  EXPECT_ERROR_CODE(pw::gamma_marginal_log_density(0.0, 1.0, 1.0), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::gamma_marginal_log_density(1.0, -1.0, 1.0), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::gamma_marginal_log_density(1.0, 1.0, 0.0), ErrorCode::DomainError);
}

TEST(Sample, DeterministicGivenSeed) {
  const WishartParams params(8.0, oracle::matrix_b());
  EXPECT_EQ(pw::sample(params, 50, 99), pw::sample(params, 50, 99));
  EXPECT_FALSE(pw::sample(params, 50, 99) == pw::sample(params, 50, 100));
}

TEST(Sample, PrefixStable) {
  // Observation i depends only on (seed, i).
  const WishartParams params(4.0, oracle::matrix_b());
  const auto small = pw::sample(params, 10, 5);
  const auto large = pw::sample(params, 30, 5);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(small[i], large[i]);
}

TEST(Sample, SingleLookScalarIsUnitExponential) {
  const auto s = pw::sample(WishartParams(1.0, scalar(1.0)), 100000, 2024);
  std::vector<double> xs;
  for (const auto& m : s) xs.push_back(m(0, 0).real());
  const double d = oracle::ks_statistic(xs, [](double x) { return -std::expm1(-x); });
  EXPECT_GT(oracle::ks_p_value(d, xs.size()), 0.01) << "KS D = " << d;
}

TEST(Sample, MeanIsSigma) {
  const auto b = oracle::matrix_b();
  const std::size_t n = 10000;
  const auto s = pw::sample(WishartParams(8.0, b), n, 31);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (int part = 0; part < 2; ++part) {
        auto get = [&](const HermitianMatrix& m) {
          return part == 0 ? m(i, j).real() : m(i, j).imag();
        };
        double sum = 0.0, sum2 = 0.0;
        for (const auto& m : s) {
          sum += get(m);
          sum2 += get(m) * get(m);
        }
        const double mean = sum / n;
        const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
        EXPECT_LT(std::abs(mean - get(b)), 4.0 * se + 1e-12) << i << "," << j << " part " << part;
      }
    }
  }
}

TEST(Sample, DiagonalChannelsFollowGammaMarginals) {
  const auto b = oracle::matrix_b();
  const double looks = 8.0;
  const auto s = pw::sample(WishartParams(looks, b), 10000, 77);
  for (std::size_t h = 0; h < 3; ++h) {
    std::vector<double> xs;
    for (const auto& m : s) xs.push_back(m(h, h).real());
    const double s2 = b(h, h).real();
    const double d = oracle::ks_statistic(
        xs, [&](double x) { return boost::math::gamma_p(looks, x * looks / s2); });
    EXPECT_GT(oracle::ks_p_value(d, xs.size()), 0.01) << "channel " << h << " KS D = " << d;
  }
}

TEST(Sample, DrawsArePositiveDefinite) {
  const auto s = pw::sample(WishartParams(3.0, oracle::matrix_b()), 2000, 8);
  for (const auto& m : s) EXPECT_NO_THROW(pw::cholesky(m));
}

TEST(Sample, Errors) {
  EXPECT_ERROR_CODE(pw::sample(WishartParams(4.5, oracle::matrix_b()), 10, 1),
                    ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::sample(WishartParams(2.5, oracle::matrix_b()), 10, 1),
                    ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::sample(WishartParams(4.0, oracle::matrix_b()), 0, 1),
                    ErrorCode::EmptySample);
}

TEST(Contamination, ZeroEpsilonReproducesCleanSample) {
  const WishartParams params(4.0, oracle::matrix_b());
  EXPECT_EQ(pw::sample_contaminated(params, {0.0, 1000.0}, 200, 11), pw::sample(params, 200, 11));
}

TEST(Contamination, UnitEpsilonReproducesScaledSample) {
  const WishartParams params(4.0, oracle::matrix_b());
  const WishartParams scaled(4.0, oracle::matrix_b().scaled(1000.0));
  const auto contaminated = pw::sample_contaminated(params, {1.0, 1000.0}, 200, 11);
  const auto reference = pw::sample(scaled, 200, 11);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t c = 0; c < 3; ++c)
        EXPECT_TRUE(RelNear(contaminated[i](a, c).real(), reference[i](a, c).real(), 1e-12));
  }
}

TEST(Contamination, FractionMatchesEpsilon) {
  const WishartParams params(4.0, oracle::matrix_b());
  const std::size_t n = 20000;
  const double eps = 0.3;
  const auto clean = pw::sample(params, n, 3);
  const auto mixed = pw::sample_contaminated(params, {eps, 1000.0}, n, 3);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < n; ++i) changed += (clean[i] == mixed[i]) ? 0 : 1;
  EXPECT_NEAR(static_cast<double>(changed) / n, eps, 4.0 * std::sqrt(eps * (1 - eps) / n));
}

TEST(Contamination, RareEventCountIsPoisson) {
  // 5500 samples of 49 at epsilon 1e-5: about 2.7 contaminated observations expected.
  const WishartParams params(4.0, oracle::matrix_b());
  const pw::ContaminationSpec spec{1e-5, 1000.0};
  std::size_t changed = 0;
  for (std::uint64_t k = 0; k < 5500; ++k) {
    const auto clean = pw::sample(params, 49, k);
    const auto mixed = pw::sample_contaminated(params, spec, 49, k);
    for (std::size_t i = 0; i < 49; ++i) changed += (clean[i] == mixed[i]) ? 0 : 1;
  }
  // Poisson(2.695): P(count >= 11) < 1e-3.
  EXPECT_LE(changed, 10u);
}

TEST(Contamination, Validation) {
  const WishartParams params(4.0, oracle::matrix_b());
  EXPECT_ERROR_CODE(pw::sample_contaminated(params, {-0.1, 10.0}, 5, 1), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::sample_contaminated(params, {1.1, 10.0}, 5, 1), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::sample_contaminated(params, {0.1, 0.0}, 5, 1), ErrorCode::DomainError);
}
