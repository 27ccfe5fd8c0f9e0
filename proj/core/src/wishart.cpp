#include "polwishart/wishart.hpp"

#include <cmath>
#include <string>

#include "polwishart/error.hpp"
#include "polwishart/rng.hpp"
#include "polwishart/specfun.hpp"

namespace polwishart {
namespace {

constexpr std::uint64_t kMixtureStreamTag = 0x636f6e74616d696eULL;

int integer_looks(const WishartParams& params) {
  const double looks = params.looks();
  const double rounded = std::round(looks);
  if (rounded != looks) {
    throw Error(ErrorCode::DomainError,
                "sampling requires an integer number of looks, got " + std::to_string(looks));
  }
  if (rounded < static_cast<double>(params.dim())) {
    throw Error(ErrorCode::DomainError, "sampling requires L >= p");
  }
  return static_cast<int>(rounded);
}

HermitianMatrix draw(const CholeskyFactor& factor, int looks, Xoshiro256& rng) {
  const std::size_t p = factor.dim();
  std::vector<Complex> g(p);
  std::vector<Complex> s(p);
  std::vector<Complex> acc(p * p, Complex(0.0));
  const double component_sd = std::sqrt(0.5);
  for (int k = 0; k < looks; ++k) {
    for (auto& gi : g) {
      const double re = rng.normal();
      const double im = rng.normal();
      gi = Complex(component_sd * re, component_sd * im);
    }
    factor.multiply(g, s);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i; j < p; ++j) acc[i * p + j] += s[i] * std::conj(s[j]);
    }
  }
  const double inv_looks = 1.0 / looks;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      acc[i * p + j] *= inv_looks;
      acc[j * p + i] = std::conj(acc[i * p + j]);
    }
  }
  return HermitianMatrix::symmetrized(p, std::move(acc));
}

}  // namespace

WishartParams::WishartParams(double looks, HermitianMatrix sigma)
    : looks_(looks), sigma_(std::move(sigma)), log_det_sigma_(0.0) {
  const double p = static_cast<double>(sigma_.dim());
  if (!std::isfinite(looks_) || !(looks_ >= p - 1.0 + kLooksGuard)) {
    throw Error(ErrorCode::DomainError,
                "number of looks must satisfy L > p - 1, got L = " + std::to_string(looks_));
  }
  const CholeskyFactor factor = cholesky(sigma_);
  log_det_sigma_ = factor.log_det();
  sigma_inverse_ = factor.inverse();
}

MatrixSample::MatrixSample(std::vector<HermitianMatrix> items) : items_(std::move(items)) {
  if (items_.empty()) throw Error(ErrorCode::EmptySample, "sample has no observations");
  const std::size_t p = items_.front().dim();
  for (const auto& m : items_) {
    if (m.dim() != p) throw Error(ErrorCode::DimensionMismatch, "sample dimensions differ");
  }
}

void validate(const ContaminationSpec& spec) {
  if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0)) {
    throw Error(ErrorCode::DomainError, "contamination epsilon must lie in [0, 1]");
  }
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
    throw Error(ErrorCode::DomainError, "contamination scale must be positive");
  }
}

double log_normalizing_constant(const WishartParams& params) {
  const int p = static_cast<int>(params.dim());
  const double looks = params.looks();
  return p * looks * std::log(looks) - looks * params.log_det_sigma() -
         specfun::ln_multivariate_gamma(p, looks);
}

double log_density(const WishartParams& params, const HermitianMatrix& z) {
  if (z.dim() != params.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "observation and covariance dimensions differ");
  }
  const double p = static_cast<double>(params.dim());
  const double looks = params.looks();
  return log_normalizing_constant(params) + (looks - p) * log_det(z) -
         looks * trace_of_product(params.sigma_inverse(), z);
}

double gamma_marginal_log_density(double sigma_ii, double looks, double z) {
  if (!(sigma_ii > 0.0) || !(looks > 0.0) || !(z > 0.0)) {
    throw Error(ErrorCode::DomainError, "gamma marginal requires positive arguments");
  }
  return (looks - 1.0) * std::log(z) - looks * std::log(sigma_ii / looks) -
         specfun::ln_gamma(looks) - z * looks / sigma_ii;
}

MatrixSample sample(const WishartParams& params, std::size_t n, std::uint64_t seed) {
  return sample_contaminated(params, ContaminationSpec{0.0, 1.0}, n, seed);
}

MatrixSample sample_contaminated(const WishartParams& params, const ContaminationSpec& spec,
                                 std::size_t n, std::uint64_t seed) {
  validate(spec);
  if (n == 0) throw Error(ErrorCode::EmptySample, "requested an empty sample");
  const int looks = integer_looks(params);
  const CholeskyFactor clean = cholesky(params.sigma());
  const bool mixed = spec.epsilon > 0.0;
  const CholeskyFactor outlier = mixed ? cholesky(params.sigma().scaled(spec.scale)) : clean;

  std::vector<HermitianMatrix> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool contaminated = false;
    if (mixed) {
      Xoshiro256 coin(derive_seed({seed, i, kMixtureStreamTag}));
      contaminated = coin.uniform() < spec.epsilon;
    }
    Xoshiro256 rng(derive_seed({seed, i}));
    items.push_back(draw(contaminated ? outlier : clean, looks, rng));
  }
  return MatrixSample(std::move(items));
}

}  // namespace polwishart
