#pragma once

// The scaled multilook complex Wishart law W(L, Sigma) with E(Z) = Sigma:
//
//   f(Z) = L^{pL} |Z|^{L-p} / (|Sigma|^L Gamma_p(L)) * exp(-L tr(Sigma^{-1} Z))
//
// plus its gamma marginals on the diagonal, an exact sampler for integer looks, and
// the epsilon-contaminated sampler used in robustness studies.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polwishart/hermitian.hpp"

namespace polwishart {

/// Smallest admissible L - (p - 1); keeps Gamma_p(L) finite.
inline constexpr double kLooksGuard = 1e-6;

/// (L, Sigma). Validated on construction; caches log|Sigma| and Sigma^{-1}.
class WishartParams {
 public:
  /// Throws DomainError unless L >= p - 1 + kLooksGuard, NotPositiveDefinite unless
  /// Sigma is positive definite.
  WishartParams(double looks, HermitianMatrix sigma);

  double looks() const noexcept { return looks_; }
  const HermitianMatrix& sigma() const noexcept { return sigma_; }
  std::size_t dim() const noexcept { return sigma_.dim(); }
  double log_det_sigma() const noexcept { return log_det_sigma_; }
  const HermitianMatrix& sigma_inverse() const noexcept { return sigma_inverse_; }

 private:
  double looks_;
  HermitianMatrix sigma_;
  double log_det_sigma_;
  HermitianMatrix sigma_inverse_;
};

/// Nonempty ordered collection of matrices sharing one dimension.
class MatrixSample {
 public:
  /// Throws EmptySample or DimensionMismatch.
  explicit MatrixSample(std::vector<HermitianMatrix> items);

  std::size_t dim() const noexcept { return items_.front().dim(); }
  std::size_t size() const noexcept { return items_.size(); }
  const HermitianMatrix& operator[](std::size_t i) const noexcept { return items_[i]; }
  const std::vector<HermitianMatrix>& items() const noexcept { return items_; }

  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  friend bool operator==(const MatrixSample&, const MatrixSample&) = default;

 private:
  std::vector<HermitianMatrix> items_;
};

/// Mixture: each observation comes from W(L, scale * Sigma) with probability epsilon.
struct ContaminationSpec {
  double epsilon = 0.0;
  double scale = 1.0;
};

void validate(const ContaminationSpec& spec);

/// pL log L - L log|Sigma| - log Gamma_p(L): the Z-independent part of the log-density.
double log_normalizing_constant(const WishartParams& params);

double log_density(const WishartParams& params, const HermitianMatrix& z);

/// Log-density of a diagonal entry Z_ii ~ Gamma(shape L, mean sigma_ii).
double gamma_marginal_log_density(double sigma_ii, double looks, double z);

/// n draws Z = (1/L) sum_{k=1}^{L} s_k s_k^H with s_k = F g_k, F F^H = Sigma and g_k
/// standard circular complex Gaussian. Observation i uses its own stream keyed by
/// (seed, i). Requires integer L >= p (DomainError otherwise).
MatrixSample sample(const WishartParams& params, std::size_t n, std::uint64_t seed);

/// As sample(), but observation i is drawn from W(L, scale * Sigma) with probability
/// epsilon. The mixture coin uses a stream separate from the matrix draw, so
/// epsilon = 0 reproduces sample() exactly and epsilon = 1 reproduces sample() on the
/// scaled covariance.
MatrixSample sample_contaminated(const WishartParams& params, const ContaminationSpec& spec,
                                 std::size_t n, std::uint64_t seed);

}  // namespace polwishart
