#pragma once

// Maximum-likelihood estimation of (L, Sigma) and the information matrices of the
// scaled Wishart model.
//
// The likelihood equations separate: Sigma-hat is the sample mean, and L-hat is the
// root of
//
//   p log L + mean_k log|Z_k| - log|Sigma-hat| - sum_{i=0}^{p-1} psi(L - i) = 0,
//
// found by Newton-Raphson safeguarded with bisection.

#include <cstddef>
#include <optional>
#include <vector>

#include "polwishart/hermitian.hpp"
#include "polwishart/wishart.hpp"

namespace polwishart {

/// Lower end of the looks search bracket is p - 1 + kLooksBracketOffset.
inline constexpr double kLooksBracketOffset = 1e-4;
inline constexpr double kLooksBracketUpper = 1e5;
inline constexpr double kLooksScoreTolerance = 1e-10;
inline constexpr int kLooksMaxIterations = 200;

struct LooksRoot {
  double looks;
  int iterations;
  double score_residual;
};

struct MLFit {
  WishartParams params;
  int iterations;
  double score_residual;
  /// Cramer-Rao bound on var(L-hat) for this sample size: 1 / (N K_LL).
  double crlb_looks_variance;
  std::size_t sample_size;
  bool looks_estimated;
};

struct FisherInfo {
  /// sum_{i=0}^{p-1} psi'(L - i) - p / L
  double looks_block;
  /// L (Sigma^{-1} kron Sigma^{-1})
  HermitianMatrix sigma_block;
  /// The L-Sigma cross terms; identically zero, p^2 entries.
  std::vector<Complex> cross_block;
};

struct CramerRaoBound {
  double looks_variance;
  /// (Sigma kron Sigma) / L
  HermitianMatrix sigma_block;
};

/// Elementwise mean. Throws EmptySample (through MatrixSample) if empty.
HermitianMatrix estimate_sigma(const MatrixSample& sample);

/// mean_k log|Z_k|. Throws NotPositiveDefinite if any observation is singular.
double mean_log_det(const MatrixSample& sample);

double looks_score(double looks, int p, double mean_log_det, double log_det_sigma_hat);

/// d/dL of looks_score: p / L - sum_{i=0}^{p-1} psi'(L - i). Negative for L > p - 1.
double looks_score_derivative(double looks, int p);

/// Root of looks_score on [p - 1 + 1e-4, 1e5]. Throws NoRootInBracket when the score
/// keeps one sign over the bracket, NumericalFailure when iterations run out.
LooksRoot solve_looks(int p, double mean_log_det, double log_det_sigma_hat);

double estimate_looks(const MatrixSample& sample, const HermitianMatrix& sigma_hat);

/// Full ML fit. With fixed_looks, L is taken as given and only Sigma is estimated.
MLFit fit(const MatrixSample& sample, std::optional<double> fixed_looks = std::nullopt);

FisherInfo fisher_info(const WishartParams& params);

CramerRaoBound cramer_rao(const WishartParams& params);

}  // namespace polwishart
