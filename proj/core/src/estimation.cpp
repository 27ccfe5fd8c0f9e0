#include "polwishart/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polwishart/error.hpp"
#include "polwishart/specfun.hpp"

namespace polwishart {

HermitianMatrix estimate_sigma(const MatrixSample& sample) {
  const std::size_t p = sample.dim();
  std::vector<Complex> acc(p * p, Complex(0.0));
  for (const auto& z : sample) {
    const auto e = z.entries();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += e[k];
  }
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  for (auto& v : acc) v *= inv_n;
  return HermitianMatrix::symmetrized(p, std::move(acc));
}

double mean_log_det(const MatrixSample& sample) {
  double sum = 0.0;
  for (const auto& z : sample) sum += log_det(z);
  return sum / static_cast<double>(sample.size());
}

double looks_score(double looks, int p, double mean_log_det, double log_det_sigma_hat) {
  if (p < 1 || !(looks > p - 1)) {
    throw Error(ErrorCode::DomainError, "looks_score requires L > p - 1");
  }
  double psi_sum = 0.0;
  for (int i = 0; i < p; ++i) psi_sum += specfun::digamma(looks - i);
  return p * std::log(looks) + mean_log_det - log_det_sigma_hat - psi_sum;
}

double looks_score_derivative(double looks, int p) {
  if (p < 1 || !(looks > p - 1)) {
    throw Error(ErrorCode::DomainError, "looks_score_derivative requires L > p - 1");
  }
  double trigamma_sum = 0.0;
  for (int i = 0; i < p; ++i) trigamma_sum += specfun::trigamma(looks - i);
  return p / looks - trigamma_sum;
}

LooksRoot solve_looks(int p, double mean_log_det, double log_det_sigma_hat) {
  double lo = p - 1 + kLooksBracketOffset;
  double hi = kLooksBracketUpper;
  auto score = [&](double looks) {
    return looks_score(looks, p, mean_log_det, log_det_sigma_hat);
  };
  // The score decreases in L: positive at lo and negative at hi when a root exists.
  if (!(score(lo) > 0.0) || !(score(hi) < 0.0)) {
    throw Error(ErrorCode::NoRootInBracket,
                "looks score does not change sign on [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]; sample log-dispersion is degenerate");
  }

  // p log L - sum psi(L - i) ~ p^2 / (2L) for large L.
  const double dispersion = mean_log_det - log_det_sigma_hat;
  double looks = dispersion < 0.0 ? (p * p) / (-2.0 * dispersion) : 0.5 * (lo + hi);
  looks = std::clamp(looks, lo, hi);

  for (int iter = 1; iter <= kLooksMaxIterations; ++iter) {
    const double s = score(looks);
    if (std::abs(s) < kLooksScoreTolerance) return {looks, iter, std::abs(s)};
    if (s > 0.0) {
      lo = looks;
    } else {
      hi = looks;
    }
    double next = looks - s / looks_score_derivative(looks, p);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - looks) < 1e-12 * looks) {
      return {next, iter, std::abs(score(next))};
    }
    looks = next;
  }
  throw Error(ErrorCode::NumericalFailure, "looks estimation did not converge");
}

double estimate_looks(const MatrixSample& sample, const HermitianMatrix& sigma_hat) {
  return solve_looks(static_cast<int>(sample.dim()), mean_log_det(sample), log_det(sigma_hat))
      .looks;
}

MLFit fit(const MatrixSample& sample, std::optional<double> fixed_looks) {
  const int p = static_cast<int>(sample.dim());
  HermitianMatrix sigma_hat = estimate_sigma(sample);
  const double log_det_hat = log_det(sigma_hat);

  LooksRoot root{};
  if (fixed_looks) {
    root = {*fixed_looks, 0, 0.0};
  } else {
    root = solve_looks(p, mean_log_det(sample), log_det_hat);
  }
  WishartParams params(root.looks, std::move(sigma_hat));
  const double info = fisher_info(params).looks_block;
  return MLFit{std::move(params),
               root.iterations,
               root.score_residual,
               1.0 / (static_cast<double>(sample.size()) * info),
               sample.size(),
               !fixed_looks.has_value()};
}

FisherInfo fisher_info(const WishartParams& params) {
  const int p = static_cast<int>(params.dim());
  const double looks = params.looks();
  const double looks_block = -looks_score_derivative(looks, p);
  HermitianMatrix sigma_block =
      kronecker(params.sigma_inverse(), params.sigma_inverse()).scaled(looks);
  return FisherInfo{looks_block, std::move(sigma_block),
                    std::vector<Complex>(static_cast<std::size_t>(p * p), Complex(0.0))};
}

CramerRaoBound cramer_rao(const WishartParams& params) {
  const FisherInfo info = fisher_info(params);
  HermitianMatrix sigma_block =
      kronecker(params.sigma(), params.sigma()).scaled(1.0 / params.looks());
  return CramerRaoBound{1.0 / info.looks_block, std::move(sigma_block)};
}

}  // namespace polwishart
