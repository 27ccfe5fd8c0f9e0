#pragma once

// Real-argument special functions: log-gamma, digamma, trigamma, the log of the
// complex multivariate gamma function, and the regularized incomplete gamma
// functions behind chi-square tail probabilities.
//
// All routines throw Error(DomainError) outside their domain.

namespace polwishart::specfun {

/// log Gamma(x), x > 0.
double ln_gamma(double x);

/// psi(x) = d/dx log Gamma(x), x > 0.
double digamma(double x);

/// psi'(x), x > 0.
double trigamma(double x);

/// log Gamma_p(L) = p(p-1)/2 log(pi) + sum_{i=0}^{p-1} log Gamma(L - i); requires L > p - 1.
double ln_multivariate_gamma(int p, double looks);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Pr(chi2_k > s).
double chi_square_sf(double s, int dof);

/// Pr(chi2_k <= s).
double chi_square_cdf(double s, int dof);

}  // namespace polwishart::specfun
