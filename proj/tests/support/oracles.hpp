#pragma once

// Independent reference implementations used only by tests. None of these share code
// with the library: determinants by cofactor expansion, special functions from
// Boost.Math, quadrature from Boost.Math, and a derivative-free likelihood maximizer.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "polwishart/hermitian.hpp"
#include "polwishart/rng.hpp"
#include "polwishart/wishart.hpp"

namespace oracle {

using polwishart::Complex;
using polwishart::HermitianMatrix;

using Dense = std::vector<std::vector<Complex>>;

inline Dense dense(const HermitianMatrix& m) {
  Dense d(m.dim(), std::vector<Complex>(m.dim()));
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) d[i][j] = m(i, j);
  return d;
}

/// Laplace expansion along the first row.
inline Complex cofactor_det(const Dense& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  Complex det = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    Dense minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Complex> row;
      for (std::size_t j = 0; j < n; ++j)
        if (j != col) row.push_back(a[i][j]);
      minor.push_back(std::move(row));
    }
    const double sign = (col % 2 == 0) ? 1.0 : -1.0;
    det += sign * a[0][col] * cofactor_det(minor);
  }
  return det;
}

inline Dense multiply(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<Complex>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// Inverse by the adjugate: entry (i, j) is the (j, i) cofactor over the determinant.
inline Dense adjugate_inverse(const Dense& a) {
  const std::size_t n = a.size();
  const Complex det = cofactor_det(a);
  Dense inv(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (n == 1) {
        inv[0][0] = 1.0 / a[0][0];
        continue;
      }
      Dense minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        std::vector<Complex> row;
        for (std::size_t c = 0; c < n; ++c)
          if (c != i) row.push_back(a[r][c]);
        minor.push_back(std::move(row));
      }
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      inv[i][j] = sign * cofactor_det(minor) / det;
    }
  }
  return inv;
}

/// The forest covariance matrix used throughout the examples.
inline HermitianMatrix matrix_b() {
  return HermitianMatrix::from_row_major(
      3, {{360932, 0}, {11050, 3759}, {63896, 1581},
          {11050, -3759}, {98960, 0}, {6593, 6868},
          {63896, -1581}, {6593, -6868}, {208843, 0}});
}

/// Sigma(x): matrix B with entry (0, 0) replaced by x.
inline HermitianMatrix matrix_b_at(double x) { return matrix_b().with_entry(0, 0, {x, 0.0}); }

/// Well-conditioned random Hermitian PD matrix: G G^H + p I, scaled by `scale`.
inline HermitianMatrix random_pd(std::size_t p, std::uint64_t seed, double scale = 1.0) {
  polwishart::Xoshiro256 rng(seed);
  Dense g(p, std::vector<Complex>(p));
  for (auto& row : g)
    for (auto& v : row) v = {rng.normal(), rng.normal()};
  std::vector<Complex> entries(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      Complex s = (i == j) ? Complex(static_cast<double>(p), 0.0) : Complex(0.0, 0.0);
      for (std::size_t k = 0; k < p; ++k) s += g[i][k] * std::conj(g[j][k]);
      entries[i * p + j] = scale * s;
    }
  }
  return HermitianMatrix::symmetrized(p, std::move(entries));
}

/// log Gamma_p(L) term by term from Boost.
inline double ln_multigamma(int p, double looks) {
  double s = 0.5 * p * (p - 1) * std::log(std::numbers::pi);
  for (int i = 0; i < p; ++i) s += boost::math::lgamma(looks - i);
  return s;
}

/// Direct transcription of the Wishart log density with cofactor determinants and an
/// adjugate inverse.
inline double wishart_log_density(double looks, const HermitianMatrix& sigma,
                                  const HermitianMatrix& z) {
  const int p = static_cast<int>(sigma.dim());
  const Dense s = dense(sigma);
  const Dense zz = dense(z);
  const double det_s = cofactor_det(s).real();
  const double det_z = cofactor_det(zz).real();
  const Dense prod = multiply(adjugate_inverse(s), zz);
  double tr = 0.0;
  for (int i = 0; i < p; ++i) tr += prod[i][i].real();
  return p * looks * std::log(looks) + (looks - p) * std::log(det_z) -
         looks * std::log(det_s) - ln_multigamma(p, looks) - looks * tr;
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic against `cdf`.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Asymptotic p-value of the KS statistic (Stephens' small-sample correction).
inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// Profile log-likelihood in L (Sigma at the sample mean), up to an L-free constant.
/// Evaluated in long double so the maximizer is resolved well below 1e-6.
inline long double profile_log_likelihood(long double looks, int p, double mean_log_det,
                                          double log_det_sigma_hat) {
  long double s = p * looks * std::log(looks) + looks * mean_log_det -
                  looks * log_det_sigma_hat - p * looks;
  for (int i = 0; i < p; ++i) s -= boost::math::lgamma(looks - i);
  return s;
}

/// Golden-section maximizer of a unimodal function on [a, b].
inline double golden_section_max(const std::function<long double(long double)>& f, long double a,
                                 long double b, long double tol = 1e-13L) {
  const long double invphi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double c = b - invphi * (b - a);
  long double d = a + invphi * (b - a);
  long double fc = f(c), fd = f(d);
  while (b - a > tol * std::max(1.0L, std::abs(c))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return static_cast<double>(0.5L * (a + b));
}

}  // namespace oracle
