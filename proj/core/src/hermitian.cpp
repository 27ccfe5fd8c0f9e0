#include "polwishart/hermitian.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "polwishart/error.hpp"

namespace polwishart {
namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_finite(std::span<const Complex> entries) {
  for (const auto& z : entries) {
    if (!finite(z)) {
      throw Error(ErrorCode::ValidationError, "matrix entry is not finite");
    }
  }
}

void require_square(std::size_t dim, std::size_t count) {
  if (dim == 0 || count != dim * dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(dim * dim) + " entries for a " +
                    std::to_string(dim) + "x" + std::to_string(dim) + " matrix, got " +
                    std::to_string(count));
  }
}

void symmetrize_in_place(std::size_t dim, std::vector<Complex>& e) {
  for (std::size_t i = 0; i < dim; ++i) {
    e[i * dim + i] = Complex(e[i * dim + i].real(), 0.0);
    for (std::size_t j = i + 1; j < dim; ++j) {
      const Complex upper = 0.5 * (e[i * dim + j] + std::conj(e[j * dim + i]));
      e[i * dim + j] = upper;
      e[j * dim + i] = std::conj(upper);
    }
  }
}

}  // namespace

HermitianMatrix HermitianMatrix::from_row_major(std::size_t dim, std::vector<Complex> entries) {
  require_square(dim, entries.size());
  require_finite(entries);

  double scale = 0.0;
  for (const auto& z : entries) scale = std::max(scale, std::abs(z));
  const double tol = kHermitianTolerance * scale;
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::abs(entries[i * dim + i].imag()) > tol) {
      throw Error(ErrorCode::ValidationError,
                  "diagonal entry (" + std::to_string(i) + "," + std::to_string(i) +
                      ") has a nonzero imaginary part");
    }
    for (std::size_t j = i + 1; j < dim; ++j) {
      if (std::abs(entries[i * dim + j] - std::conj(entries[j * dim + i])) > tol) {
        throw Error(ErrorCode::ValidationError,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") is not the conjugate of entry (" + std::to_string(j) + "," +
                        std::to_string(i) + ")");
      }
    }
  }
  symmetrize_in_place(dim, entries);
  return HermitianMatrix(dim, std::move(entries));
}

HermitianMatrix HermitianMatrix::symmetrized(std::size_t dim, std::vector<Complex> entries) {
  require_square(dim, entries.size());
  require_finite(entries);
  symmetrize_in_place(dim, entries);
  return HermitianMatrix(dim, std::move(entries));
}

HermitianMatrix HermitianMatrix::identity(std::size_t dim) {
  std::vector<double> ones(dim, 1.0);
  return diagonal(ones);
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  const std::size_t dim = values.size();
  std::vector<Complex> e(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) e[i * dim + i] = values[i];
  require_square(dim, e.size());
  require_finite(e);
  return HermitianMatrix(dim, std::move(e));
}

HermitianMatrix HermitianMatrix::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

HermitianMatrix HermitianMatrix::with_entry(std::size_t row, std::size_t col,
                                            Complex value) const {
  std::vector<Complex> e = entries_;
  if (row == col) {
    e[row * dim_ + row] = Complex(value.real(), 0.0);
  } else {
    e[row * dim_ + col] = value;
    e[col * dim_ + row] = std::conj(value);
  }
  require_finite(e);
  return HermitianMatrix(dim_, std::move(e));
}

HermitianMatrix HermitianMatrix::scaled(double factor) const {
  std::vector<Complex> e = entries_;
  for (auto& z : e) z *= factor;
  require_finite(e);
  return HermitianMatrix(dim_, std::move(e));
}

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
  return weighted_sum(1.0, a, 1.0, b);
}

HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
  return weighted_sum(1.0, a, -1.0, b);
}

double CholeskyFactor::log_det() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) sum += std::log(lower_[i * dim_ + i].real());
  return 2.0 * sum;
}

void CholeskyFactor::multiply(std::span<const Complex> v, std::span<Complex> out) const noexcept {
  for (std::size_t i = 0; i < dim_; ++i) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k <= i; ++k) acc += lower_[i * dim_ + k] * v[k];
    out[i] = acc;
  }
}

HermitianMatrix CholeskyFactor::inverse() const {
  const std::size_t n = dim_;
  // W = F^{-1}, lower triangular, by forward substitution column by column.
  std::vector<Complex> w(n * n, Complex(0.0));
  for (std::size_t col = 0; col < n; ++col) {
    w[col * n + col] = 1.0 / lower_[col * n + col];
    for (std::size_t i = col + 1; i < n; ++i) {
      Complex acc = 0.0;
      for (std::size_t k = col; k < i; ++k) acc += lower_[i * n + k] * w[k * n + col];
      w[i * n + col] = -acc / lower_[i * n + i];
    }
  }
  // M^{-1} = W^H W.
  std::vector<Complex> inv(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = j; k < n; ++k) acc += std::conj(w[k * n + i]) * w[k * n + j];
      inv[i * n + j] = acc;
      inv[j * n + i] = std::conj(acc);
    }
  }
  return HermitianMatrix::symmetrized(n, std::move(inv));
}

HermitianMatrix CholeskyFactor::reconstruct() const {
  const std::size_t n = dim_;
  std::vector<Complex> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k <= j; ++k) acc += lower_[i * n + k] * std::conj(lower_[j * n + k]);
      m[i * n + j] = acc;
      m[j * n + i] = std::conj(acc);
    }
  }
  return HermitianMatrix::symmetrized(n, std::move(m));
}

CholeskyFactor cholesky(const HermitianMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "empty matrix");
  double max_diag = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, m(i, i).real());
  if (!(max_diag > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite, "matrix has no positive diagonal entry");
  }
  const double threshold = kPivotTolerance * max_diag;

  std::vector<Complex> f(n * n, Complex(0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j).real();
    for (std::size_t k = 0; k < j; ++k) pivot -= std::norm(f[j * n + k]);
    if (!(pivot > threshold)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "Cholesky pivot " + std::to_string(j) + " is not positive");
    }
    const double d = std::sqrt(pivot);
    f[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex acc = m(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= f[i * n + k] * std::conj(f[j * n + k]);
      f[i * n + j] = acc / d;
    }
  }
  return CholeskyFactor(n, std::move(f));
}

double log_det(const HermitianMatrix& m) { return cholesky(m).log_det(); }

HermitianMatrix inverse(const HermitianMatrix& m) { return cholesky(m).inverse(); }

double trace_of_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "trace_of_product: dimensions differ");
  }
  // tr(ab) = sum_ij a_ij b_ji; for Hermitian operands the sum is real.
  const std::size_t n = a.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) acc += (a(i, j) * b(j, i)).real();
  }
  return acc;
}

HermitianMatrix kronecker(const HermitianMatrix& a, const HermitianMatrix& b) {
  const std::size_t p = a.dim();
  const std::size_t q = b.dim();
  const std::size_t n = p * q;
  std::vector<Complex> e(n * n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < q; ++k)
        for (std::size_t l = 0; l < q; ++l) e[(i * q + k) * n + (j * q + l)] = a(i, j) * b(k, l);
  return HermitianMatrix::symmetrized(n, std::move(e));
}

HermitianMatrix weighted_sum(double wa, const HermitianMatrix& a, double wb,
                             const HermitianMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "weighted_sum: dimensions differ");
  }
  const auto ea = a.entries();
  const auto eb = b.entries();
  std::vector<Complex> e(ea.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = wa * ea[k] + wb * eb[k];
  return HermitianMatrix::symmetrized(a.dim(), std::move(e));
}

}  // namespace polwishart
