#pragma once

// Dense complex Hermitian matrices and the Cholesky-based kernels (log-determinant,
// inverse, trace of a product, Kronecker product) used throughout the library.
//
// Matrices are small (p is 1 to 4 for polarimetric data), so storage is a plain
// row-major vector and every routine is O(p^3) without blocking.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace polwishart {

using Complex = std::complex<double>;

/// Relative tolerance for accepting input as Hermitian.
inline constexpr double kHermitianTolerance = 1e-9;

/// Pivot threshold of the Cholesky factorization, relative to the largest diagonal entry.
inline constexpr double kPivotTolerance = 1e-14;

/// p x p complex Hermitian matrix. Immutable after construction.
///
/// Construction stores (M + M^H)/2 so the stored value is exactly Hermitian and its
/// diagonal is real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Validating constructor: entries must be finite and Hermitian within
  /// kHermitianTolerance relative to the largest entry magnitude. Throws
  /// Error(ValidationError) otherwise.
  static HermitianMatrix from_row_major(std::size_t dim, std::vector<Complex> entries);

  /// Symmetrizes without the Hermitian tolerance check; for results of computations
  /// whose asymmetry is pure rounding. Still rejects non-finite entries.
  static HermitianMatrix symmetrized(std::size_t dim, std::vector<Complex> entries);

  static HermitianMatrix identity(std::size_t dim);
  static HermitianMatrix diagonal(std::span<const double> values);
  static HermitianMatrix diagonal(std::initializer_list<double> values);

  std::size_t dim() const noexcept { return dim_; }
  Complex operator()(std::size_t row, std::size_t col) const noexcept {
    return entries_[row * dim_ + col];
  }
  std::span<const Complex> entries() const noexcept { return entries_; }

  /// Copy with entry (row, col) replaced by value and (col, row) by its conjugate.
  HermitianMatrix with_entry(std::size_t row, std::size_t col, Complex value) const;

  HermitianMatrix scaled(double factor) const;

  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b);
  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b);
  friend bool operator==(const HermitianMatrix& a, const HermitianMatrix& b) = default;

 private:
  HermitianMatrix(std::size_t dim, std::vector<Complex> entries)
      : dim_(dim), entries_(std::move(entries)) {}

  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

/// Lower-triangular F with F F^H = M and a strictly positive real diagonal.
class CholeskyFactor {
 public:
  CholeskyFactor(std::size_t dim, std::vector<Complex> lower)
      : dim_(dim), lower_(std::move(lower)) {}

  std::size_t dim() const noexcept { return dim_; }
  Complex operator()(std::size_t row, std::size_t col) const noexcept {
    return lower_[row * dim_ + col];
  }

  /// 2 * sum(log F_ii).
  double log_det() const noexcept;

  /// out = F * v. Both spans have length dim().
  void multiply(std::span<const Complex> v, std::span<Complex> out) const noexcept;

  /// M^{-1} from the factor.
  HermitianMatrix inverse() const;

  /// F F^H.
  HermitianMatrix reconstruct() const;

 private:
  std::size_t dim_;
  std::vector<Complex> lower_;
};

/// Throws Error(NotPositiveDefinite) when a pivot is <= kPivotTolerance times the
/// largest diagonal entry.
CholeskyFactor cholesky(const HermitianMatrix& m);

double log_det(const HermitianMatrix& m);

HermitianMatrix inverse(const HermitianMatrix& m);

/// Re tr(a b). Throws DimensionMismatch.
double trace_of_product(const HermitianMatrix& a, const HermitianMatrix& b);

/// a (x) b, of dimension a.dim() * b.dim().
HermitianMatrix kronecker(const HermitianMatrix& a, const HermitianMatrix& b);

/// wa * a + wb * b; the weights may have any sign.
HermitianMatrix weighted_sum(double wa, const HermitianMatrix& a, double wb,
                             const HermitianMatrix& b);

}  // namespace polwishart
