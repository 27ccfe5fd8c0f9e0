#pragma once

// Closed-form stochastic distances between two scaled Wishart laws, and a generic
// (h, phi)-divergence evaluated by quadrature for p = 1 that serves as their oracle.
//
// All five distances are symmetric in their arguments. Products of gamma functions and
// determinants are accumulated in log space; the chi-square distance in particular
// reaches astronomically large values for poorly matched parameters.

#include <functional>
#include <string>
#include <string_view>

#include "polwishart/wishart.hpp"

namespace polwishart {

enum class DistanceKind { ChiSquare, KullbackLeibler, Renyi, Bhattacharyya, Hellinger };

inline constexpr double kDefaultRenyiOrder = 0.9;

struct DistanceMeasure {
  DistanceKind kind = DistanceKind::KullbackLeibler;
  /// Order of the Renyi distance; ignored for the other kinds.
  double beta = kDefaultRenyiOrder;

  static DistanceMeasure chi_square() { return {DistanceKind::ChiSquare, kDefaultRenyiOrder}; }
  static DistanceMeasure kullback_leibler() {
    return {DistanceKind::KullbackLeibler, kDefaultRenyiOrder};
  }
  static DistanceMeasure renyi(double beta) { return {DistanceKind::Renyi, beta}; }
  static DistanceMeasure bhattacharyya() {
    return {DistanceKind::Bhattacharyya, kDefaultRenyiOrder};
  }
  static DistanceMeasure hellinger() { return {DistanceKind::Hellinger, kDefaultRenyiOrder}; }

  friend bool operator==(const DistanceMeasure& a, const DistanceMeasure& b) {
    return a.kind == b.kind && (a.kind != DistanceKind::Renyi || a.beta == b.beta);
  }
};

/// Throws DomainError for a Renyi order outside (0, 1).
void validate(const DistanceMeasure& measure);

/// "chi2", "kl", "renyi=<beta>", "bhattacharyya", "hellinger".
std::string to_string(const DistanceMeasure& measure);

/// Inverse of to_string; a bare "renyi" takes default_beta. Throws ParseError.
DistanceMeasure parse_measure(std::string_view text, double default_beta = kDefaultRenyiOrder);

/// Symmetrized distance between W(a) and W(b).
///
/// Throws DimensionMismatch, DomainError (Renyi order), or ChiSquareDiverges when
/// 2 L_j - L_i <= p - 1 or 2 L_j Sigma_j^{-1} - L_i Sigma_i^{-1} is not positive
/// definite for either ordering, where the defining integral is infinite.
double distance(const DistanceMeasure& measure, const WishartParams& a, const WishartParams& b);

/// The (h, phi) pair generating a distance: D = h( integral phi(f_a / f_b) f_b ).
struct HPhiSpec {
  std::function<double(double)> h;
  std::function<double(double)> phi;
  double h_prime_at_zero;
  double phi_second_at_one;
  /// y phi(1 / y) up to a multiple of (y - 1), which integrates to zero.
  std::function<double(double)> phi_conjugate;
};

HPhiSpec table_hphi(const DistanceMeasure& measure);

/// h'(0) phi''(1) for the measure.
double scaling_constant(const DistanceMeasure& measure);

/// h( integral_0^inf phi(f_a / f_b) f_b dz ) by adaptive Gauss-Kronrod quadrature with
/// relative tolerance 1e-9, for p = 1. Where f_a > f_b the integrand is evaluated as
/// phi_conjugate(f_b / f_a) f_a, so the ratio argument stays in (0, 1]. With
/// symmetrize, the two orientations are averaged.
///
/// Throws DimensionMismatch unless both laws have p = 1, QuadratureFailure when the
/// tolerance cannot be met (notably for divergent integrals).
double hphi_divergence_p1_oracle(const HPhiSpec& spec, const WishartParams& a,
                                 const WishartParams& b, bool symmetrize = false);

}  // namespace polwishart
