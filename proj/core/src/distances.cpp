#include "polwishart/distances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "polwishart/error.hpp"
#include "polwishart/specfun.hpp"
#include "quadrature.hpp"

namespace polwishart {
namespace {

constexpr double kOracleRelTol = 1e-9;

void require_same_dim(const WishartParams& a, const WishartParams& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "distance between laws of different dimension");
  }
}

// log( (e^x + e^y) / 2 ), symmetric in its arguments.
double log_mean_exp(double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return hi + std::log1p(std::exp(lo - hi)) - std::log(2.0);
}

// log|wa Sa^{-1} + wb Sb^{-1}|
double log_det_precision_mix(double wa, const WishartParams& a, double wb,
                             const WishartParams& b) {
  return log_det(weighted_sum(wa, a.sigma_inverse(), wb, b.sigma_inverse()));
}

double kullback_leibler(const WishartParams& x, const WishartParams& y) {
  const int p = static_cast<int>(x.dim());
  const double lx = x.looks();
  const double ly = y.looks();
  double psi_diff = 0.0;
  for (int i = 0; i < p; ++i) psi_diff += specfun::digamma(lx - i) - specfun::digamma(ly - i);
  // E_X log|Z| - E_Y log|Z|
  const double log_det_gap =
      x.log_det_sigma() - y.log_det_sigma() - p * (std::log(lx) - std::log(ly)) + psi_diff;
  // L_Y (tr(Sy^{-1} Sx) - p) + L_X (tr(Sx^{-1} Sy) - p), written with the difference
  // Sx - Sy to avoid cancellation between nearby covariances.
  const HermitianMatrix delta = x.sigma() - y.sigma();
  const double trace_terms = ly * trace_of_product(y.sigma_inverse(), delta) -
                             lx * trace_of_product(x.sigma_inverse(), delta);
  return 0.5 * (lx - ly) * log_det_gap + 0.5 * trace_terms;
}

// log integral f_a^w f_b^{1-w} = w c_a + (1-w) c_b + log Gamma_p(E) - E log|A|
// with E = w L_a + (1-w) L_b and A = w L_a Sa^{-1} + (1-w) L_b Sb^{-1}.
double log_affinity(double w, const WishartParams& a, const WishartParams& b) {
  const int p = static_cast<int>(a.dim());
  const double wa = w * a.looks();
  const double wb = (1.0 - w) * b.looks();
  const double e = wa + wb;
  return (w * log_normalizing_constant(a) + (1.0 - w) * log_normalizing_constant(b)) +
         specfun::ln_multivariate_gamma(p, e) - e * log_det_precision_mix(wa, a, wb, b);
}

double bhattacharyya(const WishartParams& x, const WishartParams& y) {
  return -log_affinity(0.5, x, y);
}

double renyi(double beta, const WishartParams& x, const WishartParams& y) {
  const double forward = log_affinity(beta, x, y);
  const double backward = log_affinity(beta, y, x);
  return log_mean_exp(forward, backward) / (beta - 1.0);
}

// log integral f_j^2 / f_i.
double log_chi_square_integral(const WishartParams& i, const WishartParams& j) {
  const int p = static_cast<int>(i.dim());
  const double shape = 2.0 * j.looks() - i.looks();
  if (!(shape > p - 1)) {
    throw Error(ErrorCode::ChiSquareDiverges,
                "chi-square integral diverges: 2 L_j - L_i = " + std::to_string(shape) +
                    " <= p - 1");
  }
  double log_det_mix = 0.0;
  try {
    log_det_mix = log_det_precision_mix(2.0 * j.looks(), j, -i.looks(), i);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    throw Error(ErrorCode::ChiSquareDiverges,
                "chi-square integral diverges: 2 L_j Sigma_j^{-1} - L_i Sigma_i^{-1} is not "
                "positive definite");
  }
  return 2.0 * log_normalizing_constant(j) - log_normalizing_constant(i) +
         specfun::ln_multivariate_gamma(p, shape) - shape * log_det_mix;
}

double chi_square(const WishartParams& x, const WishartParams& y) {
  const double log_xy = log_chi_square_integral(x, y);
  const double log_yx = log_chi_square_integral(y, x);
  // (I_xy - 1 + I_yx - 1) / 4, accurate when both integrals are close to one.
  return 0.25 * (std::expm1(log_xy) + std::expm1(log_yx));
}

}  // namespace

void validate(const DistanceMeasure& measure) {
  if (measure.kind == DistanceKind::Renyi && !(measure.beta > 0.0 && measure.beta < 1.0)) {
    throw Error(ErrorCode::DomainError,
                "Renyi order must lie in (0, 1), got " + std::to_string(measure.beta));
  }
}

std::string to_string(const DistanceMeasure& measure) {
  switch (measure.kind) {
    case DistanceKind::ChiSquare: return "chi2";
    case DistanceKind::KullbackLeibler: return "kl";
    case DistanceKind::Bhattacharyya: return "bhattacharyya";
    case DistanceKind::Hellinger: return "hellinger";
    case DistanceKind::Renyi: {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof(buf), measure.beta);
      return "renyi=" + std::string(buf, res.ptr);
    }
  }
  return "unknown";
}

DistanceMeasure parse_measure(std::string_view text, double default_beta) {
  if (text == "chi2") return DistanceMeasure::chi_square();
  if (text == "kl") return DistanceMeasure::kullback_leibler();
  if (text == "bhattacharyya") return DistanceMeasure::bhattacharyya();
  if (text == "hellinger") return DistanceMeasure::hellinger();
  if (text == "renyi") {
    DistanceMeasure m = DistanceMeasure::renyi(default_beta);
    validate(m);
    return m;
  }
  constexpr std::string_view prefix = "renyi=";
  if (text.starts_with(prefix)) {
    const std::string_view digits = text.substr(prefix.size());
    double beta = 0.0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), beta);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::ParseError, "invalid Renyi order in '" + std::string(text) + "'");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
      throw Error(ErrorCode::ParseError,
                  "Renyi order in '" + std::string(text) + "' must lie in (0, 1)");
    }
    return DistanceMeasure::renyi(beta);
  }
  throw Error(ErrorCode::ParseError,
              "unknown measure '" + std::string(text) +
                  "' (expected chi2, kl, renyi=<beta>, bhattacharyya, hellinger)");
}

double distance(const DistanceMeasure& measure, const WishartParams& a, const WishartParams& b) {
  validate(measure);
  require_same_dim(a, b);
  if (a.looks() == b.looks() && a.sigma() == b.sigma()) return 0.0;
  double d = 0.0;
  switch (measure.kind) {
    case DistanceKind::ChiSquare: d = chi_square(a, b); break;
    case DistanceKind::KullbackLeibler: d = kullback_leibler(a, b); break;
    case DistanceKind::Renyi: d = renyi(measure.beta, a, b); break;
    case DistanceKind::Bhattacharyya: d = bhattacharyya(a, b); break;
    case DistanceKind::Hellinger: d = -std::expm1(-bhattacharyya(a, b)); break;
  }
  // Every distance is nonnegative; a negative value is rounding around zero.
  return d < 0.0 ? 0.0 : d;
}

HPhiSpec table_hphi(const DistanceMeasure& measure) {
  validate(measure);
  switch (measure.kind) {
    case DistanceKind::ChiSquare: {
      const auto phi = [](double x) { return (x - 1.0) * (x - 1.0) * (x + 1.0) / x; };
      return {[](double y) { return y / 4.0; }, phi, 0.25, 4.0, phi};
    }
    case DistanceKind::KullbackLeibler: {
      const auto phi = [](double x) { return (x - 1.0) * std::log(x); };
      return {[](double y) { return y / 2.0; }, phi, 0.5, 2.0, phi};
    }
    case DistanceKind::Renyi: {
      const double beta = measure.beta;
      const auto phi = [beta](double x) {
        return (std::pow(x, 1.0 - beta) + std::pow(x, beta) - beta * (x - 1.0) - 2.0) /
               (2.0 * (beta - 1.0));
      };
      const auto conjugate = [beta](double y) {
        return (std::pow(y, beta) + std::pow(y, 1.0 - beta) + beta * (y - 1.0) - 2.0 * y) /
               (2.0 * (beta - 1.0));
      };
      return {[beta](double y) { return std::log1p((beta - 1.0) * y) / (beta - 1.0); }, phi, 1.0,
              beta, conjugate};
    }
    case DistanceKind::Bhattacharyya: {
      const auto phi = [](double x) { return -std::sqrt(x) + 0.5 * (x + 1.0); };
      return {[](double y) { return -std::log1p(-y); }, phi, 1.0, 0.25, phi};
    }
    case DistanceKind::Hellinger: {
      const auto phi = [](double x) {
        const double r = std::sqrt(x) - 1.0;
        return r * r;
      };
      return {[](double y) { return y / 2.0; }, phi, 0.5, 0.5, phi};
    }
  }
  throw Error(ErrorCode::DomainError, "unknown distance kind");
}

double scaling_constant(const DistanceMeasure& measure) {
  const HPhiSpec spec = table_hphi(measure);
  return spec.h_prime_at_zero * spec.phi_second_at_one;
}

double hphi_divergence_p1_oracle(const HPhiSpec& spec, const WishartParams& a,
                                 const WishartParams& b, bool symmetrize) {
  if (a.dim() != 1 || b.dim() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "the quadrature oracle handles p = 1 only");
  }
  auto directed = [&spec](const WishartParams& num, const WishartParams& den) {
    const double c_num = log_normalizing_constant(num);
    const double c_den = log_normalizing_constant(den);
    const double rate_num = num.looks() / num.sigma()(0, 0).real();
    const double rate_den = den.looks() / den.sigma()(0, 0).real();
    const double log_min_ratio = std::log(std::numeric_limits<double>::min());
    // Largest z * integrand among points whose ratio was clamped.
    double clamped_mass = 0.0;
    auto integrand = [&](double z) {
      const double log_z = std::log(z);
      const double log_num = c_num + (num.looks() - 1.0) * log_z - rate_num * z;
      const double log_den = c_den + (den.looks() - 1.0) * log_z - rate_den * z;
      // The larger density weights the smaller ratio; underflowed ratios are clamped.
      const double small_gap = -std::abs(log_num - log_den);
      const double ratio = std::exp(std::max(small_gap, log_min_ratio));
      double value = log_num <= log_den ? spec.phi(ratio) * std::exp(log_den)
                                        : spec.phi_conjugate(ratio) * std::exp(log_num);
      // Both densities vanish, or z sits on a boundary where log z is infinite.
      if (std::isnan(value)) value = 0.0;
      if (small_gap < log_min_ratio) clamped_mass = std::max(clamped_mass, std::abs(value) * z);
      return value;
    };
    const double scale = std::max(num.sigma()(0, 0).real(), den.sigma()(0, 0).real());
    const auto result = detail::integrate_half_line(integrand, scale, kOracleRelTol, 1e-15);
    if (!result.converged) {
      throw Error(ErrorCode::QuadratureFailure,
                  "adaptive quadrature did not reach the requested tolerance");
    }
    if (clamped_mass > kOracleRelTol * std::abs(result.value)) {
      throw Error(ErrorCode::QuadratureFailure,
                  "integrand mass lies where the density ratio leaves the floating-point range");
    }
    return spec.h(result.value);
  };
  const double forward = directed(a, b);
  if (!symmetrize) return forward;
  return 0.5 * (forward + directed(b, a));
}

}  // namespace polwishart
