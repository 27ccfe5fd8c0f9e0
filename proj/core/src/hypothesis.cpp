#include "polwishart/hypothesis.hpp"

#include <cmath>

#include "polwishart/error.hpp"
#include "polwishart/specfun.hpp"

namespace polwishart {

double test_statistic(const DistanceMeasure& measure, const WishartParams& fit_a,
                      const WishartParams& fit_b, std::size_t n_a, std::size_t n_b) {
  if (n_a == 0 || n_b == 0) {
    throw Error(ErrorCode::DomainError, "sample sizes must be positive");
  }
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  const double d = distance(measure, fit_a, fit_b);
  return 2.0 * na * nb / (na + nb) * d / scaling_constant(measure);
}

int degrees_of_freedom(int p, bool looks_estimated) {
  if (p < 1) throw Error(ErrorCode::DomainError, "dimension must be positive");
  return p * p + (looks_estimated ? 1 : 0);
}

TestOutcome decide(double statistic, double distance, int dof,
                   const std::vector<double>& alpha_levels) {
  if (std::isnan(statistic) || statistic < 0.0) {
    throw Error(ErrorCode::NumericalFailure, "test statistic is negative or undefined");
  }
  const double p_value = std::isinf(statistic) ? 0.0 : specfun::chi_square_sf(statistic, dof);
  TestOutcome out{statistic, dof, p_value, {}, distance};
  for (double alpha : alpha_levels) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::DomainError, "significance levels must lie in (0, 1]");
    }
    out.reject_at[alpha] = p_value <= alpha;
  }
  return out;
}

TestOutcome test_fits(const DistanceMeasure& measure, const MLFit& fit_a, const MLFit& fit_b,
                      const std::vector<double>& alpha_levels, const TestOptions& options) {
  const double na = static_cast<double>(fit_a.sample_size);
  const double nb = static_cast<double>(fit_b.sample_size);
  const double d = distance(measure, fit_a.params, fit_b.params);
  const double s = 2.0 * na * nb / (na + nb) * d / scaling_constant(measure);
  const int p = static_cast<int>(fit_a.params.dim());
  const bool estimated = fit_a.looks_estimated || fit_b.looks_estimated;
  const int dof = options.dof_override.value_or(degrees_of_freedom(p, estimated));
  if (dof < 1) throw Error(ErrorCode::DomainError, "degrees of freedom must be positive");
  return decide(s, d, dof, alpha_levels);
}

TestOutcome run_test(const DistanceMeasure& measure, const MatrixSample& sample_a,
                     const MatrixSample& sample_b, const std::vector<double>& alpha_levels,
                     const TestOptions& options) {
  if (sample_a.dim() != sample_b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "samples have different dimensions");
  }
  validate(measure);
  const MLFit fit_a = fit(sample_a, options.fixed_looks);
  const MLFit fit_b = fit(sample_b, options.fixed_looks);
  return test_fits(measure, fit_a, fit_b, alpha_levels, options);
}

}  // namespace polwishart
