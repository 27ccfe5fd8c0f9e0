#pragma once

// Homogeneity tests built on the distances: for ML fits of two independent samples of
// sizes N_a and N_b,
//
//   S = 2 N_a N_b / (N_a + N_b) * d(theta_a, theta_b) / (h'(0) phi''(1))
//
// is asymptotically chi-square with M degrees of freedom under H0: theta_a = theta_b,
// and H0 is rejected at level alpha when Pr(chi2_M > S) <= alpha.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "polwishart/distances.hpp"
#include "polwishart/estimation.hpp"
#include "polwishart/wishart.hpp"

namespace polwishart {

struct TestOutcome {
  double statistic;
  int dof;
  double p_value;
  std::map<double, bool> reject_at;
  /// The distance the statistic was built from.
  double distance;
};

struct TestOptions {
  /// Known number of looks; when set, only Sigma is estimated.
  std::optional<double> fixed_looks;
  /// Replaces the default degrees of freedom.
  std::optional<int> dof_override;
};

double test_statistic(const DistanceMeasure& measure, const WishartParams& fit_a,
                      const WishartParams& fit_b, std::size_t n_a, std::size_t n_b);

/// p^2 + 1 when L is estimated (p^2 real parameters in Sigma plus L), p^2 otherwise.
int degrees_of_freedom(int p, bool looks_estimated);

/// p-value and decisions for a given statistic. An infinite statistic rejects.
TestOutcome decide(double statistic, double distance, int dof, const std::vector<double>& alpha_levels);

/// Test from already fitted parameters.
TestOutcome test_fits(const DistanceMeasure& measure, const MLFit& fit_a, const MLFit& fit_b,
                      const std::vector<double>& alpha_levels, const TestOptions& options = {});

/// Fits both samples and tests H0: theta_a = theta_b.
TestOutcome run_test(const DistanceMeasure& measure, const MatrixSample& sample_a,
                     const MatrixSample& sample_b, const std::vector<double>& alpha_levels,
                     const TestOptions& options = {});

}  // namespace polwishart
