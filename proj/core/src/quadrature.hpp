#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature, internal to the library.

#include <functional>

namespace polwishart::detail {

struct QuadratureResult {
  double value;
  double error;
  int intervals;
  bool converged;
};

/// Integral of f over [a, b]. Subdivides the interval with the largest error estimate
/// until the total error is below max(abs_tol, rel_tol * |value|) or max_intervals is
/// reached. A non-finite integrand value marks the result as not converged.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, double abs_tol, int max_intervals = 4000);

/// Integral of f over (0, inf) through z = scale * t / (1 - t).
QuadratureResult integrate_half_line(const std::function<double(double)>& f, double scale,
                                     double rel_tol, double abs_tol, int max_intervals = 4000);

}  // namespace polwishart::detail
