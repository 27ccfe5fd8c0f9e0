#include "quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace polwishart::detail {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the nodes kKronrodNodes[1], [3], [5], [7].
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool finite;

  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  bool finite = std::isfinite(fc);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    finite = finite && std::isfinite(f1) && std::isfinite(f2);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  const double value = kronrod * half;
  const double error = std::abs((kronrod - gauss) * half);
  return {a, b, value, finite ? error : INFINITY, finite};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, double abs_tol, int max_intervals) {
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int intervals = 1;

  while (true) {
    const bool finite = std::isfinite(value) && std::isfinite(error);
    if (finite && error <= std::max(abs_tol, rel_tol * std::abs(value))) {
      return {value, error, intervals, true};
    }
    if (intervals >= max_intervals) break;
    Segment worst = heap.top();
    if (!worst.finite) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Recompute from the segments to shed accumulated cancellation before reporting.
  double total = 0.0;
  double total_error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  const bool ok = std::isfinite(total) && std::isfinite(total_error) &&
                  total_error <= std::max(abs_tol, rel_tol * std::abs(total));
  return {total, total_error, intervals, ok};
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f, double scale,
                                     double rel_tol, double abs_tol, int max_intervals) {
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    const double z = scale * t / one_minus;
    const double jacobian = scale / (one_minus * one_minus);
    const double v = f(z);
    return v == 0.0 ? 0.0 : v * jacobian;
  };
  return integrate(mapped, 0.0, 1.0, rel_tol, abs_tol, max_intervals);
}

}  // namespace polwishart::detail
