#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gplab {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `points` nodes (cached per size, thread-safe).
const QuadratureRule& gauss_legendre(int points);

/// ∫_a^b f for smooth f with an n-point Gauss-Legendre rule.
template <class F>
double integrate(F&& f, double a, double b, int points = 64) {
  const QuadratureRule& q = gauss_legendre(points);
  double half = 0.5 * (b - a), mid = 0.5 * (a + b), sum = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) sum += q.weights[i] * f(mid + half * q.nodes[i]);
  return half * sum;
}

double normal_cdf(double x);
/// Standard normal quantile, Wichura's AS241 (PPND16); |error| ~ 1e-16 relative.
double normal_quantile(double p);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // NaN when fewer than 3 points
  std::size_t points = 0;
};

/// Ordinary least squares y ≈ intercept + slope·x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Pool-adjacent-violators: closest nonincreasing sequence in least squares.
std::vector<double> isotonic_nonincreasing(std::span<const double> y);

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
};

/// Symmetric eigendecomposition, eigenvalues ascending.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

}  // namespace gplab

namespace gplab {
/// Φ⁻¹(exp(log_p)) for log_p < log(1/2), stable for very small probabilities.
double normal_quantile_from_log(double log_p);
}  // namespace gplab
