#pragma once

#include <string>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab {

/// Left-sided Riemann-Liouville integral I^α f by product integration: f is
/// replaced by its piecewise-linear interpolant and each cell is integrated
/// exactly against (t−s)^{α−1}/Γ(α).
GridFunction frac_integral(const GridFunction& f, double alpha);

struct FracDerivative {
  GridFunction value;
  bool precondition_violated = false;  // (1,2) branch with f(0) ≠ 0
  std::vector<std::string> warnings;
};

/// Riemann-Liouville derivative of order α ∈ (0, 2).
FracDerivative frac_derivative(const GridFunction& f, double alpha);

/// First derivative by centered differences, second-order one-sided at the ends.
std::vector<double> grid_derivative(const std::vector<double>& f, double h);
/// Second derivative, centered inside and four-point one-sided at the ends.
std::vector<double> grid_second_derivative(const std::vector<double>& f, double h);

/// φ(u) = (1−u²)^r Σ_i c_i u^i on [−1, 1] with ∫φ = 1 and ∫u^q φ = 0 for
/// 1 ≤ q < order; φ_σ(x) = φ(x/σ)/σ.
class SmoothingKernel {
 public:
  SmoothingKernel(int order, double sigma, int smoothness = 3);
  /// order max(⌈α⌉, 2), smoothness max(3, ⌈α⌉ + 2).
  static SmoothingKernel for_alpha(double alpha, double sigma);

  int order() const { return order_; }
  int smoothness() const { return r_; }
  double sigma() const { return sigma_; }
  double support_radius() const { return sigma_; }
  const std::vector<double>& polynomial() const { return poly_; }  // monomial coefficients in u

  /// q-th derivative of the unit-scale profile φ at u (0 outside [−1, 1]).
  double shape(double u, int q = 0) const;
  /// q-th derivative of φ_σ at x.
  double operator()(double x, int q = 0) const;
  /// ∫ u^q φ(u) du by Gauss-Legendre quadrature.
  double moment(int q) const;

 private:
  int order_;
  int r_;
  double sigma_;
  std::vector<double> poly_;
};

/// (f ∗ φ_σ^{(q)}) at the nodes, with f extended past the endpoints by point
/// reflection f(−x) = 2f(0) − f(x), f(1+x) = 2f(1) − f(1−x).
GridFunction smooth(const GridFunction& f, const SmoothingKernel& kernel, int derivative = 0);

/// sup |I^α I^β f − I^{α+β} f|.
double semigroup_defect(const GridFunction& f, double alpha, double beta);

}  // namespace gplab
