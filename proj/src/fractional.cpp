#include "gplab/fractional.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gplab/error.hpp"
#include "gplab/numerics.hpp"

namespace gplab {

namespace {

void require_1d(const GridFunction& f, const char* who) {
  if (f.grid().dimension() != 1) throw DomainError(std::string(who) + ": only defined on [0,1]");
}

}  // namespace

GridFunction frac_integral(const GridFunction& f, double alpha) {
  require_1d(f, "frac_integral");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("frac_integral: alpha must be positive");
  const std::size_t m = f.grid().m();
  const double h = f.grid().spacing();
  const auto& v = f.vector();

  std::vector<double> p(m + 2);  // p[k] = k^{α+1}
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::pow(static_cast<double>(k), alpha + 1.0);
  std::vector<double> w(m + 1, 0.0);  // interior weight at lag d = n − j
  for (std::size_t d = 1; d <= m; ++d) w[d] = p[d + 1] - 2.0 * p[d] + p[d - 1];

  const double c = std::pow(h, alpha) / std::tgamma(alpha + 2.0);
  std::vector<double> out(m + 1, 0.0);
  for (std::size_t n = 1; n <= m; ++n) {
    double dn = static_cast<double>(n);
    double s = (p[n - 1] - (dn - alpha - 1.0) * std::pow(dn, alpha)) * v[0] + v[n];
    for (std::size_t j = 1; j < n; ++j) s += w[n - j] * v[j];
    out[n] = c * s;
  }
  return GridFunction(f.grid(), std::move(out));
}

std::vector<double> grid_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("grid_derivative: need at least 3 nodes");
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

std::vector<double> grid_second_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw DomainError("grid_second_derivative: need at least 4 nodes");
  const double h2 = h * h;
  std::vector<double> d(n);
  d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  return d;
}

FracDerivative frac_derivative(const GridFunction& f, double alpha) {
  require_1d(f, "frac_derivative");
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("frac_derivative: alpha must lie in (0, 2)");
  const double h = f.grid().spacing();
  if (alpha == 1.0) return {GridFunction(f.grid(), grid_derivative(f.vector(), h)), false, {}};
  if (alpha < 1.0) {
    GridFunction g = frac_integral(f, 1.0 - alpha);
    return {GridFunction(f.grid(), grid_derivative(g.vector(), h)), false, {}};
  }

  // D^α f = f′(0) t^{1−α}/Γ(2−α) + I^{2−α} f″, valid when f(0) = 0.
  FracDerivative out{GridFunction::zeros(f.grid()), false, {}};
  const auto& v = f.vector();
  if (std::abs(v[0]) > 1e-8 * std::max(1.0, f.sup_norm())) {
    out.precondition_violated = true;
    out.warnings.push_back("frac_derivative: f(0) != 0 in the (1,2) branch; the t^{-alpha} term is omitted");
  }
  double slope0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  GridFunction second(f.grid(), grid_second_derivative(v, h));
  std::vector<double> result = frac_integral(second, 2.0 - alpha).vector();
  const double g = std::tgamma(2.0 - alpha);
  for (std::size_t i = 1; i < result.size(); ++i) result[i] += slope0 * std::pow(f.grid().axis_node(i), 1.0 - alpha) / g;
  if (slope0 != 0.0) out.warnings.push_back("frac_derivative: value at t=0 excludes the singular f'(0) t^{1-alpha} term");
  out.value = GridFunction(f.grid(), std::move(result));
  return out;
}

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// ∫_{−1}^{1} u^k (1−u²)^r du.
double bump_moment(int k, int r) {
  if (k % 2 == 1) return 0.0;
  return std::exp(std::lgamma((k + 1) / 2.0) + std::lgamma(r + 1.0) - std::lgamma((k + 1) / 2.0 + r + 1.0));
}

}  // namespace

SmoothingKernel::SmoothingKernel(int order, double sigma, int smoothness)
    : order_(order), r_(smoothness), sigma_(sigma) {
  if (order < 1) throw DomainError("SmoothingKernel: order must be >= 1");
  if (smoothness < 1) throw DomainError("SmoothingKernel: smoothness must be >= 1");
  if (!(sigma > 0.0 && sigma <= 0.25)) throw DomainError("SmoothingKernel: sigma must lie in (0, 1/4]");
  Eigen::MatrixXd a(order, order);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(order);
  rhs(0) = 1.0;
  for (int q = 0; q < order; ++q)
    for (int i = 0; i < order; ++i) a(q, i) = bump_moment(q + i, r_);
  Eigen::VectorXd c = a.fullPivLu().solve(rhs);
  poly_.assign(2 * r_ + order, 0.0);
  for (int l = 0; l <= r_; ++l) {
    double b = binomial(r_, l) * (l % 2 ? -1.0 : 1.0);
    for (int i = 0; i < order; ++i) poly_[2 * l + i] += b * c(i);
  }
}

SmoothingKernel SmoothingKernel::for_alpha(double alpha, double sigma) {
  int ceil_alpha = static_cast<int>(std::ceil(alpha));
  return SmoothingKernel(std::max(ceil_alpha, 2), sigma, std::max(3, ceil_alpha + 2));
}

double SmoothingKernel::shape(double u, int q) const {
  if (q < 0) throw DomainError("SmoothingKernel: negative derivative order");
  if (u < -1.0 || u > 1.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = poly_.size(); i-- > static_cast<std::size_t>(q);) {
    double f = 1.0;
    for (int l = 0; l < q; ++l) f *= static_cast<double>(i - l);
    s = s * u + f * poly_[i];
  }
  return s;
}

double SmoothingKernel::operator()(double x, int q) const {
  return shape(x / sigma_, q) / std::pow(sigma_, 1.0 + q);
}

double SmoothingKernel::moment(int q) const {
  return integrate([&](double u) { return std::pow(u, q) * shape(u); }, -1.0, 1.0, 64);
}

GridFunction smooth(const GridFunction& f, const SmoothingKernel& kernel, int derivative) {
  require_1d(f, "smooth");
  if (derivative < 0) throw DomainError("smooth: negative derivative order");
  const std::size_t m = f.grid().m();
  const double h = f.grid().spacing();
  const double sigma = kernel.sigma();
  const long reach = static_cast<long>(std::ceil(sigma / h)) + 1;
  if (reach > static_cast<long>(m)) throw DomainError("smooth: kernel wider than the grid");

  // W_d = ∫ hat(d − x/h) φ_σ^{(q)}(x) dx; the integrand is polynomial on each piece.
  std::vector<double> w(2 * reach + 1, 0.0);
  auto piece = [&](double a, double b, auto hat) {
    a = std::max(a, -sigma);
    b = std::min(b, sigma);
    if (b <= a) return 0.0;
    return integrate([&](double x) { return hat(x) * kernel(x, derivative); }, a, b, 16);
  };
  for (long d = -reach; d <= reach; ++d) {
    double c = d * h;
    w[d + reach] = piece(c - h, c, [&](double x) { return 1.0 - (c - x) / h; }) +
                   piece(c, c + h, [&](double x) { return 1.0 - (x - c) / h; });
  }

  const auto& v = f.vector();
  const long mm = static_cast<long>(m);
  auto ext = [&](long l) {
    if (l < 0) return 2.0 * v[0] - v[-l];
    if (l > mm) return 2.0 * v[m] - v[2 * mm - l];
    return v[l];
  };
  std::vector<double> out(m + 1);
  for (long i = 0; i <= mm; ++i) {
    double s = 0.0;
    for (long d = -reach; d <= reach; ++d) s += w[d + reach] * ext(i - d);
    out[i] = s;
  }
  return GridFunction(f.grid(), std::move(out));
}

double semigroup_defect(const GridFunction& f, double alpha, double beta) {
  if (!(alpha > 0.0 && beta > 0.0 && alpha + beta <= 2.0))
    throw DomainError("semigroup_defect: need alpha, beta > 0 and alpha + beta <= 2");
  return sup_distance(frac_integral(frac_integral(f, beta), alpha), frac_integral(f, alpha + beta));
}

}  // namespace gplab
