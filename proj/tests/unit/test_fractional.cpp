#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gplab/error.hpp"
#include "gplab/fractional.hpp"
#include "gplab/numerics.hpp"

using namespace gplab;

namespace {

// sup |got − want| / sup |want|
double max_rel_error(const GridFunction& got, const std::function<double(double)>& want) {
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double w = want(got.grid().axis_node(i));
    worst = std::max(worst, std::abs(got[i] - w));
    scale = std::max(scale, std::abs(w));
  }
  return worst / scale;
}

}  // namespace

TEST_SUITE("fractional-calculus") {

TEST_CASE("integral of constants and powers") {
  Grid g(1, 1024);
  GridFunction one = GridFunction::sample(g, [](double) { return 1.0; });
  GridFunction i1 = frac_integral(one, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(i1[i] == doctest::Approx(g.axis_node(i)).epsilon(1e-12));

  GridFunction ih = frac_integral(one, 0.5);
  CHECK(ih[g.size() - 1] == doctest::Approx(1.12837916709551257389615890312).epsilon(1e-12));

  GridFunction f = GridFunction::sample(g, [](double t) { return std::pow(t, 0.7); });
  // Γ(1.7)/Γ(2.1), 30-digit value
  const double c = 0.868276179353279232862844295169;
  CHECK(max_rel_error(frac_integral(f, 0.4), [&](double t) { return c * std::pow(t, 1.1); }) <= 1e-3);
}

TEST_CASE("power rule across orders") {
  Grid g(1, 4096);
  for (double alpha : {0.3, 0.5, 1.3})
    for (double p : {0.0, 1.0, 2.0}) {
      GridFunction f = GridFunction::sample(g, [&](double t) { return std::pow(t, p); });
      double c = std::tgamma(p + 1) / std::tgamma(p + 1 + alpha);
      CHECK(max_rel_error(frac_integral(f, alpha), [&](double t) { return c * std::pow(t, p + alpha); }) <=
            1e-3);
    }
}

TEST_CASE("linearity") {
  Grid g(1, 256);
  GridFunction f = GridFunction::sample(g, [](double t) { return std::sin(3 * t); });
  GridFunction h = GridFunction::sample(g, [](double t) { return t * t - 0.2; });
  GridFunction lhs = frac_integral(f * 2.0 + h * -3.0, 0.6);
  GridFunction rhs = frac_integral(f, 0.6) * 2.0 + frac_integral(h, 0.6) * -3.0;
  CHECK(sup_distance(lhs, rhs) <= 1e-13);
}

TEST_CASE("derivative") {
  Grid g(1, 4096);
  GridFunction t = GridFunction::sample(g, [](double x) { return x; });
  FracDerivative d1 = frac_derivative(t, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(d1.value[i] == doctest::Approx(1.0).epsilon(1e-10));

  GridFunction sq = GridFunction::sample(g, [](double x) { return x * x; });
  FracDerivative d = frac_derivative(sq, 1.5);
  CHECK_FALSE(d.precondition_violated);
  CHECK(d.value[g.size() - 1] == doctest::Approx(2.25675833419102514779231780624).epsilon(1e-3));

  GridFunction shifted = GridFunction::sample(g, [](double x) { return 1.0 + x; });
  CHECK(frac_derivative(shifted, 1.5).precondition_violated);
  CHECK_THROWS_AS(frac_derivative(sq, 2.0), DomainError);
}

TEST_CASE("round trip") {
  Grid g(1, 4096);
  GridFunction f = GridFunction::sample(g, [](double t) { return std::sin(2 * t) + t * t; });
  for (double alpha : {0.3, 0.7, 1.3}) {
    FracDerivative back = frac_derivative(frac_integral(f, alpha), alpha);
    CHECK(sup_distance(back.value, f) <= 5e-3);
  }
}

TEST_CASE("semigroup") {
  Grid g(1, 4096);
  GridFunction zero = GridFunction::zeros(g);
  CHECK(semigroup_defect(zero, 0.5, 0.5) == 0.0);
  GridFunction s = GridFunction::sample(g, [](double t) { return std::sin(2 * std::numbers::pi * t); });
  CHECK(semigroup_defect(s, 0.5, 0.5) <= 5e-3);
  GridFunction p = GridFunction::sample(g, [](double t) { return t * t; });
  CHECK(semigroup_defect(p, 0.3, 0.7) <= 5e-3);
}

TEST_CASE("smoothing kernel moments") {
  for (int order : {2, 3, 4}) {
    SmoothingKernel k(order, 0.1);
    CHECK(k.moment(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int q = 1; q < order; ++q) CHECK(std::abs(k.moment(q)) <= 1e-12);
    CHECK(std::abs(k.shape(1.0)) <= 1e-14);
    CHECK(k.shape(-1.5) == 0.0);
  }
  SmoothingKernel k = SmoothingKernel::for_alpha(2.7, 0.05);
  CHECK(k.order() == 3);
  CHECK(k.smoothness() == 5);
}

TEST_CASE("smoothing reproduces constants and lines") {
  Grid g(1, 1024);
  SmoothingKernel k(2, 0.05);
  GridFunction c = GridFunction::sample(g, [](double) { return 2.5; });
  GridFunction sc = smooth(c, k);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(sc[i] - 2.5) <= 1e-8);
  GridFunction t = GridFunction::sample(g, [](double x) { return x; });
  GridFunction st = smooth(t, k);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(st[i] - g.axis_node(i)) <= 1e-6);
}

TEST_CASE("smoothing error of a square-root cusp") {
  Grid g(1, 8192);
  GridFunction f = GridFunction::sample(g, [](double t) { return std::sqrt(std::abs(t - 0.5)); });
  std::vector<double> ls, le;
  for (double sigma : {0.04, 0.02, 0.01}) {
    ls.push_back(std::log(sigma));
    le.push_back(std::log(sup_distance(smooth(f, SmoothingKernel(2, sigma)), f)));
  }
  LineFit fit = fit_line(ls, le);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(0.1 / 0.5));
}

TEST_CASE("grid derivatives are exact on quadratics") {
  const double h = 0.01;
  std::vector<double> f(101);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 3.0 * (i * h) * (i * h) - (i * h) + 1.0;
  auto d1 = grid_derivative(f, h);
  auto d2 = grid_second_derivative(f, h);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(d1[i] == doctest::Approx(6.0 * i * h - 1.0).epsilon(1e-9));
    CHECK(d2[i] == doctest::Approx(6.0).epsilon(1e-7));
  }
}

}  // TEST_SUITE
