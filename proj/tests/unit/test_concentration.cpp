#include <doctest.h>

#include <cmath>

#include "gplab/concentration.hpp"
#include "gplab/error.hpp"
#include "gplab/numerics.hpp"
#include "gplab/process.hpp"
#include "gplab/rkhs.hpp"
#include "gplab/seed.hpp"

using namespace gplab;

namespace {

ConcentrationProfile power_profile(double exponent, double lo = 1e-6, double hi = 10.0, std::size_t count = 400) {
  auto eps = log_spaced(lo, hi, count);
  std::vector<double> d(eps.size(), 0.0), s(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) s[i] = std::pow(eps[i], -exponent);
  return ConcentrationProfile::from_values(eps, d, s, "zero", "closed-form");
}

// Pr(|X| < e, |Y| < e) for (X, Y) = (W(1/2), W(1)) by Gauss-Legendre in x.
double bm_two_node_box(double e) {
  const double sd = std::sqrt(0.5);
  return integrate(
      [&](double x) {
        double dens = std::exp(-x * x / (2 * 0.5)) / (sd * std::sqrt(2 * M_PI));
        return dens * (normal_cdf((e - x) / sd) - normal_cdf((-e - x) / sd));
      },
      -e, e, 200);
}

}  // namespace

TEST_SUITE("concentration-rates") {

TEST_CASE("small-ball basics") {
  Grid g(1, 64);
  SmallBallEstimate est = small_ball(PriorSpec::bm(), g, NormKind::Sup, {0.3, 100.0, 0.1}, 4000, 3);
  REQUIRE(est.entries.size() == 3);
  CHECK(est.entries[0].eps == 0.1);
  CHECK(est.entries[2].hits == 4000);
  CHECK(est.entries[2].exponent == doctest::Approx(0.0));
  for (std::size_t i = 1; i < est.entries.size(); ++i) CHECK(est.entries[i].exponent <= est.entries[i - 1].exponent);
  CHECK(est.entries[0].censored);
  CHECK(est.entries[0].p_hat == doctest::Approx(1.0 / 4000));
}

TEST_CASE("two-node BM box probability") {
  Grid g(1, 2);
  const std::size_t reps = 200000;
  for (double e : {0.5, 1.0}) {
    SmallBallEstimate est = small_ball(PriorSpec::bm(), g, NormKind::Sup, {e}, reps, 17);
    double p = bm_two_node_box(e), se = std::sqrt(p * (1 - p) / reps);
    CHECK(std::abs(est.entries[0].p_hat - p) <= 4.0 * se);
  }
}

TEST_CASE("grid refinement lowers the small-ball probability pathwise") {
  Grid fine(1, 256);
  const std::size_t reps = 2000;
  std::vector<std::uint64_t> seeds(reps);
  for (std::size_t r = 0; r < reps; ++r) seeds[r] = child_seed(21, "small_ball", r);
  Eigen::MatrixXd paths;
  PathSampler(PriorSpec::bm(), fine).draw_batch(seeds, paths);
  for (double e : {0.5, 0.8}) {
    std::size_t coarse_hits = 0, fine_hits = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      double cmax = 0.0, fmax = 0.0;
      for (Eigen::Index i = 0; i < paths.rows(); ++i) {
        double v = std::abs(paths(i, r));
        fmax = std::max(fmax, v);
        if (i % 8 == 0) cmax = std::max(cmax, v);
      }
      coarse_hits += cmax < e;
      fine_hits += fmax < e;
    }
    CHECK(fine_hits <= coarse_hits);
  }
}

TEST_CASE("scaling identity at coupled seeds") {
  Grid g(1, 64);
  const double a = 2.5;
  auto base = small_ball(PriorSpec::bm(), g, NormKind::Sup, {0.2, 0.4}, 3000, 8);
  auto scaled = small_ball(PriorSpec::scaled(PriorSpec::bm(), a), g, NormKind::Sup, {0.2 * a, 0.4 * a}, 3000, 8);
  for (std::size_t i = 0; i < 2; ++i) CHECK(scaled.entries[i].hits == base.entries[i].hits);
}

TEST_CASE("slope window") {
  SmallBallEstimate est;
  est.reps = 1000000;
  for (double e : {0.2, 0.4, 0.8}) {
    SmallBallEntry x;
    x.eps = e;
    x.exponent = 3.0 * std::pow(e, -2.0);
    x.hits = 100;
    est.entries.push_back(x);
  }
  CHECK(small_ball_slope(est).slope == doctest::Approx(2.0).epsilon(1e-12));
  est.entries[0].hits = 1;
  est.entries[1].hits = 1;
  CHECK_THROWS_AS(small_ball_slope(est), RangeError);
}

TEST_CASE("wavelet product lower bound") {
  WaveletSeries one{1, 0.0, 1};
  auto alpha = wavelet_lower_weights(one);
  CHECK(alpha[0] == doctest::Approx(1.0 / 9.0));
  for (double e : {0.1, 1.0, 3.0})
    CHECK(wavelet_small_ball_lower(one, e) ==
          doctest::Approx(-2.0 * std::log(2.0 * normal_cdf(alpha[0] * e) - 1.0)).epsilon(1e-12));
  CHECK(wavelet_small_ball_lower(one, 1e4) <= 1e-12);

  WaveletSeries s{1, 1.0, 6};
  auto w = wavelet_lower_weights(s);
  double sum = 0.0;
  for (double x : w) sum += x;
  CHECK(sum < 1.0);
  for (int j = 2; j <= 6; ++j) CHECK(std::pow(2.0, (j - 1) * 1.0) * w[j - 2] <= std::pow(2.0, j * 1.0) * w[j - 1]);
}

TEST_CASE("wavelet product bound sits below the Monte Carlo probability") {
  WaveletSeries s{1, 1.0, 2};
  Grid g(1, 4);
  const std::size_t reps = 20000;
  double bound_p = std::exp(-wavelet_small_ball_lower(s, 0.5));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto est = small_ball(PriorSpec::wavelet(1, 1.0, 2), g, NormKind::Sup, {0.5}, reps, seed);
    double p = est.entries[0].p_hat, se = std::sqrt(p * (1 - p) / reps);
    CHECK(bound_p <= p + 4.0 * se);
  }
}

TEST_CASE("profile assembly") {
  Grid g(1, 128);
  ProfileOptions o;
  o.reps = 4000;
  o.seed = 5;
  auto eps = log_spaced(0.2, 1.0, 5);
  auto prof = assemble_profile(GridFunction::zeros(g), PriorSpec::bm(), eps, o);
  auto sb = small_ball(PriorSpec::bm(), g, NormKind::Sup, eps, o.reps, o.seed);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    CHECK(prof.entries()[i].D == 0.0);
    CHECK(prof.entries()[i].phi_raw == sb.entries[i].exponent);
  }
  for (std::size_t i = 1; i < eps.size(); ++i) CHECK(prof.entries()[i].phi <= prof.entries()[i - 1].phi);

  WaveletSeries s{1, 1.0, 4};
  WaveletCoefficients w0 = WaveletCoefficients::zeros(WaveletBasis(1, 4));
  w0.mutable_values()[0] = 0.3;
  auto wprof = assemble_profile(w0, s, {0.1, 0.5}, ProfileOptions{});
  for (const auto& e : wprof.entries()) {
    CHECK(e.S == wavelet_small_ball_lower(s, e.eps));
    CHECK(e.D == decentering(w0, s, e.eps, NormKind::Sup).value);
    CHECK(e.provenance_S == "closed-form");
  }
}

TEST_CASE("isotonic regularization and interpolation") {
  auto p = ConcentrationProfile::from_values({0.1, 0.2, 0.4}, {0, 0, 0}, {5.0, 6.0, 1.0}, "d", "s");
  CHECK(p.entries()[0].phi == doctest::Approx(5.5));
  CHECK(p.entries()[1].phi == doctest::Approx(5.5));
  CHECK(p.entries()[2].phi == 1.0);
  CHECK(p.phi_at(0.2) == doctest::Approx(5.5));
  CHECK_THROWS_AS(p.phi_at(0.05), RangeError);
}

TEST_CASE("rate solver on closed-form profiles") {
  RateSolution r = solve_rate([](double e) { return 1.0 / (e * e); }, 1e-6, 10.0, {16, 256, 4096});
  CHECK(*r.points[0].eps_n == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(*r.points[1].eps_n == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(*r.points[2].eps_n == doctest::Approx(0.125).epsilon(1e-3));
  for (const auto& pt : r.points) CHECK(1.0 / (*pt.eps_n * *pt.eps_n) <= pt.n * *pt.eps_n * *pt.eps_n);

  RateSolution c = solve_rate([](double) { return 3.0; }, 1e-6, 10.0, {10, 1000, 1e5});
  CHECK(*c.points[1].eps_n == doctest::Approx(std::sqrt(3.0 / 1000)).epsilon(1e-3));
  CHECK(c.fit->slope == doctest::Approx(-0.5).epsilon(2e-3));

  for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
    RateSolution t = solve_rate(power_profile(1.0 / alpha), {1e2, 1e3, 1e4, 1e5, 1e6});
    CHECK(std::abs(t.fit->slope + alpha / (2 * alpha + 1)) <= 1e-3);
  }
}

TEST_CASE("rate solver drops uncovered n") {
  RateSolution r = solve_rate(power_profile(2.0, 0.1, 1.0, 50), {1.0, 1e12});
  CHECK_FALSE(r.points[1].eps_n.has_value());
  CHECK_FALSE(r.points[1].note.empty());
}

TEST_CASE("sum rule") {
  auto p = power_profile(1.0);
  CHECK(sum_rule({p}, 0.2) == doctest::Approx(2.0 * p.phi_at(0.1)).epsilon(1e-12));
  CHECK(sum_rule({p, p}, 0.2) == doctest::Approx(4.0 * p.phi_at(0.1)).epsilon(1e-12));
  CHECK_THROWS_AS(sum_rule({p}, 1e-7), RangeError);
}

TEST_CASE("sum rule bounds the estimated sum") {
  Grid g(1, 128);
  ProfileOptions o;
  o.reps = 20000;
  auto eps = log_spaced(0.1, 2.0, 12);
  GridFunction zero = GridFunction::zeros(g);
  PriorSpec poly = PriorSpec::random_polynomial(0, false), rl = PriorSpec::riemann_liouville(0.8);
  auto pp = assemble_profile(zero, poly, eps, o);
  auto pr = assemble_profile(zero, rl, eps, o);
  auto ps = assemble_profile(zero, PriorSpec::sum({poly, rl}), eps, o);
  for (const auto& e : ps.entries()) {
    // the bound at ε covers the sum at 2ε; components are read at ε/2
    if (e.eps < 0.4 || e.censored) continue;
    CHECK(sum_rule({pp, pr}, e.eps / 2.0) >= e.phi);
  }
}

TEST_CASE("scale rule") {
  auto p = power_profile(2.0);
  ScaleBounds b = scale_rule(p, 0.5, 2.0, 0.5, 16.0, 0.5);  // n ε² = 4
  CHECK(b.mass_lower == doctest::Approx(0.5 * std::exp(-16.0)).epsilon(1e-14));
  CHECK(b.entropy_radius == doctest::Approx(3.0));
  CHECK(b.entropy_bound == doctest::Approx(48.0));
  CHECK(b.excess_mass_bound == doctest::Approx(std::exp(-8.0)));
  ScaleBounds plain = scale_rule(p, 1.0, 1.0, 1.0, 16.0, 0.5);
  CHECK(plain.mass_lower == doctest::Approx(std::exp(-4.0)));
  CHECK(plain.mass_radius == doctest::Approx(1.0));
  CHECK_THROWS_AS(scale_rule(p, 0.0, 2.0, 0.5, 16.0, 0.5), DomainError);
  CHECK_THROWS_AS(scale_rule(p, 0.5, 2.0, 0.5, 1.0, 0.1), DomainError);
}

}  // TEST_SUITE
