#include <doctest.h>

#include <cmath>
#include <limits>

#include "gplab/concentration.hpp"
#include "gplab/error.hpp"
#include "gplab/process.hpp"
#include "gplab/rkhs.hpp"
#include "gplab/seed.hpp"

using namespace gplab;

namespace {

// Exact min Σ h²/μ² subject to ‖h − w‖₂ ≤ eps, by bisection on the ridge multiplier.
double exact_l2_decentering(const WaveletCoefficients& w, const WaveletSeries& s, double eps) {
  std::vector<double> mu2(w.values().size());
  for (int j = 1; j <= w.basis().levels(); ++j)
    for (std::size_t i = w.basis().offset(j); i < w.basis().offset(j + 1); ++i) mu2[i] = std::pow(wavelet_scale(s, j), 2);
  auto residual = [&](double lambda) {
    double r = 0.0;
    for (std::size_t i = 0; i < mu2.size(); ++i) r += std::pow(w.values()[i] * lambda / (mu2[i] + lambda), 2);
    return r;
  };
  if (w.l2_norm() <= eps) return 0.0;
  double lo = -80.0, hi = 80.0;  // log λ
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (residual(std::exp(mid)) > eps * eps ? hi : lo) = mid;
  }
  double lambda = std::exp(lo), value = 0.0;
  for (std::size_t i = 0; i < mu2.size(); ++i) value += std::pow(w.values()[i] * mu2[i] / (mu2[i] + lambda), 2) / mu2[i];
  return value;
}

}  // namespace

TEST_SUITE("rkhs-geometry") {

TEST_CASE("closed-form norms") {
  Grid g(1, 2048);
  GridFunction t = GridFunction::sample(g, [](double x) { return x; });
  CHECK(rkhs_norm(t, ReleasedBMNorm{}) == doctest::Approx(1.0).epsilon(1e-9));
  GridFunction half_sq = GridFunction::sample(g, [](double x) { return 0.5 * x * x; });
  CHECK(rkhs_norm(half_sq, SobolevNorm{1}) == doctest::Approx(1.0).epsilon(1e-6));

  WaveletSeries s{1, 1.0, 4};
  WaveletCoefficients w = WaveletCoefficients::zeros(WaveletBasis(1, 4));
  w.mutable_values()[WaveletBasis(1, 4).offset(3) + 2] = wavelet_scale(s, 3);
  CHECK(rkhs_norm(w, WaveletSeqNorm{s}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Gram norm agrees with the released-BM norm on a line") {
  Grid g(1, 128);
  GridFunction h = GridFunction::sample(g, [](double x) { return 0.3 + 2.0 * x; });
  double gram = rkhs_norm(h, GramNorm{kernel_of(PriorSpec::released_bm())});
  // the minimal interpolant of a line is the line itself: 0.3² + 2²
  CHECK(gram == doctest::Approx(std::sqrt(0.09 + 4.0)).epsilon(1e-8));
  // BM cannot reach h(0) ≠ 0
  CHECK(rkhs_norm(h, GramNorm{kernel_of(PriorSpec::bm())}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("decentering of elements and of zero") {
  Grid g(1, 256);
  GridFunction t = GridFunction::sample(g, [](double x) { return x; });
  GridFunction zero = GridFunction::zeros(g);
  for (double eps : {0.2, 0.05, 0.01}) {
    DecenteringResult d = decentering(t, PriorSpec::released_bm(), eps, NormKind::Sup);
    CHECK(d.value <= 1.0 + 1e-9);
    CHECK(d.constraint_achieved < eps);
    CHECK(d.provenance == "optimizer-upper-bound");
    CHECK(decentering(zero, PriorSpec::released_bm(), eps, NormKind::Sup).value == 0.0);
  }
}

TEST_CASE("decentering profile is nonincreasing in eps") {
  Grid g(1, 256);
  GridFunction w0 = GridFunction::sample(g, [](double x) { return std::sqrt(std::abs(x - 0.5)); });
  auto prof = decentering_profile(w0, PriorSpec::released_bm(), {0.02, 0.04, 0.08, 0.16}, NormKind::Sup);
  for (std::size_t i = 1; i < prof.size(); ++i) CHECK(prof[i].value <= prof[i - 1].value);
  for (const auto& d : prof) CHECK(d.constraint_achieved < d.eps);
}

TEST_CASE("wavelet decentering is the projection bound") {
  WaveletSeries s{1, 1.0, 6};
  WaveletBasis b(1, 6);
  std::vector<double> v(b.total());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(1.3 * i) * std::pow(0.6, 1 + static_cast<int>(std::log2(i + 2.0)));
  WaveletCoefficients w0(b, v);
  const double eps = 0.05;
  DecenteringResult d = decentering(w0, s, eps, NormKind::L2);
  // brute force: smallest J' whose tail is below eps
  for (int jp = 0; jp <= 6; ++jp) {
    double tail = 0.0, head = 0.0;
    for (int j = 1; j <= 6; ++j)
      for (double x : w0.level(j)) (j > jp ? tail : head) += j > jp ? x * x : x * x / std::pow(wavelet_scale(s, j), 2);
    if (std::sqrt(tail) < eps) {
      CHECK(d.value == doctest::Approx(head).epsilon(1e-9));
      break;
    }
  }
  CHECK(d.provenance == "closed-form");
  CHECK(d.value >= exact_l2_decentering(w0, s, eps) - 1e-12);
}

TEST_CASE("smoothing approximant") {
  Grid g(1, 4096);
  GridFunction zero = GridFunction::zeros(g);
  RkhsApproximant z = rkhs_approximant(zero, 0.7, 0.02);
  CHECK(z.h.sup_norm() == 0.0);
  CHECK(z.norm_bound == 0.0);

  GridFunction lin = GridFunction::sample(g, [](double x) { return 0.4 - 1.5 * x; });
  RkhsApproximant a = rkhs_approximant(lin, 1.6, 0.05);
  CHECK(sup_distance(a.h, lin) <= 1e-6 * lin.sup_norm());

  GridFunction cusp = GridFunction::sample(g, [](double x) { return std::pow(std::abs(x - 0.5), 0.7); });
  std::vector<double> ls, lb;
  for (double sigma : {0.04, 0.02, 0.01}) {
    ls.push_back(std::log(sigma));
    lb.push_back(std::log(rkhs_approximant(cusp, 0.7, sigma).norm_bound));
  }
  CHECK(std::abs(fit_line(ls, lb).slope + 1.0) <= 0.3);
}

TEST_CASE("sieve radius") {
  SieveSpec edge = sieve_params(1.0, std::sqrt((std::log(2.0) + 1e-9) / 2.0), 2.0);
  CHECK(edge.M >= 0.0);
  CHECK(edge.M <= 1e-4);
  SieveSpec s = sieve_params(4.0, 1.0, 2.0);  // C n ε² = 8
  CHECK(s.M == doctest::Approx(6.80238531228933105547774992332).epsilon(1e-13));
  CHECK(0.5 * s.M * s.M <= 5.0 * 8.0);
  CHECK_THROWS_AS(sieve_params(1.0, 0.5, 2.0), DomainError);
}

TEST_CASE("sieve excess mass limits") {
  Grid g(1, 64);
  SieveSpec huge_m = sieve_params(1.0, 0.01, 4e6);
  SieveExcessMass a = sieve_excess_mass(PriorSpec::bm(), huge_m, g, 100, 1);
  CHECK(a.outside == 0);
  SieveSpec wide = sieve_params(1.0, 5.0, 2.0);
  wide.M = 0.0;
  CHECK(sieve_excess_mass(PriorSpec::bm(), wide, g, 100, 1).outside == 0);
}

TEST_CASE("wavelet sieve against exact membership") {
  WaveletSeries s{1, 1.0, 4};
  const double n = 1024;
  Grid g(1, 64);
  ProfileOptions o;  // sup-norm closed form; the sequence sup norm dominates ℓ2
  auto prof = assemble_profile(WaveletCoefficients::zeros(WaveletBasis(1, 4)), s, log_spaced(0.01, 2.0, 40), o);
  RateSolution rate = solve_rate(prof, {n});
  REQUIRE(rate.points[0].eps_n.has_value());
  SieveSpec sieve = sieve_params(n, *rate.points[0].eps_n, 2.0);
  const std::size_t reps = 2000;
  SieveExcessMass m = sieve_excess_mass(PriorSpec::wavelet(1, 1.0, 4), sieve, g, reps, 7, NormKind::L2);
  CHECK(m.passes);
  std::size_t exact_out = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    WaveletCoefficients c = sample_coefficients(s, child_seed(7, "sieve", r));
    exact_out += exact_l2_decentering(c, s, sieve.eps) > sieve.M * sieve.M;
  }
  CHECK(exact_out <= m.outside);
}

}  // TEST_SUITE
