#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gplab/concentration.hpp"
#include "gplab/error.hpp"
#include "gplab/numerics.hpp"
#include "gplab/process.hpp"
#include "gplab/seed.hpp"

using namespace gplab;

TEST_SUITE("process-kernels") {

TEST_CASE("kernel values") {
  CHECK(kernel_of(PriorSpec::bm())(0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(kernel_of(PriorSpec::fbm(0.5))(0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-14));
  // 0.5^0.6 from a 30-digit evaluation
  CHECK(kernel_of(PriorSpec::fbm(0.3))(0.5, 0.5) == doctest::Approx(0.659753955386447139841).epsilon(1e-14));
  CHECK(kernel_of(PriorSpec::released_bm())(0.3, 0.7) == doctest::Approx(1.3).epsilon(1e-15));
  auto k = kernel_of(PriorSpec::rl_plus_poly(1.2));
  CHECK(k(0.2, 0.9) == k(0.9, 0.2));
}

TEST_CASE("singular covariance against frozen high-precision quadrature") {
  struct Row { double s, t, gamma, value; };
  // mpmath, 30 digits
  const Row rows[] = {{0.3, 0.7, 0.35, 0.119655384232612199669568835622},
                      {0.5, 0.5, 0.35, 0.181050649021311228611387613552},
                      {0.2, 0.9, 0.35, 0.0784733394104105097553342973253},
                      {0.3, 0.7, -0.2, 0.542832159116794945867986830777},
                      {0.5, 0.5, -0.2, 1.09958992564407860709220131958},
                      {0.9, 0.95, -0.2, 1.43502991569390692814026195185}};
  for (const auto& r : rows)
    CHECK(singular_path_covariance(r.s, r.t, r.gamma) == doctest::Approx(r.value).epsilon(1e-12));
  CHECK(singular_path_covariance(0.0, 0.5, 0.35) == 0.0);
}

TEST_CASE("fBm one half equals BM entrywise") {
  Grid g(1, 64);
  auto nodes = g.axis_nodes();
  Eigen::MatrixXd a = kernel_of(PriorSpec::fbm(0.5)).gram(nodes);
  Eigen::MatrixXd b = kernel_of(PriorSpec::bm()).gram(nodes);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Gram matrices are positive semidefinite after small jitter") {
  Grid g(1, 256);
  auto nodes = g.axis_nodes();
  for (double alpha : {0.2, 0.5, 0.8}) {
    CholeskyFactor f = jittered_cholesky(kernel_of(PriorSpec::fbm(alpha)).gram(nodes));
    CHECK(f.relative_jitter <= 1e-6);
    CHECK(f.active.size() == nodes.size() - 1);  // t = 0 has zero variance
  }
}

TEST_CASE("sampled paths") {
  Grid g(1, 128);
  GridFunction w = sample_path(PriorSpec::bm(), g, 11);
  CHECK(w[0] == 0.0);
  CHECK(sample_path(PriorSpec::bm(), g, 11).vector() == w.vector());
  CHECK(sample_path(PriorSpec::fbm(0.5), g, 11).vector() == w.vector());
  CHECK(sample_path(PriorSpec::bm(), g, 12).vector() != w.vector());

  // sums draw component i with child_seed(seed, "component", i)
  PriorSpec bm = PriorSpec::bm(), poly = PriorSpec::random_polynomial(2, false);
  GridFunction s = sample_path(PriorSpec::sum({bm, poly}), g, 5);
  GridFunction a = sample_path(bm, g, child_seed(5, "component", 0));
  GridFunction b = sample_path(poly, g, child_seed(5, "component", 1));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(s[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-14));
}

TEST_CASE("moments at t = 1") {
  Grid g(1, 32);
  const std::size_t reps = 10000;
  std::vector<std::uint64_t> seeds(reps);
  for (std::size_t r = 0; r < reps; ++r) seeds[r] = child_seed(99, "path", r);

  Eigen::MatrixXd out;
  PathSampler(PriorSpec::rl_plus_poly(1.2), g).draw_batch(seeds, out);
  Eigen::VectorXd last = out.row(g.size() - 1).transpose();
  double mean = last.mean();
  double var = (last.array() - mean).square().sum() / (reps - 1);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / reps));

  PathSampler(PriorSpec::fbm(0.5), g).draw_batch(seeds, out);
  last = out.row(g.size() - 1).transpose();
  double m2 = last.array().square().mean();
  // Var of the sample second moment of N(0,1) is 2/reps
  CHECK(std::abs(m2 - 1.0) <= 4.0 * std::sqrt(2.0 / reps));
}

TEST_CASE("truncation level") {
  CHECK(truncation_level(1.0, 1, 4096) == 4);
  CHECK(truncation_level(0.5, 1, 1024) == 5);
  CHECK(truncation_level(1.0, 1, 2) == 1);
  CHECK_THROWS_AS(truncation_level(0.0, 1, 16), DomainError);
}

TEST_CASE("wavelet coefficient draws") {
  WaveletSeries deep{1, 0.5, 8}, shallow{1, 0.5, 4};
  auto a = sample_coefficients(deep, 3), b = sample_coefficients(shallow, 3);
  for (int j = 1; j <= 4; ++j) {
    auto la = a.level(j), lb = b.level(j);
    for (std::size_t k = 0; k < la.size(); ++k) CHECK(la[k] == lb[k]);
  }
  // per-level energy E Σ_k (μ_j Z)^2 = μ_j² 2^j
  const int reps = 4000;
  const int j = 3;
  double mean = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto l = sample_coefficients(deep, child_seed(4, "energy", r)).level(j);
    for (double v : l) mean += v * v;
  }
  mean /= reps;
  double expect = std::pow(wavelet_scale(deep, j), 2) * 8.0;
  // Σ of 8 squared normals has variance 2·8·μ⁴
  CHECK(std::abs(mean - expect) <= 4.0 * expect * std::sqrt(2.0 / 8.0 / reps));
}

TEST_CASE("truncation gap") {
  Grid g(1, 256);
  PriorSpec full = PriorSpec::wavelet(1, 0.5, 8), trunc = PriorSpec::wavelet(1, 0.5, 4);
  TruncationGap same = mean_sq_truncation_gap(full, full, g, 1e6, 200, 1);
  CHECK(same.estimate == 0.0);
  CHECK(same.passes);
  TruncationGap gap = mean_sq_truncation_gap(full, trunc, g, 16, 4000, 2);
  double exact = 0.0;
  for (int j = 5; j <= 8; ++j) exact += 10.0 * std::pow(2.0, j) * std::pow(wavelet_scale({1, 0.5, 8}, j), 2);
  CHECK(gap.exact == doctest::Approx(exact).epsilon(1e-13));
  double se = (gap.ci.hi - gap.estimate) / 1.959963984540054;
  CHECK(std::abs(gap.estimate - exact) <= 4.0 * se);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(PriorSpec::fbm(1.0), DomainError);
  CHECK_THROWS_AS(PriorSpec::fbm(0.0), DomainError);
  CHECK_THROWS_AS(PriorSpec::rl_plus_poly(-1.0), DomainError);
  CHECK_THROWS_AS(PriorSpec::integrated_bm(-1), DomainError);
  CHECK_THROWS_AS(PriorSpec::wavelet(3, 1.0, 4), DomainError);
  CHECK_THROWS_AS(PriorSpec::sum({}), DomainError);
}

}  // TEST_SUITE
