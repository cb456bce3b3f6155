#include "gplab/check.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gplab/concentration.hpp"
#include "gplab/error.hpp"
#include "gplab/fractional.hpp"
#include "gplab/models.hpp"
#include "gplab/parallel.hpp"
#include "gplab/process.hpp"
#include "gplab/seed.hpp"

namespace gplab {

namespace {

CheckResult make(std::string name, double value, double threshold, std::string detail = "") {
  return {std::move(name), value, threshold, value <= threshold, std::move(detail)};
}

double rel_sup(const GridFunction& got, const std::function<double(double)>& exact) {
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double e = exact(got.grid().axis_node(i));
    err = std::max(err, std::abs(got[i] - e));
    scale = std::max(scale, std::abs(e));
  }
  return err / scale;
}

// Smooth random function: Σ_{k≤4} c_k sin(kπt + φ_k), rescaled to sup ≤ radius.
GridFunction random_smooth(const Grid& g, Rng& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double c[4], ph[4];
  for (int k = 0; k < 4; ++k) {
    c[k] = u(rng) / (k + 1);
    ph[k] = std::numbers::pi * u(rng);
  }
  auto f = GridFunction::sample(g, [&](double t) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += c[k] * std::sin((k + 1) * std::numbers::pi * t + ph[k]);
    return s;
  });
  double sup = f.sup_norm();
  double target = radius * (0.5 + 0.5 * std::abs(u(rng)));
  return sup > 0.0 ? f * (target / sup) : f;
}

}  // namespace

std::vector<CheckResult> run_checks(const CheckTolerances& tol, std::uint64_t seed, int threads) {
  std::vector<CheckResult> out;
  const Grid fine(1, tol.grid_m);

  // Fractional integral power rule, and the derivative on t², t³.
  for (double alpha : {0.3, 0.5, 0.7, 1.0, 1.3}) {
    for (double p : {0.0, 0.5, 1.0, 2.0}) {
      auto f = GridFunction::sample(fine, [p](double t) { return std::pow(t, p); });
      double ci = std::tgamma(p + 1) / std::tgamma(p + 1 + alpha);
      double ei = rel_sup(frac_integral(f, alpha), [&](double t) { return ci * std::pow(t, p + alpha); });
      out.push_back(make("power_rule_integral(alpha=" + std::to_string(alpha) + ",p=" + std::to_string(p) + ")", ei,
                         tol.power_rule));
    }
  }
  for (double alpha : {0.3, 0.7, 1.5}) {
    for (double p : {2.0, 3.0}) {
      auto f = GridFunction::sample(fine, [p](double t) { return std::pow(t, p); });
      double cd = std::tgamma(p + 1) / std::tgamma(p + 1 - alpha);
      double ed = rel_sup(frac_derivative(f, alpha).value, [&](double t) { return cd * std::pow(t, p - alpha); });
      out.push_back(make("power_rule_derivative(alpha=" + std::to_string(alpha) + ",p=" + std::to_string(p) + ")",
                         ed, tol.power_rule));
    }
  }

  // Semigroup and round trip on f(t) = t·e^{−t} + sin(3t), f(0) = 0.
  auto g = GridFunction::sample(fine, [](double t) { return t * std::exp(-t) + std::sin(3.0 * t); });
  for (double a : {0.3, 0.5, 0.7})
    for (double b : {0.3, 0.5, 0.7})
      out.push_back(make("semigroup(alpha=" + std::to_string(a) + ",beta=" + std::to_string(b) + ")",
                         semigroup_defect(g, a, b), tol.semigroup));
  for (double a : {0.3, 0.5, 0.7, 1.3}) {
    auto back = frac_derivative(frac_integral(g, a), a).value;
    out.push_back(make("round_trip(alpha=" + std::to_string(a) + ")", sup_distance(back, g), tol.round_trip));
  }

  // Distance inequalities on random smooth pairs.
  {
    const Grid grid(1, 512);
    Rng rng(child_seed(seed, "check_pairs", 0));
    double worst31 = -1e300, worst32 = -1e300;
    for (std::size_t i = 0; i < tol.random_pairs; ++i) {
      auto w = random_smooth(grid, rng, 2.0);
      auto v = w + random_smooth(grid, rng, 2.0);
      auto c31 = check_density_bounds(v, w, 8.0, tol.inequality_slack);
      worst31 = std::max(worst31, c31.checks[0].lhs - c31.checks[0].rhs);
      for (double r : {2.0, 4.0}) {
        auto c32 = check_classification_bounds(v, w, r, Link::Logistic, tol.inequality_slack);
        worst32 = std::max(worst32, c32.checks[0].lhs);
      }
    }
    out.push_back(make("hellinger_bound(max lhs-rhs)", worst31, tol.inequality_slack));
    out.push_back(make("bernoulli_identity(max |lhs-rhs|)", worst32, tol.inequality_slack));
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      double x = -20.0 + 40.0 * i / 999.0;
      double p = link_cdf(Link::Logistic, x);
      worst = std::max(worst, std::abs(link_density(Link::Logistic, x) - p * (1.0 - p)));
    }
    out.push_back(make("logistic_identity", worst, tol.logistic));
  }

  // Kernel validity.
  {
    const Grid grid(1, 256);
    std::vector<double> pts;
    for (std::size_t i = 1; i <= grid.m(); ++i) pts.push_back(grid.axis_node(i));
    for (double a : {0.2, 0.5, 0.8}) {
      auto k = kernel_of(PriorSpec::fbm(a)).gram(pts);
      double rel = 0.0;
      std::string detail;
      try {
        rel = jittered_cholesky(k).relative_jitter;
      } catch (const Error& e) {
        rel = std::numeric_limits<double>::infinity();
        detail = e.what();
      }
      out.push_back(make("fbm_psd(alpha=" + std::to_string(a) + ",relative_jitter)", rel, 1e-6, detail));
    }
    auto kf = kernel_of(PriorSpec::fbm(0.5)).gram(pts), kb = kernel_of(PriorSpec::bm()).gram(pts);
    out.push_back(make("fbm_half_equals_bm", (kf - kb).cwiseAbs().maxCoeff(), tol.kernel));
  }

  // Conjugate oracles.
  {
    WaveletSeries prior{1, 1.0, 4};
    WaveletBasis basis(1, 6);
    std::vector<double> theta(basis.total());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 0.3 * std::cos(1.3 * i);
    const double n = 256.0;
    auto obs = observe_whitenoise(WaveletCoefficients(basis, theta), n, child_seed(seed, "check_whitenoise", 0));
    auto post = whitenoise_posterior(obs, prior);
    double worst = 0.0;
    for (int j = 1; j <= prior.J; ++j) {
      double mu = wavelet_scale(prior, j), s = 1.0 / std::sqrt(n);
      for (std::size_t i = basis.offset(j); i < basis.offset(j + 1); ++i) {
        double y = obs.y.values()[i];
        // Tensor Gauss-Legendre panels over ±14 prior sd.
        double z0 = 0.0, z1 = 0.0, z2 = 0.0;
        const int panels = 800;
        const double lo = -14.0 * mu, hi = 14.0 * mu, wdt = (hi - lo) / panels;
        const auto& q = gauss_legendre(16);
        for (int pnl = 0; pnl < panels; ++pnl)
          for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            double x = lo + wdt * (pnl + 0.5 + 0.5 * q.nodes[k]);
            double dens = q.weights[k] * std::exp(-0.5 * x * x / (mu * mu) - 0.5 * (y - x) * (y - x) / (s * s));
            z0 += dens;
            z1 += dens * x;
            z2 += dens * x * x;
          }
        double m = z1 / z0, v = z2 / z0 - m * m;
        worst = std::max({worst, std::abs(m - post.mean[i]), std::abs(v - post.variance[i])});
      }
    }
    out.push_back(make("whitenoise_conjugacy", worst, tol.conjugate));

    RegressionModel model;
    model.design = {0.5};
    model.sigma0 = model.sigma_lo = model.sigma_hi = std::sqrt(0.5);
    auto reg = regression_posterior(model, {1.0}, PriorSpec::bm());
    out.push_back(make("regression_single_point", std::abs(reg.mean(0) - 0.5), tol.conjugate));
  }

  // Closed-form rate profiles.
  {
    auto sol = solve_rate([](double e) { return 1.0 / (e * e); }, 1e-6, 1e3, {16.0, 256.0, 4096.0}, tol.rate);
    double worst = 0.0;
    const double expect[] = {0.5, 0.25, 0.125};
    for (std::size_t i = 0; i < 3; ++i)
      worst = std::max(worst, sol.points[i].eps_n ? std::abs(*sol.points[i].eps_n / expect[i] - 1.0) : 1.0);
    out.push_back(make("rate_inverse_square", worst, tol.rate));
    for (double a : {0.25, 0.5, 1.0, 2.0}) {
      auto s = solve_rate([a](double e) { return std::pow(e, -1.0 / a); }, 1e-12, 1e3,
                          {1e2, 1e3, 1e4, 1e5, 1e6}, tol.rate);
      double slope = s.fit ? s.fit->slope : std::numeric_limits<double>::infinity();
      out.push_back(make("rate_power(alpha=" + std::to_string(a) + ")", std::abs(slope + a / (2 * a + 1)), tol.rate));
    }
  }
  (void)threads;
  return out;
}

}  // namespace gplab
