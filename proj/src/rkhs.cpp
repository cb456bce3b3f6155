#include "gplab/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gplab/error.hpp"
#include "gplab/fractional.hpp"
#include "gplab/parallel.hpp"
#include "gplab/seed.hpp"

namespace gplab {

namespace {

double trapezoid(const std::vector<double>& f, double h) {
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

double trapezoid_sq(const std::vector<double>& f, double h) {
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
  return trapezoid(sq, h);
}

std::vector<double> derivative_of_order(std::vector<double> f, int q, double h) {
  for (; q >= 2; q -= 2) f = grid_second_derivative(f, h);
  if (q == 1) f = grid_derivative(f, h);
  return f;
}

void require_1d(const GridFunction& h, const char* who) {
  if (h.grid().dimension() != 1) throw UnsupportedSpec(std::string(who) + ": only defined on [0,1]");
}

struct NormVisitor {
  const GridFunction& h;
  std::vector<std::string>* warnings;

  double operator()(const GramNorm& g) const {
    auto t = h.grid().axis_nodes();
    require_1d(h, "rkhs_norm");
    Eigen::MatrixXd k = g.kernel.gram(t);
    CholeskyFactor f;
    try {
      f = jittered_cholesky(k);
    } catch (const CholeskyFailure& e) {
      throw SingularGram(std::string("rkhs_norm: ") + e.what());
    }
    std::vector<bool> active(h.size(), false);
    for (std::size_t i : f.active) active[i] = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (!active[i] && h[i] != 0.0) {
        if (warnings) warnings->push_back("rkhs_norm: h is nonzero where the kernel variance vanishes");
        return std::numeric_limits<double>::infinity();
      }
    }
    const Eigen::Index n = static_cast<Eigen::Index>(f.active.size());
    if (n == 0) return 0.0;
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = h[f.active[i]];
    Eigen::VectorXd c = f.lower.triangularView<Eigen::Lower>().solve(rhs);
    c = f.lower.transpose().triangularView<Eigen::Upper>().solve(c);
    if (warnings) {
      Eigen::MatrixXd ka(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) ka(i, j) = k(f.active[i], f.active[j]);
      double res = (ka * c - rhs).norm() / std::max(rhs.norm(), 1e-300);
      if (res > 1e-6) warnings->push_back("rkhs_norm: Gram solve relative residual " + std::to_string(res));
    }
    return std::sqrt(std::max(0.0, rhs.dot(c)));
  }

  double operator()(const SobolevNorm& s) const {
    require_1d(h, "rkhs_norm");
    if (s.k < 0) throw DomainError("SobolevNorm: k must be nonnegative");
    const double dx = h.grid().spacing();
    double total = 0.0;
    for (int i = 0; i <= s.k; ++i) {
      double d0 = derivative_of_order(h.vector(), i, dx)[0];
      total += d0 * d0;
    }
    total += trapezoid_sq(derivative_of_order(h.vector(), s.k + 1, dx), dx);
    return std::sqrt(total);
  }

  double operator()(const ReleasedBMNorm&) const {
    require_1d(h, "rkhs_norm");
    const double dx = h.grid().spacing();
    return std::sqrt(h[0] * h[0] + trapezoid_sq(grid_derivative(h.vector(), dx), dx));
  }

  double operator()(const RiemannLiouvilleNorm& r) const {
    require_1d(h, "rkhs_norm");
    double order = r.alpha + 0.5;
    if (!(order > 0.0 && order < 2.0)) throw DomainError("RiemannLiouvilleNorm: need alpha + 1/2 in (0, 2)");
    FracDerivative f = frac_derivative(h, order);
    if (warnings) warnings->insert(warnings->end(), f.warnings.begin(), f.warnings.end());
    return std::sqrt(trapezoid_sq(f.value.vector(), h.grid().spacing())) / std::tgamma(order);
  }

  double operator()(const WaveletSeqNorm&) const {
    throw UnsupportedSpec("rkhs_norm: wavelet norms act on coefficient sequences");
  }
};

}  // namespace

RkhsNorm rkhs_norm_of(const PriorSpec& spec) {
  if (spec.is<WaveletSeries>()) return WaveletSeqNorm{spec.as<WaveletSeries>()};
  return GramNorm{kernel_of(spec)};
}

double rkhs_norm(const GridFunction& h, const RkhsNorm& norm, std::vector<std::string>* warnings) {
  return std::visit(NormVisitor{h, warnings}, norm);
}

double rkhs_norm(const WaveletCoefficients& w, const WaveletSeqNorm& norm) {
  const WaveletSeries& s = norm.series;
  if (w.basis().dimension() != s.d) throw IncompatibleSpecs("rkhs_norm: dimensions differ");
  double total = 0.0;
  for (int j = 1; j <= w.basis().levels(); ++j) {
    double level = 0.0;
    for (double v : w.level(j)) level += v * v;
    if (level == 0.0) continue;
    if (j > s.J) return std::numeric_limits<double>::infinity();
    double mu = wavelet_scale(s, j);
    total += level / (mu * mu);
  }
  return std::sqrt(total);
}

double DecenteringResult::witness_norm() const { return std::sqrt(value); }

struct GramDecenterer::Path {
  Eigen::VectorXd lambda;  // eigenvalues, tiny ones zeroed
  Eigen::VectorXd coeff;   // Uᵀ w0
  const Eigen::MatrixXd* vectors;
  const GridFunction* w0;
  double n;

  double value(double lam) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) <= 0.0) continue;
      double d = lambda(i) + lam * n;
      s += lambda(i) * coeff(i) * coeff(i) / (d * d);
    }
    return s;
  }

  Eigen::VectorXd witness(double lam) const {
    Eigen::VectorXd shrunk(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      shrunk(i) = lambda(i) > 0.0 ? lambda(i) / (lambda(i) + lam * n) * coeff(i) : 0.0;
    return (*vectors) * shrunk;
  }

  double residual(const Eigen::VectorXd& h, NormKind kind) const {
    std::vector<double> r(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) r[i] = (*w0)[i] - h(i);
    return norm_of(GridFunction(w0->grid(), std::move(r)), kind);
  }
};

GramDecenterer::GramDecenterer(const CovarianceKernel& kernel, const Grid& grid) : grid_(grid) {
  if (grid.dimension() != 1) throw UnsupportedSpec("GramDecenterer: kernel priors live on [0,1]");
  auto t = grid.axis_nodes();
  eig_ = symmetric_eigen(kernel.gram(t));
}

GramDecenterer::Path GramDecenterer::path_for(const GridFunction& w0) const {
  if (!(w0.grid() == grid_)) throw DomainError("GramDecenterer: w0 lives on a different grid");
  Path p;
  p.lambda = eig_.values;
  double top = p.lambda.size() ? p.lambda.maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < p.lambda.size(); ++i)
    if (p.lambda(i) < 1e-13 * top) p.lambda(i) = 0.0;
  Eigen::Map<const Eigen::VectorXd> w(w0.values().data(), static_cast<Eigen::Index>(w0.size()));
  p.coeff = eig_.vectors.transpose() * w;
  p.vectors = &eig_.vectors;
  p.w0 = &w0;
  p.n = static_cast<double>(w0.size());
  return p;
}

DecenteringResult GramDecenterer::solve(const GridFunction& w0, double eps, NormKind kind) const {
  if (!(eps > 0.0)) throw DomainError("decentering: eps must be positive");
  DecenteringResult out;
  out.eps = eps;
  out.provenance = "optimizer-upper-bound";
  double w0_norm = norm_of(w0, kind);
  if (w0_norm < eps) {
    out.value = 0.0;
    out.constraint_achieved = w0_norm;
    out.lambda = std::numeric_limits<double>::infinity();
    out.witness = GridFunction::zeros(grid_);
    return out;
  }
  Path p = path_for(w0);
  double top = eig_.values.size() ? std::max(eig_.values.maxCoeff(), 1e-300) : 1.0;
  double lo = std::log(1e-12 * top / p.n), hi = std::log(1e6 * top / p.n);

  auto eval = [&](double log_lam, Eigen::VectorXd& h) {
    h = p.witness(std::exp(log_lam));
    return p.residual(h, kind);
  };
  Eigen::VectorXd h_lo, h_mid;
  double r_lo = eval(lo, h_lo);
  if (!(r_lo < eps))
    throw Infeasible("decentering: w0 is at distance " + std::to_string(r_lo) +
                     " >= eps from the RKHS at grid resolution");
  Eigen::VectorXd h_hi;
  if (eval(hi, h_hi) < eps) {
    lo = hi;
    h_lo = h_hi;
  } else {
    const double tol = std::log1p(1e-3);
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      double r = eval(mid, h_mid);
      if (r < eps) {
        lo = mid;
        h_lo = h_mid;
        r_lo = r;
        if (r >= 0.9 * eps) break;
      } else {
        hi = mid;
      }
    }
  }
  out.lambda = std::exp(lo);
  out.value = p.value(out.lambda);
  out.witness = GridFunction(grid_, std::vector<double>(h_lo.data(), h_lo.data() + h_lo.size()));
  out.constraint_achieved = p.residual(h_lo, kind);
  return out;
}

bool GramDecenterer::ball_member(const GridFunction& w0, double eps, double radius, NormKind kind) const {
  if (norm_of(w0, kind) < eps) return true;
  Path p = path_for(w0);
  double top = eig_.values.size() ? std::max(eig_.values.maxCoeff(), 1e-300) : 1.0;
  double lo = std::log(1e-12 * top / p.n), hi = std::log(1e6 * top / p.n);
  double r2 = radius * radius;
  // value(λ) decreases in λ; the smallest admissible λ gives the closest witness.
  if (p.value(std::exp(lo)) > r2) {
    if (p.value(std::exp(hi)) > r2) return false;
    while (hi - lo > 1e-6) {
      double mid = 0.5 * (lo + hi);
      (p.value(std::exp(mid)) > r2 ? lo : hi) = mid;
    }
    lo = hi;
  }
  return p.residual(p.witness(std::exp(lo)), kind) < eps;
}

DecenteringResult decentering(const GridFunction& w0, const PriorSpec& prior, double eps, NormKind kind) {
  if (prior.is<WaveletSeries>())
    throw UnsupportedSpec("decentering: pass wavelet truths as coefficient sequences");
  return GramDecenterer(kernel_of(prior), w0.grid()).solve(w0, eps, kind);
}

namespace {

// Tail norm of levels above `level`, in the sequence version of `kind`.
double tail_norm(const WaveletCoefficients& w, int level, NormKind kind) {
  const int d = w.basis().dimension();
  double s = 0.0;
  for (int j = level + 1; j <= w.basis().levels(); ++j) {
    if (kind == NormKind::Sup) {
      double mx = 0.0;
      for (double v : w.level(j)) mx = std::max(mx, std::abs(v));
      s += std::pow(2.0, 0.5 * j * d) * mx;
    } else {
      for (double v : w.level(j)) s += v * v;
    }
  }
  return kind == NormKind::Sup ? s : std::sqrt(s);
}

}  // namespace

DecenteringResult decentering(const WaveletCoefficients& w0, const WaveletSeries& prior, double eps, NormKind kind) {
  if (!(eps > 0.0)) throw DomainError("decentering: eps must be positive");
  if (w0.basis().dimension() != prior.d) throw IncompatibleSpecs("decentering: dimensions differ");
  const int usable = std::min(prior.J, w0.basis().levels());
  for (int jp = 0; jp <= usable; ++jp) {
    double r = tail_norm(w0, jp, kind);
    if (!(r < eps)) continue;
    DecenteringResult out;
    out.eps = eps;
    out.provenance = "closed-form";
    out.constraint_achieved = r;
    std::vector<double> h(w0.values().begin(), w0.values().end());
    for (int j = 1; j <= w0.basis().levels(); ++j) {
      double mu = wavelet_scale(prior, j);
      for (std::size_t i = w0.basis().offset(j); i < w0.basis().offset(j + 1); ++i) {
        if (j > jp) {
          h[i] = 0.0;
        } else {
          out.value += h[i] * h[i] / (mu * mu);
        }
      }
    }
    out.witness_coefficients = WaveletCoefficients(w0.basis(), std::move(h));
    return out;
  }
  throw Infeasible("decentering: truth has content beyond the prior's levels at distance >= eps");
}

namespace {

template <class Solve>
std::vector<DecenteringResult> monotone_profile(const std::vector<double>& eps_grid, Solve solve) {
  std::vector<DecenteringResult> raw;
  raw.reserve(eps_grid.size());
  for (double e : eps_grid) raw.push_back(solve(e));
  std::vector<DecenteringResult> out = raw;
  for (auto& r : out) {
    for (const auto& c : raw) {
      if (c.constraint_achieved < r.eps && c.value < r.value) {
        double eps = r.eps;
        r = c;
        r.eps = eps;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<DecenteringResult> decentering_profile(const GridFunction& w0, const PriorSpec& prior,
                                                   const std::vector<double>& eps_grid, NormKind kind) {
  if (prior.is<WaveletSeries>())
    throw UnsupportedSpec("decentering_profile: pass wavelet truths as coefficient sequences");
  GramDecenterer solver(kernel_of(prior), w0.grid());
  return monotone_profile(eps_grid, [&](double e) { return solver.solve(w0, e, kind); });
}

std::vector<DecenteringResult> decentering_profile(const WaveletCoefficients& w0, const WaveletSeries& prior,
                                                   const std::vector<double>& eps_grid, NormKind kind) {
  return monotone_profile(eps_grid, [&](double e) { return decentering(w0, prior, e, kind); });
}

RkhsApproximant rkhs_approximant(const GridFunction& w0, double alpha, double sigma) {
  if (w0.grid().dimension() != 1) throw UnsupportedSpec("rkhs_approximant: only defined on [0,1]");
  if (!(alpha > 0.0)) throw DomainError("rkhs_approximant: alpha must be positive");
  SmoothingKernel phi = SmoothingKernel::for_alpha(alpha, sigma);
  const int degree = rl_polynomial_degree(alpha);
  const double gamma = alpha - degree;  // in (0, 1]
  const double dx = w0.grid().spacing();

  RkhsApproximant out{smooth(w0, phi, 0), 0.0, 0.0, {}};
  double poly_sq = 0.0, fact = 1.0;
  for (int k = 0; k <= degree; ++k) {
    if (k > 0) fact *= k;
    double c = smooth(w0, phi, k)[0] / fact;
    out.polynomial.push_back(c);
    poly_sq += c * c;
  }

  // h − polynomial = I^{ᾱ+1} u with u = w0 ∗ φ_σ^{(ᾱ+1)}, and I^{ᾱ+1} = I^{α+½} I^{½−γ}.
  GridFunction u = smooth(w0, phi, degree + 1);
  double sup_part, l2_part;
  if (gamma <= 0.5) {
    GridFunction g = gamma < 0.5 ? frac_integral(u, 0.5 - gamma) : u;
    sup_part = g.sup_norm();
    l2_part = std::sqrt(trapezoid_sq(g.vector(), dx));
  } else {
    // D^{γ−½} u = u(0) t^{½−γ}/Γ(3/2−γ) + I^{3/2−γ} u′.
    double c1 = u[0];
    double g1_l2 = std::abs(c1) / (std::tgamma(1.5 - gamma) * std::sqrt(2.0 - 2.0 * gamma));
    GridFunction g2 = frac_integral(smooth(w0, phi, degree + 2), 1.5 - gamma);
    sup_part = g1_l2 + g2.sup_norm();
    // L2 of g1 + g2: exact g1 piece, trapezoid for the rest.
    std::vector<double> g(g2.vector());
    double cross = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
      double t = w0.grid().axis_node(i);
      double g1 = c1 * std::pow(t, 0.5 - gamma) / std::tgamma(1.5 - gamma);
      double wgt = (i + 1 == g.size()) ? 0.5 * dx : dx;
      cross += wgt * (2.0 * g1 * g[i]);
    }
    l2_part = std::sqrt(std::max(0.0, g1_l2 * g1_l2 + cross + trapezoid_sq(g, dx)));
  }
  double gscale = std::tgamma(alpha + 0.5);
  out.norm_bound = poly_sq + sup_part * sup_part / (gscale * gscale);
  out.norm_l2 = poly_sq + l2_part * l2_part / (gscale * gscale);
  return out;
}

SieveSpec sieve_params(double n, double eps, double C) {
  if (!(C > 1.0)) throw DomainError("sieve_params: C must exceed 1");
  if (!(n > 0.0 && eps > 0.0)) throw DomainError("sieve_params: n and eps must be positive");
  double x = C * n * eps * eps;
  if (!(x > std::log(2.0))) throw DomainError("sieve_params: exp(-C n eps^2) must be < 1/2");
  SieveSpec s;
  s.n = n;
  s.eps = eps;
  s.C = C;
  s.log_mass_bound = -x;
  s.M = -2.0 * normal_quantile_from_log(-x);
  if (!(s.M > 0.0)) s.M = std::numeric_limits<double>::min();
  return s;
}

SieveExcessMass sieve_excess_mass(const PriorSpec& spec, const SieveSpec& sieve, const Grid& grid,
                                  std::size_t mc_reps, std::uint64_t seed, NormKind kind, int threads) {
  if (mc_reps == 0) throw DomainError("sieve_excess_mass: mc_reps must be positive");
  std::vector<char> outside(mc_reps, 0);
  if (spec.is<WaveletSeries>()) {
    const auto& w = spec.as<WaveletSeries>();
    parallel_for(mc_reps, threads, [&](std::size_t r) {
      WaveletCoefficients c = sample_coefficients(w, child_seed(seed, "sieve", r));
      DecenteringResult d = decentering(c, w, sieve.eps, kind);
      outside[r] = d.value > sieve.M * sieve.M;
    });
  } else {
    GramDecenterer solver(kernel_of(spec), grid);
    PathSampler sampler(spec, grid);
    parallel_for(mc_reps, threads, [&](std::size_t r) {
      GridFunction path = sampler.draw(child_seed(seed, "sieve", r));
      outside[r] = !solver.ball_member(path, sieve.eps, sieve.M, kind);
    });
  }
  SieveExcessMass out;
  out.reps = mc_reps;
  for (char o : outside) out.outside += o;
  out.phat = static_cast<double>(out.outside) / mc_reps;
  out.ci = wilson_interval(out.outside, mc_reps);
  out.threshold = std::exp(sieve.log_mass_bound);
  const double z = 1.959963984540054;
  out.slack = z * z / (mc_reps + z * z);
  out.passes = out.ci.hi <= out.threshold + out.slack;
  return out;
}

}  // namespace gplab
