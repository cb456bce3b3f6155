#include "gplab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gplab/error.hpp"
#include "gplab/seed.hpp"

namespace gplab {

namespace {

double log_normalizer(const GridFunction& w) {
  auto wt = w.grid().trapezoid_weights();
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : w.values()) mx = std::max(mx, v);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += wt[i] * std::exp(w[i] - mx);
  return mx + std::log(s);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

GridFunction normalized_density(const GridFunction& w) {
  double lz = log_normalizer(w);
  std::vector<double> p(w.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(w[i] - lz);
  return GridFunction(w.grid(), std::move(p));
}

DensityDistances density_distances(const GridFunction& v, const GridFunction& w) {
  if (!(v.grid() == w.grid())) throw DomainError("density_distances: grids differ");
  auto wt = v.grid().trapezoid_weights();
  double lzv = log_normalizer(v), lzw = log_normalizer(w);
  DensityDistances d;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double lpv = v[i] - lzv, lpw = w[i] - lzw;
    double pv = std::exp(lpv);
    double diff = std::exp(0.5 * lpv) - std::exp(0.5 * lpw);
    double lr = lpv - lpw;
    d.hellinger += wt[i] * diff * diff;
    d.kl += wt[i] * pv * lr;
    d.v_div += wt[i] * pv * lr * lr;
  }
  d.hellinger = std::sqrt(d.hellinger);
  d.kl = std::max(0.0, d.kl);
  return d;
}

namespace {

InequalityReport finish_checks(std::vector<InequalityCheck> checks, double slack) {
  InequalityReport out;
  out.all_pass = true;
  for (auto& c : checks) {
    c.pass = c.lhs <= c.rhs + slack;
    out.all_pass = out.all_pass && c.pass;
  }
  out.checks = std::move(checks);
  return out;
}

}  // namespace

InequalityReport check_density_bounds(const GridFunction& v, const GridFunction& w, double constant, double slack) {
  DensityDistances d = density_distances(v, w);
  double delta = sup_distance(v, w);
  double e = std::exp(delta);
  return finish_checks({{"hellinger", d.hellinger, delta * std::sqrt(e), false},
                        {"kl", d.kl, constant * delta * delta * e * (1.0 + delta), false},
                        {"v_div", d.v_div, constant * delta * delta * e * (1.0 + delta) * (1.0 + delta), false}},
                       slack);
}

std::vector<double> sample_density_data(const GridFunction& w0, std::size_t n, std::uint64_t seed) {
  if (w0.grid().dimension() != 1) throw UnsupportedSpec("sample_density_data: only defined on [0,1]");
  const std::size_t cells = w0.grid().m();
  const double h = w0.grid().spacing();
  double mx = w0.sup_norm();
  std::vector<double> cdf(cells);
  double total = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    total += 0.5 * h * (std::exp(w0[c] - mx) + std::exp(w0[c + 1] - mx));
    cdf[c] = total;
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& xi : x) {
    double target = u(rng) * total;
    std::size_t c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
    c = std::min(c, cells - 1);
    xi = (static_cast<double>(c) + u(rng)) * h;
  }
  return x;
}

double link_cdf(Link link, double x) {
  if (link == Link::Logistic) return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return normal_cdf(x);
}

double link_density(Link link, double x) {
  if (link == Link::Logistic) {
    double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
  }
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double s_function(Link link, double w, double w0) {
  double lo = std::min(w, w0), hi = std::max(w, w0);
  double s = 1.0;
  const int points = 65;
  for (int i = 0; i < points; ++i) {
    double v = lo + (hi - lo) * i / (points - 1.0);
    double ratio = link_density(link, v) / (link_cdf(link, v) * link_cdf(link, -v));
    if (std::isfinite(ratio)) s = std::max(s, std::abs(ratio));
  }
  return s;
}

double bernoulli_kl(const GridFunction& w, const GridFunction& w0, Link link) {
  if (!(w.grid() == w0.grid())) throw DomainError("bernoulli_kl: grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double p0 = link_cdf(link, w0[i]), p = link_cdf(link, w[i]);
    double q0 = link_cdf(link, -w0[i]), q = link_cdf(link, -w[i]);
    s += p0 * std::log(p0 / p) + q0 * std::log(q0 / q);
  }
  return s / w.size();
}

InequalityReport check_classification_bounds(const GridFunction& v, const GridFunction& w, double r, Link link, double slack) {
  if (!(v.grid() == w.grid())) throw DomainError("check_classification_bounds: grids differ");
  if (!(r > 1.0)) throw DomainError("check_classification_bounds: r must exceed 1");
  const double n = static_cast<double>(v.size());
  double joint = 0.0, link_gap = 0.0, arg_gap = 0.0, psi_sup = 0.0;
  double kl_rhs = 0.0, vdiv = 0.0, vdiv_rhs = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double pv = link_cdf(link, v[i]), pw = link_cdf(link, w[i]);
    double qv = link_cdf(link, -v[i]), qw = link_cdf(link, -w[i]);
    joint += std::pow(std::abs(pv - pw), r) + std::pow(std::abs(qv - qw), r);
    link_gap += std::pow(std::abs(pv - pw), r);
    arg_gap += std::pow(std::abs(v[i] - w[i]), r);
    double lo = std::min(v[i], w[i]), hi = std::max(v[i], w[i]);
    for (int k = 0; k <= 16; ++k) psi_sup = std::max(psi_sup, link_density(link, lo + (hi - lo) * k / 16.0));
    // K and V with w0 := w, w := v.
    double s = s_function(link, v[i], w[i]);
    double d = v[i] - w[i];
    kl_rhs += d * d * s;
    vdiv_rhs += d * d * s * s;
    double l1 = std::log(pw / pv), l0 = std::log(qw / qv);
    vdiv += pw * l1 * l1 + qw * l0 * l0;
  }
  double lhs_identity = std::pow(joint / n, 1.0 / r);
  double rhs_identity = std::pow(2.0, 1.0 / r) * std::pow(link_gap / n, 1.0 / r);
  std::vector<InequalityCheck> checks{
      {"density_identity", std::abs(lhs_identity - rhs_identity), 0.0, false},
      {"density_bound", rhs_identity, std::pow(2.0, 1.0 / r) * psi_sup * std::pow(arg_gap / n, 1.0 / r), false},
      {"kl", bernoulli_kl(v, w, link), kl_rhs / n, false},
      {"v_div", vdiv / n, vdiv_rhs / n, false}};
  // The identity is checked relative to its size.
  checks[0].rhs = 1e-12 * std::max(1.0, lhs_identity);
  return finish_checks(std::move(checks), slack);
}

ClassificationData sample_classification_data(const std::function<double(double)>& w0, std::size_t n,
                                              std::uint64_t seed) {
  ClassificationData data;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double x = (i + 0.5) / n;
    data.design.push_back(x);
    data.labels.push_back(u(rng) < link_cdf(Link::Logistic, w0(x)) ? 1 : 0);
  }
  return data;
}

std::size_t SeriesPrior::active() const {
  std::size_t total = basis().total();
  return max_coefficients == 0 ? total : std::min(total, max_coefficients);
}

std::vector<double> SeriesPrior::sd() const {
  WaveletBasis b = basis();
  std::vector<double> out;
  for (int j = 1; j <= series.J; ++j)
    for (std::size_t k = 0; k < b.count(j); ++k) out.push_back(wavelet_scale(series, j));
  out.resize(active());
  return out;
}

std::vector<double> PosteriorSample::mean() const {
  std::vector<double> m(basis.total(), 0.0);
  for (const auto& d : draws)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += d[i];
  for (double& v : m) v /= std::max<std::size_t>(1, draws.size());
  return m;
}

double PosteriorSample::mc_standard_error(std::size_t i, std::size_t batches) const {
  std::size_t per = draws.size() / batches;
  if (per < 2) throw DomainError("mc_standard_error: too few draws for the batch count");
  std::vector<double> bm(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t t = b * per; t < (b + 1) * per; ++t) bm[b] += draws[t][i];
    bm[b] /= per;
  }
  double mean = 0.0;
  for (double v : bm) mean += v;
  mean /= batches;
  double var = 0.0;
  for (double v : bm) var += (v - mean) * (v - mean);
  var /= (batches - 1);
  return std::sqrt(var / batches);
}

GridFunction PosteriorSample::synthesize(std::size_t draw, const Grid& grid) const {
  return WaveletCoefficients(basis, draws.at(draw)).synthesize(grid);
}

std::vector<double> haar_cell_values(const WaveletBasis& basis, const std::vector<double>& coefficients) {
  if (basis.dimension() != 1) throw UnsupportedSpec("haar_cell_values: d = 1 only");
  const int J = basis.levels();
  const std::size_t cells = std::size_t{1} << (J + 1);
  std::vector<double> out(cells, 0.0);
  for (int j = 1; j <= J; ++j) {
    const double amp = std::pow(2.0, 0.5 * j);
    const std::size_t off = basis.offset(j);
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t k = c >> (J + 1 - j);
      double sign = ((c >> (J - j)) & 1u) ? -1.0 : 1.0;
      out[c] += coefficients[off + k] * amp * sign;
    }
  }
  return out;
}

namespace {

template <class LogLik>
PosteriorSample run_metropolis(const SeriesPrior& prior, LogLik&& loglik, const McmcOptions& o, std::uint64_t seed) {
  if (o.thin == 0) throw DomainError("mcmc: thin must be positive");
  PosteriorSample out;
  out.basis = prior.basis();
  const std::size_t total = out.basis.total();
  const std::size_t dim = prior.active();
  const std::vector<double> sd = prior.sd();

  Rng rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<double> theta(total, 0.0), proposal(total, 0.0);
  auto log_prior = [&](const std::vector<double>& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s -= 0.5 * (t[i] / sd[i]) * (t[i] / sd[i]);
    return s;
  };
  double current = log_prior(theta) + loglik(theta);
  std::vector<double> step(sd);
  double scale = o.proposal_scale * 2.38 / std::sqrt(static_cast<double>(dim));

  // Burn-in history for the one-time per-coordinate rescaling.
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
  std::size_t history = 0;
  std::size_t window_accept = 0, window = 0, kept_accept = 0;
  const std::size_t steps = o.burnin + o.iterations;
  for (std::size_t it = 0; it < steps; ++it) {
    for (std::size_t i = 0; i < dim; ++i) proposal[i] = theta[i] + scale * step[i] * z(rng);
    double cand = log_prior(proposal) + loglik(proposal);
    bool accept = std::log(u(rng)) < cand - current;
    if (accept) {
      theta.swap(proposal);
      current = cand;
    }
    if (it < o.burnin) {
      window_accept += accept;
      if (o.adapt && ++window == 100) {
        double rate = window_accept / 100.0;
        if (rate < 0.2) scale *= 0.75;
        if (rate > 0.3) scale *= 1.3;
        window = window_accept = 0;
      }
      if (o.adapt && it >= o.burnin / 4 && it < o.burnin / 2) {
        for (std::size_t i = 0; i < dim; ++i) {
          sum[i] += theta[i];
          sumsq[i] += theta[i] * theta[i];
        }
        ++history;
      }
      if (o.adapt && it + 1 == o.burnin / 2 && history >= 100) {
        for (std::size_t i = 0; i < dim; ++i) {
          double m = sum[i] / history;
          double v = std::max(0.0, sumsq[i] / history - m * m);
          step[i] = std::clamp(std::sqrt(v), 1e-3 * sd[i], sd[i]);
        }
        scale = 2.38 / std::sqrt(static_cast<double>(dim));
      }
    } else {
      kept_accept += accept;
      if ((it - o.burnin) % o.thin == 0) out.draws.push_back(theta);
    }
  }
  out.acceptance = o.iterations ? static_cast<double>(kept_accept) / o.iterations : 0.0;
  if (o.iterations && (out.acceptance < 0.10 || out.acceptance > 0.45))
    out.warnings.push_back("mcmc: post-burn-in acceptance " + std::to_string(out.acceptance) +
                           " outside [0.10, 0.45]; chain may not be mixing");
  return out;
}

std::size_t cell_of(double x, std::size_t cells) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("cell_of: observation outside [0,1]");
  return std::min(cells - 1, static_cast<std::size_t>(x * cells));
}

void check_series(const SeriesPrior& prior) {
  if (prior.series.d != 1) throw UnsupportedSpec("posterior samplers support d = 1 wavelet priors");
}

}  // namespace

PosteriorSample density_posterior(const std::vector<double>& data, const SeriesPrior& prior, const McmcOptions& mcmc,
                                  std::uint64_t seed) {
  check_series(prior);
  WaveletBasis basis = prior.basis();
  const std::size_t cells = std::size_t{1} << (prior.series.J + 1);
  std::vector<double> counts(cells, 0.0);
  for (double x : data) counts[cell_of(x, cells)] += 1.0;
  const double n = static_cast<double>(data.size());
  auto loglik = [&](const std::vector<double>& theta) {
    if (n == 0.0) return 0.0;
    auto w = haar_cell_values(basis, theta);
    double mx = *std::max_element(w.begin(), w.end());
    double z = 0.0, fit = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      z += std::exp(w[c] - mx);
      fit += counts[c] * w[c];
    }
    return fit - n * (mx + std::log(z / cells));
  };
  return run_metropolis(prior, loglik, mcmc, seed);
}

PosteriorSample classification_posterior(const ClassificationData& data, const SeriesPrior& prior,
                                         const McmcOptions& mcmc, std::uint64_t seed) {
  check_series(prior);
  if (data.design.size() != data.labels.size()) throw DomainError("classification_posterior: size mismatch");
  WaveletBasis basis = prior.basis();
  const std::size_t cells = std::size_t{1} << (prior.series.J + 1);
  std::vector<double> ones(cells, 0.0), zeros(cells, 0.0);
  for (std::size_t i = 0; i < data.design.size(); ++i)
    (data.labels[i] ? ones : zeros)[cell_of(data.design[i], cells)] += 1.0;
  auto loglik = [&](const std::vector<double>& theta) {
    auto w = haar_cell_values(basis, theta);
    double s = 0.0;
    for (std::size_t c = 0; c < cells; ++c) s -= ones[c] * softplus(-w[c]) + zeros[c] * softplus(w[c]);
    return s;
  };
  return run_metropolis(prior, loglik, mcmc, seed);
}

void RegressionModel::validate() const {
  if (design.empty()) throw DomainError("RegressionModel: empty design");
  if (!(sigma_lo > 0.0 && sigma_hi >= sigma_lo && std::isfinite(sigma_hi)))
    throw DomainError("RegressionModel: need 0 < a <= b < inf");
  if (!(sigma0 >= sigma_lo && sigma0 <= sigma_hi)) throw DomainError("RegressionModel: sigma0 must lie in [a, b]");
  if (sigma_points == 0) throw DomainError("RegressionModel: sigma_points must be positive");
}

std::vector<double> RegressionModel::sigma_grid() const {
  if (sigma_lo == sigma_hi) return {sigma_lo};
  std::vector<double> g(sigma_points);
  for (std::size_t i = 0; i < sigma_points; ++i) g[i] = sigma_lo + (i + 0.5) * (sigma_hi - sigma_lo) / sigma_points;
  return g;
}

std::vector<double> sample_regression_data(const std::function<double(double)>& w0, const RegressionModel& model,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> y;
  y.reserve(model.design.size());
  for (double x : model.design) y.push_back(w0(x) + model.sigma0 * z(rng));
  return y;
}

ConjugateRegression::ConjugateRegression(const CovarianceKernel& kernel, std::vector<double> design)
    : design_(std::move(design)) {
  if (design_.empty()) throw DomainError("ConjugateRegression: empty design");
  try {
    eig_ = symmetric_eigen(kernel.gram(design_));
  } catch (const SolveFailure& e) {
    throw SolveFailure(std::string("regression_posterior: ") + e.what());
  }
  for (Eigen::Index i = 0; i < eig_.values.size(); ++i) eig_.values(i) = std::max(0.0, eig_.values(i));
}

namespace {

std::vector<double> sigma_weights(const Eigen::VectorXd& lambda, const Eigen::VectorXd& yhat,
                                  const std::vector<double>& grid) {
  std::vector<double> logw(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    double v = grid[s] * grid[s], acc = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) acc += yhat(i) * yhat(i) / (lambda(i) + v) + std::log(lambda(i) + v);
    logw[s] = -0.5 * acc;
  }
  double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& l : logw) total += (l = std::exp(l - mx));
  for (double& l : logw) l /= total;
  return logw;
}

}  // namespace

RegressionPosterior ConjugateRegression::posterior(const std::vector<double>& y, const RegressionModel& model,
                                                   bool with_covariance) const {
  model.validate();
  if (y.size() != design_.size()) throw DomainError("regression_posterior: y does not match the design");
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::VectorXd yhat = eig_.vectors.transpose() * yv;
  const Eigen::VectorXd& lam = eig_.values;

  RegressionPosterior out;
  out.sigma_grid = model.sigma_grid();
  out.sigma_weights = sigma_weights(lam, yhat, out.sigma_grid);
  Eigen::VectorXd mean_coords = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd var_coords = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd second = with_covariance ? Eigen::MatrixXd::Zero(n, n) : Eigen::MatrixXd();
  for (std::size_t s = 0; s < out.sigma_grid.size(); ++s) {
    double v = out.sigma_grid[s] * out.sigma_grid[s], w = out.sigma_weights[s];
    Eigen::VectorXd shrink = (lam.array() / (lam.array() + v)).matrix();
    Eigen::VectorXd m = shrink.cwiseProduct(yhat);
    mean_coords += w * m;
    if (with_covariance) {
      var_coords += w * (lam.array() * v / (lam.array() + v)).matrix();
      second += w * m * m.transpose();
    }
  }
  out.mean = eig_.vectors * mean_coords;
  if (with_covariance) {
    Eigen::MatrixXd c = second - mean_coords * mean_coords.transpose();
    c.diagonal() += var_coords;
    out.covariance = eig_.vectors * c * eig_.vectors.transpose();
  }
  return out;
}

std::vector<ConjugateRegression::Draw> ConjugateRegression::draws(const std::vector<double>& y,
                                                                  const RegressionModel& model, std::size_t count,
                                                                  std::uint64_t seed) const {
  model.validate();
  if (y.size() != design_.size()) throw DomainError("regression draws: y does not match the design");
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::VectorXd yhat = eig_.vectors.transpose() * yv;
  const Eigen::VectorXd& lam = eig_.values;
  auto grid = model.sigma_grid();
  auto weights = sigma_weights(lam, yhat, grid);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<Draw> out;
  out.reserve(count);
  for (std::size_t d = 0; d < count; ++d) {
    std::size_t s = pick(rng);
    double v = grid[s] * grid[s];
    Draw draw{grid[s], Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i)
      draw.coords(i) = lam(i) / (lam(i) + v) * yhat(i) + std::sqrt(lam(i) * v / (lam(i) + v)) * z(rng);
    out.push_back(std::move(draw));
  }
  return out;
}

RegressionPosterior regression_posterior(const RegressionModel& model, const std::vector<double>& y,
                                         const PriorSpec& prior) {
  return ConjugateRegression(kernel_of(prior), model.design).posterior(y, model, true);
}

WhiteNoiseObservation observe_whitenoise(const WaveletCoefficients& theta0, double n, std::uint64_t seed) {
  if (!(n > 0.0)) throw DomainError("observe_whitenoise: n must be positive");
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> y(theta0.values().begin(), theta0.values().end());
  const double noise = 1.0 / std::sqrt(n);
  for (double& v : y) v += noise * z(rng);
  return {n, WaveletCoefficients(theta0.basis(), std::move(y))};
}

CoefficientPosterior whitenoise_posterior(const WhiteNoiseObservation& obs, const WaveletSeries& prior) {
  const WaveletBasis& basis = obs.y.basis();
  if (basis.dimension() != prior.d) throw IncompatibleSpecs("whitenoise_posterior: dimensions differ");
  if (prior.J > basis.levels()) throw DomainError("whitenoise_posterior: prior J exceeds the observed levels");
  CoefficientPosterior post;
  post.basis = basis;
  post.mean.assign(basis.total(), 0.0);
  post.variance.assign(basis.total(), 0.0);
  for (int j = 1; j <= prior.J; ++j) {
    double mu2 = wavelet_scale(prior, j) * wavelet_scale(prior, j);
    double shrink = mu2 / (mu2 + 1.0 / obs.n);
    double var = mu2 / (obs.n * mu2 + 1.0);
    for (std::size_t i = basis.offset(j); i < basis.offset(j + 1); ++i) {
      post.mean[i] = shrink * obs.y.values()[i];
      post.variance[i] = var;
    }
  }
  return post;
}

double whitenoise_risk(const WaveletCoefficients& theta0, double n, const WaveletSeries& prior) {
  const WaveletBasis& basis = theta0.basis();
  double risk = 0.0;
  for (int j = 1; j <= basis.levels(); ++j) {
    double mu2 = wavelet_scale(prior, j) * wavelet_scale(prior, j);
    double shrink = mu2 / (mu2 + 1.0 / n), var = mu2 / (n * mu2 + 1.0);
    for (double t : theta0.level(j)) {
      if (j <= prior.J) {
        risk += var + (1.0 - shrink) * (1.0 - shrink) * t * t + shrink * shrink / n;
      } else {
        risk += t * t;
      }
    }
  }
  return risk;
}

}  // namespace gplab
