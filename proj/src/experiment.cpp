#include "gplab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gplab/error.hpp"
#include "gplab/parallel.hpp"
#include "gplab/process.hpp"
#include "gplab/seed.hpp"

namespace gplab {

const char* to_string(Setting s) {
  switch (s) {
    case Setting::Density: return "density";
    case Setting::Classification: return "classification";
    case Setting::Regression: return "regression";
    case Setting::WhiteNoise: return "whitenoise";
  }
  return "?";
}

Setting parse_setting(const std::string& text) {
  if (text == "density") return Setting::Density;
  if (text == "classification") return Setting::Classification;
  if (text == "regression") return Setting::Regression;
  if (text == "whitenoise") return Setting::WhiteNoise;
  throw ConfigError("unknown setting '" + text + "' (density|classification|regression|whitenoise)");
}

void TruthSpec::validate() const {
  static const char* families[] = {"cusp", "sine", "zero", "linear", "besov", "coefficients"};
  if (std::find(std::begin(families), std::end(families), family) == std::end(families))
    throw ConfigError("unknown truth family '" + family + "'");
  if (family == "cusp" && !(exponent > 0.0)) throw ConfigError("truth.exponent must be positive");
  if (family == "besov" && !(beta > 0.0)) throw ConfigError("truth.beta must be positive");
  if (j_obs < 1 || j_obs > 22) throw ConfigError("truth.j_obs must lie in [1, 22]");
}

bool TruthSpec::has_function() const { return true; }

namespace {

double haar_series_at(const WaveletCoefficients& c, double x) {
  const WaveletBasis& b = c.basis();
  double s = 0.0;
  for (int j = 1; j <= b.levels(); ++j) {
    double scaled = x * std::ldexp(1.0, j);
    std::size_t k = std::min(b.count(j) - 1, static_cast<std::size_t>(std::max(0.0, scaled)));
    double frac = scaled - static_cast<double>(k);
    double sign = frac < 0.5 ? 1.0 : -1.0;
    s += c.values()[b.offset(j) + k] * std::sqrt(std::ldexp(1.0, j)) * sign;
  }
  return s;
}

WaveletCoefficients listed_coefficients(const TruthSpec& t, int levels) {
  WaveletBasis basis(1, levels);
  std::vector<double> v(basis.total(), 0.0);
  if (t.family == "besov") {
    for (int j = 1; j <= std::min(levels, t.j_obs); ++j)
      for (std::size_t k = 0; k < basis.count(j); ++k)
        v[basis.offset(j) + k] = t.amplitude * std::pow(2.0, -j * (t.beta + 0.5)) * std::cos(1.7 * k + j);
  } else {
    std::copy_n(t.coefficients.begin(), std::min(t.coefficients.size(), v.size()), v.begin());
  }
  return WaveletCoefficients(basis, std::move(v));
}

}  // namespace

std::function<double(double)> TruthSpec::function() const {
  const TruthSpec t = *this;
  if (family == "cusp") return [t](double x) { return t.amplitude * std::pow(std::abs(x - t.center), t.exponent); };
  if (family == "sine")
    return [t](double x) { return t.amplitude * std::sin(2.0 * std::numbers::pi * t.frequency * x); };
  if (family == "zero") return [](double) { return 0.0; };
  if (family == "linear") return [t](double x) { return t.intercept + t.slope * x; };
  auto c = std::make_shared<WaveletCoefficients>(listed_coefficients(t, t.j_obs));
  return [c](double x) { return haar_series_at(*c, x); };
}

WaveletCoefficients haar_project(const std::function<double(double)>& f, int J) {
  const std::size_t cells = std::size_t{1} << (J + 1);
  const QuadratureRule& q = gauss_legendre(4);
  const double h = 1.0 / static_cast<double>(cells);
  std::vector<double> cell(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    double mid = (c + 0.5) * h, s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(mid + 0.5 * h * q.nodes[i]);
    cell[c] = 0.5 * h * s;
  }
  std::vector<double> prefix(cells + 1, 0.0);
  for (std::size_t c = 0; c < cells; ++c) prefix[c + 1] = prefix[c] + cell[c];
  WaveletBasis basis(1, J);
  std::vector<double> v(basis.total());
  for (int j = 1; j <= J; ++j) {
    const std::size_t width = std::size_t{1} << (J + 1 - j);
    const double amp = std::sqrt(std::ldexp(1.0, j));
    for (std::size_t k = 0; k < basis.count(j); ++k) {
      std::size_t lo = k * width, mid = lo + width / 2, hi = lo + width;
      v[basis.offset(j) + k] = amp * ((prefix[mid] - prefix[lo]) - (prefix[hi] - prefix[mid]));
    }
  }
  return WaveletCoefficients(basis, std::move(v));
}

WaveletCoefficients TruthSpec::coefficients_on(int levels) const {
  if (family == "besov" || family == "coefficients") return listed_coefficients(*this, levels);
  return haar_project(function(), levels);
}

std::optional<double> TruthSpec::smoothness() const {
  if (family == "cusp") return amplitude == 0.0 ? std::numeric_limits<double>::infinity() : exponent;
  if (family == "besov") return beta;
  if (family == "coefficients") return std::nullopt;
  return std::numeric_limits<double>::infinity();
}

std::string TruthSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << family;
  if (family == "cusp") os << "(amplitude=" << amplitude << ",center=" << center << ",exponent=" << exponent << ")";
  if (family == "sine") os << "(amplitude=" << amplitude << ",frequency=" << frequency << ")";
  if (family == "linear") os << "(intercept=" << intercept << ",slope=" << slope << ")";
  if (family == "besov") os << "(amplitude=" << amplitude << ",beta=" << beta << ",j_obs=" << j_obs << ")";
  if (family == "coefficients") os << "(count=" << coefficients.size() << ")";
  return os.str();
}

void ExperimentSpec::validate() const {
  truth.validate();
  if (n_ladder.empty()) throw ConfigError("experiment: empty n ladder");
  for (double n : n_ladder)
    if (!(n >= 2.0) || n != std::floor(n)) throw ConfigError("experiment: ladder entries must be integers >= 2");
  if (replicates == 0) throw ConfigError("experiment: replicates must be positive");
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("experiment: quantile must lie in (0, 1)");
  if (posterior_draws < 2) throw ConfigError("experiment: posterior_draws must be at least 2");
  if (setting == Setting::Regression) {
    if (!prior) throw ConfigError("regression needs a kernel prior");
    if (prior->is<WaveletSeries>()) throw ConfigError("regression needs a kernel prior, not a wavelet series");
  } else {
    if (!(wavelet_a > 0.0 && wavelet_alpha > 0.0)) throw ConfigError("wavelet prior: a and alpha must be positive");
    if (wavelet_J && (*wavelet_J < 1 || *wavelet_J > 20)) throw ConfigError("wavelet prior: J must lie in [1, 20]");
  }
  if (setting == Setting::WhiteNoise && wavelet_J && *wavelet_J > truth.j_obs)
    throw ConfigError("whitenoise: prior J exceeds truth.j_obs");
  if (setting == Setting::Density && (density_cells < 2 || (density_cells & (density_cells - 1))))
    throw ConfigError("density_cells must be a power of two");
}

int ExperimentSpec::wavelet_level(double n) const {
  int J = wavelet_J ? *wavelet_J : truncation_level(wavelet_alpha, 1, n);
  if (setting == Setting::WhiteNoise) J = std::min(J, truth.j_obs);
  return J;
}

TargetRate target_rate(const ExperimentSpec& spec) {
  TargetRate out;
  auto beta_opt = spec.truth.smoothness();
  if (!beta_opt) {
    out.rule = "none: truth smoothness unknown";
    return out;
  }
  const double b = *beta_opt;
  if (spec.setting != Setting::Regression) {
    if (spec.wavelet_J) {
      out.rule = "none: fixed truncation level";
      return out;
    }
    const double a = spec.wavelet_a, al = spec.wavelet_alpha, d = 1.0;
    if (a <= b && b <= al) {
      out.slope = -b / (2 * al + d);
      out.rule = "wavelet a<=beta<=alpha: -beta/(2alpha+d)";
    } else if (a <= al && al <= b) {
      out.slope = -al / (2 * al + d);
      out.rule = "wavelet a<=alpha<=beta: -alpha/(2alpha+d)";
    } else if (al <= a && a <= b) {
      out.slope = -a / (2 * a + d);
      out.rule = "wavelet alpha<=a<=beta: -a/(2a+d)";
    } else if (al <= b && b <= a) {
      out.slope = -b / (2 * a + d);
      out.rule = "wavelet alpha<=beta<=a: -beta/(2a+d)";
    } else {
      out.rule = "none: beta below both a and alpha";
    }
    return out;
  }
  const auto& v = spec.prior->variant();
  double regularity = -1.0;
  if (std::holds_alternative<BrownianMotion>(v) || std::holds_alternative<ReleasedBM>(v)) regularity = 0.5;
  if (auto* p = std::get_if<IntegratedBM>(&v)) regularity = p->k + 0.5;
  if (auto* p = std::get_if<RLPlusPoly>(&v)) regularity = p->alpha;
  if (auto* p = std::get_if<RiemannLiouville>(&v)) regularity = p->alpha;
  if (auto* p = std::get_if<FractionalBM>(&v)) regularity = p->alpha;
  if (regularity < 0.0) {
    out.rule = "none: no rate entry for " + spec.prior->describe();
    return out;
  }
  out.slope = -std::min(regularity, b) / (2 * regularity + 1);
  out.rule = "kernel prior of regularity alpha: -min(alpha,beta)/(2alpha+1)";
  return out;
}

namespace {

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q * (v.size() - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  double f = pos - i;
  return v[i] * (1 - f) + v[i + 1] * f;
}

std::vector<std::size_t> spaced_indices(std::size_t available, std::size_t wanted) {
  std::vector<std::size_t> idx;
  std::size_t count = std::min(available, wanted);
  for (std::size_t i = 0; i < count; ++i) idx.push_back(i * available / count);
  return idx;
}

struct ReplicateResult {
  double distance = 0.0;
  std::vector<std::string> warnings;
};

using ReplicateFn = std::function<ReplicateResult(std::size_t r)>;

ReplicateFn whitenoise_runner(const ExperimentSpec& spec, double n, int J,
                              std::shared_ptr<const WaveletCoefficients> theta0) {
  WaveletSeries series{1, spec.wavelet_a, J};
  const std::size_t head = theta0->basis().offset(J + 1);
  double tail = 0.0;
  for (std::size_t i = head; i < theta0->values().size(); ++i) tail += theta0->values()[i] * theta0->values()[i];
  return [=, &spec](std::size_t r) {
    auto obs = observe_whitenoise(*theta0, n, child_seed(spec.seed, "data", r));
    auto post = whitenoise_posterior(obs, series);
    Rng rng(child_seed(spec.seed, "posterior", r));
    std::normal_distribution<double> z;
    std::vector<double> dist(spec.posterior_draws);
    for (auto& d : dist) {
      double s = tail;
      for (std::size_t i = 0; i < head; ++i) {
        double w = post.mean[i] + std::sqrt(post.variance[i]) * z(rng);
        s += (w - theta0->values()[i]) * (w - theta0->values()[i]);
      }
      d = std::sqrt(s);
    }
    return ReplicateResult{quantile_of(std::move(dist), spec.quantile), {}};
  };
}

ReplicateFn density_runner(const ExperimentSpec& spec, double n, int J, std::shared_ptr<const GridFunction> w0) {
  SeriesPrior prior{WaveletSeries{1, spec.wavelet_a, J}, 0};
  return [=, &spec](std::size_t r) {
    auto data = sample_density_data(*w0, static_cast<std::size_t>(n), child_seed(spec.seed, "data", r));
    auto post = density_posterior(data, prior, spec.mcmc, child_seed(spec.seed, "posterior", r));
    const Grid& g = w0->grid();
    const std::size_t cells = std::size_t{1} << (J + 1);
    std::vector<double> dist;
    for (std::size_t i : spaced_indices(post.draws.size(), spec.posterior_draws)) {
      auto cv = haar_cell_values(post.basis, post.draws[i]);
      std::vector<double> w(g.size());
      for (std::size_t k = 0; k < w.size(); ++k)
        w[k] = cv[std::min(cells - 1, static_cast<std::size_t>(g.axis_node(k) * cells))];
      dist.push_back(density_distances(GridFunction(g, std::move(w)), *w0).hellinger);
    }
    if (dist.empty()) throw DomainError("density experiment: no posterior draws kept");
    return ReplicateResult{quantile_of(std::move(dist), spec.quantile), post.warnings};
  };
}

ReplicateFn classification_runner(const ExperimentSpec& spec, double n, int J) {
  SeriesPrior prior{WaveletSeries{1, spec.wavelet_a, J}, 0};
  auto f = spec.truth.function();
  return [=, &spec](std::size_t r) {
    auto data = sample_classification_data(f, static_cast<std::size_t>(n), child_seed(spec.seed, "data", r));
    auto post = classification_posterior(data, prior, spec.mcmc, child_seed(spec.seed, "posterior", r));
    const std::size_t cells = std::size_t{1} << (J + 1);
    std::vector<double> truth;
    for (double x : data.design) truth.push_back(link_cdf(Link::Logistic, f(x)));
    std::vector<double> dist;
    for (std::size_t i : spaced_indices(post.draws.size(), spec.posterior_draws)) {
      auto cv = haar_cell_values(post.basis, post.draws[i]);
      double s = 0.0;
      for (std::size_t k = 0; k < data.design.size(); ++k) {
        double p = link_cdf(Link::Logistic, cv[std::min(cells - 1, static_cast<std::size_t>(data.design[k] * cells))]);
        s += (p - truth[k]) * (p - truth[k]);
      }
      dist.push_back(std::sqrt(s / data.design.size()));
    }
    if (dist.empty()) throw DomainError("classification experiment: no posterior draws kept");
    return ReplicateResult{quantile_of(std::move(dist), spec.quantile), post.warnings};
  };
}

ReplicateFn regression_runner(const ExperimentSpec& spec, double n) {
  RegressionModel model;
  const std::size_t count = static_cast<std::size_t>(n);
  for (std::size_t i = 1; i <= count; ++i) model.design.push_back(static_cast<double>(i) / count);
  model.sigma0 = spec.sigma0;
  model.sigma_lo = spec.sigma_lo;
  model.sigma_hi = spec.sigma_hi;
  model.sigma_points = spec.sigma_points;
  model.validate();
  auto f = spec.truth.function();
  auto cr = std::make_shared<ConjugateRegression>(kernel_of(*spec.prior), model.design);
  Eigen::VectorXd w0(count);
  for (std::size_t i = 0; i < count; ++i) w0(i) = f(model.design[i]);
  Eigen::VectorXd w0_coords = cr->eigen().vectors.transpose() * w0;
  return [=, &spec](std::size_t r) {
    auto y = sample_regression_data(f, model, child_seed(spec.seed, "data", r));
    auto draws = cr->draws(y, model, spec.posterior_draws, child_seed(spec.seed, "posterior", r));
    std::vector<double> dist;
    for (const auto& d : draws) {
      double v = (d.coords - w0_coords).norm() / std::sqrt(n);
      if (spec.include_sigma) v += std::abs(d.sigma - spec.sigma0);
      dist.push_back(v);
    }
    return ReplicateResult{quantile_of(std::move(dist), spec.quantile), {}};
  };
}

}  // namespace

ExperimentReport contraction_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;
  report.target = target_rate(spec);

  std::shared_ptr<const WaveletCoefficients> theta0;
  std::shared_ptr<const GridFunction> density_truth;
  if (spec.setting == Setting::WhiteNoise)
    theta0 = std::make_shared<const WaveletCoefficients>(spec.truth.coefficients_on(spec.truth.j_obs));
  if (spec.setting == Setting::Density)
    density_truth =
        std::make_shared<const GridFunction>(GridFunction::sample(Grid(1, spec.density_cells), spec.truth.function()));

  for (double n : spec.n_ladder) {
    ExperimentPoint point;
    point.n = n;
    try {
      ReplicateFn run;
      if (spec.setting != Setting::Regression) point.level = spec.wavelet_level(n);
      switch (spec.setting) {
        case Setting::WhiteNoise: run = whitenoise_runner(spec, n, point.level, theta0); break;
        case Setting::Density: run = density_runner(spec, n, point.level, density_truth); break;
        case Setting::Classification: run = classification_runner(spec, n, point.level); break;
        case Setting::Regression: run = regression_runner(spec, n); break;
      }
      std::vector<ReplicateResult> results(spec.replicates);
      parallel_for(spec.replicates, spec.threads, [&](std::size_t r) { results[r] = run(r); });
      for (auto& res : results) {
        point.replicate_distances.push_back(res.distance);
        for (auto& w : res.warnings)
          if (std::find(point.warnings.begin(), point.warnings.end(), w) == point.warnings.end())
            point.warnings.push_back(w);
      }
      double s = 0.0;
      for (double d : point.replicate_distances) s += d;
      point.mean = s / point.replicate_distances.size();
      point.median = quantile_of(point.replicate_distances, 0.5);
    } catch (const Error& e) {
      point.error = e.what();
    }
    report.points.push_back(std::move(point));
  }

  std::vector<double> x, y;
  for (const auto& p : report.points)
    if (p.error.empty() && p.mean > 0.0) {
      x.push_back(std::log(p.n));
      y.push_back(std::log(p.mean));
    }
  if (x.size() >= 2) {
    report.fit = fit_line(x, y);
    report.slope_ci = {report.fit->slope - 1.959963984540054 * report.fit->slope_se,
                       report.fit->slope + 1.959963984540054 * report.fit->slope_se};
  }
  return report;
}

}  // namespace gplab
