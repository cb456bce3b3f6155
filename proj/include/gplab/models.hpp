#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/numerics.hpp"
#include "gplab/prior.hpp"
#include "gplab/process.hpp"

namespace gplab {

// ---- density model -------------------------------------------------------

/// p_w = e^w / ∫e^w on the grid nodes, trapezoid normalized.
GridFunction normalized_density(const GridFunction& w);

struct DensityDistances {
  double hellinger = 0.0;  // ‖√p_v − √p_w‖₂
  double kl = 0.0;         // ∫ p_v log(p_v/p_w)
  double v_div = 0.0;      // ∫ p_v log²(p_v/p_w)
};

DensityDistances density_distances(const GridFunction& v, const GridFunction& w);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct InequalityReport {
  std::vector<InequalityCheck> checks;
  bool all_pass = false;
};

/// h ≤ δe^{δ/2}, K ≤ Cδ²e^δ(1+δ), V ≤ Cδ²e^δ(1+δ)² with δ = ‖v−w‖∞.
InequalityReport check_density_bounds(const GridFunction& v, const GridFunction& w, double constant = 8.0,
                                      double slack = 1e-6);

/// Draws n points from p_{w0} by inverse CDF over the grid cells (mass of a
/// cell by the trapezoid rule, uniform position inside the cell).
std::vector<double> sample_density_data(const GridFunction& w0, std::size_t n, std::uint64_t seed);

// ---- classification model ------------------------------------------------

enum class Link { Logistic, Probit };

double link_cdf(Link link, double x);      // Ψ
double link_density(Link link, double x);  // ψ = Ψ′
/// sup over v between w and w0 of |ψ/(Ψ(1−Ψ))|(v), floored at 1.
double s_function(Link link, double w, double w0);

/// Distance bounds on the uniform empirical measure G of the grid nodes: the
/// Bernoulli-density identity and bound, and the K/V bounds through S.
InequalityReport check_classification_bounds(const GridFunction& v, const GridFunction& w, double r,
                                             Link link = Link::Logistic, double slack = 1e-6);

/// ∫ g_{w0}(w) dG: the Bernoulli Kullback-Leibler divergence KL(Ψ(w0) ‖ Ψ(w)).
double bernoulli_kl(const GridFunction& w, const GridFunction& w0, Link link = Link::Logistic);

struct ClassificationData {
  std::vector<double> design;  // (i − ½)/n
  std::vector<int> labels;
};

ClassificationData sample_classification_data(const std::function<double(double)>& w0, std::size_t n,
                                              std::uint64_t seed);

// ---- coefficient-space Metropolis ----------------------------------------

struct McmcOptions {
  std::size_t iterations = 20000;  // after burn-in
  std::size_t burnin = 5000;
  std::size_t thin = 10;
  double proposal_scale = 1.0;  // multiplies the initial 2.38/√dim step
  bool adapt = true;
};

/// Wavelet series prior in d = 1 restricted to its first `max_coefficients`
/// coefficients (0 keeps all).
struct SeriesPrior {
  WaveletSeries series;
  std::size_t max_coefficients = 0;

  WaveletBasis basis() const { return WaveletBasis(1, series.J); }
  std::size_t active() const;
  std::vector<double> sd() const;  // prior sd of the active coefficients
};

struct PosteriorSample {
  WaveletBasis basis{1, 1};
  std::vector<std::vector<double>> draws;  // full coefficient vectors
  double acceptance = 0.0;                 // after burn-in
  std::vector<std::string> warnings;

  std::vector<double> mean() const;
  /// Batch-means Monte Carlo standard error of coefficient i.
  double mc_standard_error(std::size_t i, std::size_t batches = 50) const;
  GridFunction synthesize(std::size_t draw, const Grid& grid) const;
};

PosteriorSample density_posterior(const std::vector<double>& data, const SeriesPrior& prior, const McmcOptions& mcmc,
                                  std::uint64_t seed);
PosteriorSample classification_posterior(const ClassificationData& data, const SeriesPrior& prior,
                                         const McmcOptions& mcmc, std::uint64_t seed);

/// Piecewise-constant value of a Haar series on the 2^{J+1} finest cells.
std::vector<double> haar_cell_values(const WaveletBasis& basis, const std::vector<double>& coefficients);

// ---- regression model ----------------------------------------------------

struct RegressionModel {
  std::vector<double> design;
  double sigma0 = 0.5;
  double sigma_lo = 0.25;  // uniform σ-prior on [sigma_lo, sigma_hi]
  double sigma_hi = 1.0;
  std::size_t sigma_points = 64;

  void validate() const;
  std::vector<double> sigma_grid() const;  // cell midpoints; one point when lo == hi
};

std::vector<double> sample_regression_data(const std::function<double(double)>& w0, const RegressionModel& model,
                                           std::uint64_t seed);

struct RegressionPosterior {
  Eigen::VectorXd mean;        // σ-mixture posterior mean at the design points
  Eigen::MatrixXd covariance;  // σ-mixture covariance (empty unless requested)
  std::vector<double> sigma_grid;
  std::vector<double> sigma_weights;
  std::vector<std::string> warnings;
};

/// Gaussian conjugate posterior for a kernel prior at the design points, via
/// one eigendecomposition K = UΛUᵀ shared across σ values and data sets.
class ConjugateRegression {
 public:
  ConjugateRegression(const CovarianceKernel& kernel, std::vector<double> design);

  const std::vector<double>& design() const { return design_; }
  const SymmetricEigen& eigen() const { return eig_; }

  RegressionPosterior posterior(const std::vector<double>& y, const RegressionModel& model,
                                bool with_covariance = true) const;

  struct Draw {
    double sigma;
    Eigen::VectorXd coords;  // Uᵀw, the draw in the eigenbasis
  };
  /// Posterior draws in eigen coordinates; ‖w − w0‖_n = ‖coords − Uᵀw0‖/√n.
  std::vector<Draw> draws(const std::vector<double>& y, const RegressionModel& model, std::size_t count,
                          std::uint64_t seed) const;

 private:
  std::vector<double> design_;
  SymmetricEigen eig_;
};

RegressionPosterior regression_posterior(const RegressionModel& model, const std::vector<double>& y,
                                         const PriorSpec& prior);

// ---- white noise model ---------------------------------------------------

struct WhiteNoiseObservation {
  double n = 1.0;
  WaveletCoefficients y;  // θ0 + n^{-1/2} ζ
};

WhiteNoiseObservation observe_whitenoise(const WaveletCoefficients& theta0, double n, std::uint64_t seed);

struct CoefficientPosterior {
  WaveletBasis basis{1, 1};
  std::vector<double> mean;
  std::vector<double> variance;  // 0 above the prior truncation level
};

CoefficientPosterior whitenoise_posterior(const WhiteNoiseObservation& obs, const WaveletSeries& prior);

/// E_data E_post ‖w − θ0‖₂² in closed form.
double whitenoise_risk(const WaveletCoefficients& theta0, double n, const WaveletSeries& prior);

}  // namespace gplab
