#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gplab/models.hpp"
#include "gplab/numerics.hpp"
#include "gplab/prior.hpp"

namespace gplab {

enum class Setting { Density, Classification, Regression, WhiteNoise };

const char* to_string(Setting s);
Setting parse_setting(const std::string& text);

/// Named truth family or an explicit coefficient list.
///   cusp:         amplitude·|t − center|^exponent
///   sine:         amplitude·sin(2π·frequency·t)
///   zero:         0
///   linear:       intercept + slope·t
///   besov:        θ_{j,k} = amplitude·2^{−j(beta + 1/2)}·cos(1.7k + j), levels ≤ j_obs
///   coefficients: θ listed level by level, zero beyond the list
struct TruthSpec {
  std::string family = "cusp";
  double amplitude = 1.0;
  double center = 0.5;
  double exponent = 0.5;
  double frequency = 1.0;
  double intercept = 0.0;
  double slope = 1.0;
  double beta = 1.0;
  int j_obs = 18;
  std::vector<double> coefficients;

  void validate() const;
  bool has_function() const;
  std::function<double(double)> function() const;
  /// Haar coefficients on levels 1..levels (d = 1).
  WaveletCoefficients coefficients_on(int levels) const;
  /// Hölder/Besov smoothness when the family fixes one (+inf for smooth families).
  std::optional<double> smoothness() const;
  std::string describe() const;
};

/// Haar coefficients of f on levels 1..J from 4-point Gauss rules on 2^{J+1} cells.
WaveletCoefficients haar_project(const std::function<double(double)>& f, int J);

struct ExperimentSpec {
  Setting setting = Setting::WhiteNoise;
  /// Kernel prior for regression; the wavelet fields below drive the other settings.
  std::optional<PriorSpec> prior;
  double wavelet_a = 1.0;
  double wavelet_alpha = 1.0;  // regularity used for J = auto
  std::optional<int> wavelet_J;  // empty means truncation_level(alpha, 1, n)
  TruthSpec truth;
  std::vector<double> n_ladder;
  std::size_t replicates = 16;
  double quantile = 0.5;
  std::size_t posterior_draws = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  McmcOptions mcmc;
  // regression
  double sigma0 = 0.5;
  double sigma_lo = 0.25;
  double sigma_hi = 1.0;
  std::size_t sigma_points = 64;
  bool include_sigma = true;  // distance ‖w − w0‖_n + |σ − σ0|
  std::size_t density_cells = 4096;

  void validate() const;
  int wavelet_level(double n) const;
};

struct ExperimentPoint {
  double n = 0.0;
  int level = 0;  // wavelet truncation used (0 for kernel priors)
  std::vector<double> replicate_distances;
  double mean = 0.0;
  double median = 0.0;
  std::vector<std::string> warnings;
  std::string error;  // nonempty when the point failed
};

struct TargetRate {
  std::optional<double> slope;
  std::string rule;
};

/// Polynomial rate exponent of ε_n predicted for the prior and truth smoothness.
TargetRate target_rate(const ExperimentSpec& spec);

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ExperimentPoint> points;
  std::optional<LineFit> fit;  // log mean distance against log n
  Interval slope_ci;
  TargetRate target;
};

/// Data seeds depend only on the replicate index, so the ladder is coupled.
ExperimentReport contraction_experiment(const ExperimentSpec& spec);

}  // namespace gplab
