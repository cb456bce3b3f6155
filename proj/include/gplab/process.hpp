#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/numerics.hpp"
#include "gplab/prior.hpp"

namespace gplab {

class CovarianceKernel {
 public:
  CovarianceKernel(std::function<double(double, double)> rule, std::string tag);

  /// Evaluated with ordered arguments, so symmetry holds bit for bit.
  double operator()(double s, double t) const { return s <= t ? rule_(s, t) : rule_(t, s); }
  const std::string& tag() const { return tag_; }

  Eigen::MatrixXd gram(std::span<const double> points) const;

 private:
  std::function<double(double, double)> rule_;
  std::string tag_;
};

/// ∫_0^{s∧t} ((s−u)(t−u))^γ du for γ > −1/2.
double singular_path_covariance(double s, double t, double gamma);

CovarianceKernel kernel_of(const PriorSpec& spec);

/// Lower factor of K restricted to its nonzero-variance coordinates.
/// Coordinates with K_ii == 0 (e.g. BM at t = 0) are held at exactly zero.
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  std::vector<std::size_t> active;
  std::size_t dimension = 0;
  double jitter = 0.0;           // absolute diagonal shift that succeeded
  double relative_jitter = 0.0;  // jitter / (trace / dimension)
};

CholeskyFactor jittered_cholesky(const Eigen::MatrixXd& k);

/// Draws a prior on a grid. Immutable after construction; draws are pure
/// functions of the seed.
class PathSampler {
 public:
  PathSampler(const PriorSpec& spec, const Grid& grid);
  ~PathSampler();
  PathSampler(const PathSampler&);
  PathSampler& operator=(const PathSampler&);

  const Grid& grid() const { return grid_; }
  const PriorSpec& spec() const { return spec_; }

  GridFunction draw(std::uint64_t seed) const;
  /// out is resized to grid.size() × seeds.size(); column b is the draw for seeds[b].
  void draw_batch(std::span<const std::uint64_t> seeds, Eigen::MatrixXd& out) const;

  /// For WaveletSeries specs only.
  WaveletCoefficients draw_coefficients(std::uint64_t seed) const;

  struct Node;

 private:
  PriorSpec spec_;
  Grid grid_;
  std::shared_ptr<const Node> root_;
};

GridFunction sample_path(const PriorSpec& spec, const Grid& grid, std::uint64_t seed);

/// Draws Z_{j,k} ~ N(0,1) level by level and scales by μ_j. Levels 1..J of a
/// deeper series with the same seed agree with this draw (coupling).
WaveletCoefficients sample_coefficients(const WaveletSeries& spec, std::uint64_t seed);

/// round(log2(n) / (2α + d)), at least 1.
int truncation_level(double alpha, int d, double n);

struct TruncationGap {
  double estimate = 0.0;  // 10·E‖W^K − W‖₂², Monte Carlo
  Interval ci;
  double exact = 0.0;     // 10·Σ_{j>K} μ_j² 2^{jd}
  std::size_t reps = 0;
  bool passes = false;    // ci.hi ≤ 1/n
};

TruncationGap mean_sq_truncation_gap(const PriorSpec& full, const PriorSpec& truncated, const Grid& grid,
                                     double n, std::size_t mc_reps, std::uint64_t seed, int threads = 1);

}  // namespace gplab
