#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/numerics.hpp"
#include "gplab/prior.hpp"
#include "gplab/process.hpp"

namespace gplab {

/// Norm of the minimal-norm grid interpolant h = Kc, i.e. √(hᵀK⁻¹h).
struct GramNorm {
  CovarianceKernel kernel;
};
/// ‖h^{(k+1)}‖₂² + Σ_{i≤k} h^{(i)}(0)², the integrated-BM space.
struct SobolevNorm {
  int k = 1;
};
/// h(0)² + ‖h′‖₂².
struct ReleasedBMNorm {};
/// ‖f‖₂/Γ(α+½) for h = I^{α+½} f, needs α + ½ < 2.
struct RiemannLiouvilleNorm {
  double alpha = 1.0;
};
/// Σ w_{j,k}²/μ_j².
struct WaveletSeqNorm {
  WaveletSeries series;
};

using RkhsNorm = std::variant<GramNorm, SobolevNorm, ReleasedBMNorm, RiemannLiouvilleNorm, WaveletSeqNorm>;

/// GramNorm for kernel priors, WaveletSeqNorm for wavelet series.
RkhsNorm rkhs_norm_of(const PriorSpec& spec);

/// RKHS norm of a grid function. Derivatives are finite differences and
/// integrals trapezoid sums. Returns +inf when h is nonzero where the kernel
/// has zero variance.
double rkhs_norm(const GridFunction& h, const RkhsNorm& norm, std::vector<std::string>* warnings = nullptr);
double rkhs_norm(const WaveletCoefficients& w, const WaveletSeqNorm& norm);

struct DecenteringResult {
  double eps = 0.0;
  double value = 0.0;               // ‖h‖²_ℍ of the witness, an upper bound on the infimum
  double constraint_achieved = 0.0; // ‖h − w0‖ in the requested norm, < eps
  double lambda = 0.0;              // penalty parameter of the witness (0 for closed forms)
  std::string provenance;           // "optimizer-upper-bound" or "closed-form"
  std::optional<GridFunction> witness;
  std::optional<WaveletCoefficients> witness_coefficients;

  double witness_norm() const;
};

/// Ridge path for kernel priors: minimizes ‖h‖²_ℍ + (λN)⁻¹‖h − w0‖²_{ℓ2} over
/// the Gram span using one eigendecomposition of K, and bisects log λ until the
/// constraint lands in [0.9ε, ε).
class GramDecenterer {
 public:
  GramDecenterer(const CovarianceKernel& kernel, const Grid& grid);

  const Grid& grid() const { return grid_; }
  DecenteringResult solve(const GridFunction& w0, double eps, NormKind kind) const;
  /// Cheap membership test: is there h with ‖h‖_ℍ ≤ radius and ‖h − w0‖ < eps?
  bool ball_member(const GridFunction& w0, double eps, double radius, NormKind kind) const;

 private:
  struct Path;
  Path path_for(const GridFunction& w0) const;

  Grid grid_;
  SymmetricEigen eig_;
};

DecenteringResult decentering(const GridFunction& w0, const PriorSpec& prior, double eps, NormKind kind);
/// Closed-form projection bound: truncate w0 at the smallest level J′ ≤ J whose
/// tail is within eps; value Σ_{j≤J′} Σ_k w²/μ_j².
DecenteringResult decentering(const WaveletCoefficients& w0, const WaveletSeries& prior, double eps, NormKind kind);

/// Evaluates every ε, then lowers each value to the best witness feasible at
/// that ε, so the profile is nonincreasing in ε.
std::vector<DecenteringResult> decentering_profile(const GridFunction& w0, const PriorSpec& prior,
                                                   const std::vector<double>& eps_grid, NormKind kind);
std::vector<DecenteringResult> decentering_profile(const WaveletCoefficients& w0, const WaveletSeries& prior,
                                                   const std::vector<double>& eps_grid, NormKind kind);

struct RkhsApproximant {
  GridFunction h;                       // w0 ∗ φ_σ
  double norm_bound = 0.0;              // bound on ‖h‖²_ℍ via sup norms
  double norm_l2 = 0.0;                 // same decomposition with trapezoid L2 norms
  std::vector<double> polynomial;       // (w0 ∗ φ_σ^{(k)})(0)/k!, k ≤ ⌈α⌉−1
};

/// Witness for the RL-plus-polynomial prior of order α built by smoothing.
RkhsApproximant rkhs_approximant(const GridFunction& w0, double alpha, double sigma);

struct SieveSpec {
  double n = 0.0;
  double eps = 0.0;
  double C = 0.0;
  double M = 0.0;
  double log_mass_bound = 0.0;  // −Cnε², log of the excess-mass target
};

/// M = −2Φ⁻¹(e^{−Cnε²}).
SieveSpec sieve_params(double n, double eps, double C);

struct SieveExcessMass {
  double phat = 0.0;
  Interval ci;
  double threshold = 0.0;  // e^{−Cnε²}
  double slack = 0.0;      // z²/(reps + z²)
  std::size_t outside = 0;
  std::size_t reps = 0;
  bool passes = false;
};

/// Monte Carlo Pr(W ∉ εB₁ + Mℍ₁); membership of a draw is certified by the
/// decentering optimizer against that draw.
SieveExcessMass sieve_excess_mass(const PriorSpec& spec, const SieveSpec& sieve, const Grid& grid,
                                  std::size_t mc_reps, std::uint64_t seed, NormKind kind = NormKind::Sup,
                                  int threads = 1);

}  // namespace gplab
