#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/numerics.hpp"
#include "gplab/prior.hpp"

namespace gplab {

struct SmallBallEntry {
  double eps = 0.0;
  std::size_t hits = 0;
  double p_hat = 0.0;     // 1/reps when censored
  double exponent = 0.0;  // −log p_hat
  Interval exponent_ci;   // from the Wilson interval for p; hi = inf when hits < 5
  bool censored = false;  // zero hits: exponent is only a lower bound
};

struct SmallBallEstimate {
  NormKind norm = NormKind::Sup;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<SmallBallEntry> entries;  // ascending eps
};

/// Norms of `reps` prior draws: path norms on the grid, or sequence norms of
/// the coefficients when the spec is a wavelet series.
std::vector<double> prior_draw_norms(const PriorSpec& spec, const Grid& grid, NormKind norm, std::size_t reps,
                                     std::uint64_t seed, int threads = 1);

SmallBallEstimate small_ball(const PriorSpec& spec, const Grid& grid, NormKind norm, std::vector<double> eps_grid,
                             std::size_t reps, std::uint64_t seed, int threads = 1);

struct SlopeWindow {
  std::size_t min_hits = 5;
  double min_exponent = 0.0;
};

/// Least-squares slope of log(exponent) against log(1/ε) over entries with at
/// least `min_hits` hits and exponent ≥ min_exponent.
LineFit small_ball_slope(const SmallBallEstimate& est, const SlopeWindow& window = {});

/// α_j = 1/(K + d²j²) with K ≥ 8 raised so that 2^{ja}/(K + d²j²) increases in j.
std::vector<double> wavelet_lower_weights(const WaveletSeries& spec);

/// −Σ_j 2^{jd} log(2Φ(α_j ε/(μ_j 2^{jd/2})) − 1).
double wavelet_small_ball_lower(const WaveletSeries& spec, double eps);

struct ProfileEntry {
  double eps = 0.0;
  double D = 0.0;
  double S = 0.0;
  double phi_raw = 0.0;  // D + S
  double phi = 0.0;      // after the isotonic pass
  std::string provenance_D;
  std::string provenance_S;
  bool censored = false;
};

class ConcentrationProfile {
 public:
  ConcentrationProfile() = default;
  /// Entries are sorted by eps and φ is regularized to be nonincreasing.
  explicit ConcentrationProfile(std::vector<ProfileEntry> entries);
  static ConcentrationProfile from_values(const std::vector<double>& eps, const std::vector<double>& d,
                                          const std::vector<double>& s, const std::string& provenance_d,
                                          const std::string& provenance_s);

  const std::vector<ProfileEntry>& entries() const { return entries_; }
  double eps_min() const;
  double eps_max() const;
  /// Log-log interpolation of the regularized φ; range-error outside the table.
  double phi_at(double eps) const;

 private:
  std::vector<ProfileEntry> entries_;
};

struct ProfileOptions {
  NormKind norm = NormKind::Sup;
  std::size_t reps = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool wavelet_closed_form = true;  // wavelet S from the product lower bound instead of MC
};

ConcentrationProfile assemble_profile(const GridFunction& w0, const PriorSpec& spec, const std::vector<double>& eps_grid,
                                      const ProfileOptions& options);
ConcentrationProfile assemble_profile(const WaveletCoefficients& w0, const WaveletSeries& spec,
                                      const std::vector<double>& eps_grid, const ProfileOptions& options);

struct RatePoint {
  double n = 0.0;
  std::optional<double> eps_n;  // upper end of the final bracket
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double slope_partial = 0.0;   // NaN for the first solved point
  std::string note;             // set when the point was dropped
};

struct RateSolution {
  std::vector<RatePoint> points;
  std::optional<LineFit> fit;
  std::optional<double> target_slope;
};

/// Solves φ(ε) = nε² in log ε with a safeguarded false-position bracket.
/// Stops once lo ≥ hi(1 − tol/4) so that φ(ε_n) ≤ nε_n² ≤ φ(ε_n(1−tol))(1+tol).
RateSolution solve_rate(const ConcentrationProfile& profile, const std::vector<double>& n_ladder, double tol = 1e-3);
RateSolution solve_rate(const std::function<double(double)>& phi, double eps_lo, double eps_hi,
                        const std::vector<double>& n_ladder, double tol = 1e-3);

/// 2 Σ_i φ^i(ε/2), which bounds φ_w(ε|I|) for the sum.
double sum_rule(const std::vector<ConcentrationProfile>& profiles, double eps);

struct ScaleBounds {
  double entropy_radius = 0.0;  // 3Kε_n
  double entropy_bound = 0.0;   // 6Cnε_n²
  double excess_mass_bound = 0.0;
  double mass_radius = 0.0;     // 2Kε_n
  double mass_lower = 0.0;
};

ScaleBounds scale_rule(const ConcentrationProfile& profile_of_w, double k, double K, double pr_a_geq_k, double n,
                       double eps_n, double C = 2.0);

}  // namespace gplab
