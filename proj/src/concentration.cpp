#include "gplab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gplab/error.hpp"
#include "gplab/parallel.hpp"
#include "gplab/process.hpp"
#include "gplab/rkhs.hpp"
#include "gplab/seed.hpp"

namespace gplab {

namespace {
constexpr std::size_t kBlock = 256;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::vector<double> prior_draw_norms(const PriorSpec& spec, const Grid& grid, NormKind norm, std::size_t reps,
                                     std::uint64_t seed, int threads) {
  std::vector<double> out(reps);
  if (spec.is<WaveletSeries>()) {
    const auto& w = spec.as<WaveletSeries>();
    parallel_for(reps, threads, [&](std::size_t r) {
      out[r] = sequence_norm(sample_coefficients(w, child_seed(seed, "small_ball", r)), norm);
    });
    return out;
  }
  PathSampler sampler(spec, grid);
  const std::size_t blocks = (reps + kBlock - 1) / kBlock;
  const auto weights = grid.trapezoid_weights();
  parallel_for(blocks, threads, [&](std::size_t b) {
    std::size_t lo = b * kBlock, hi = std::min(reps, lo + kBlock);
    std::vector<std::uint64_t> seeds(hi - lo);
    for (std::size_t r = lo; r < hi; ++r) seeds[r - lo] = child_seed(seed, "small_ball", r);
    Eigen::MatrixXd paths;
    sampler.draw_batch(seeds, paths);
    for (std::size_t c = 0; c < seeds.size(); ++c) {
      const double* x = paths.col(static_cast<Eigen::Index>(c)).data();
      double v = 0.0;
      if (norm == NormKind::Sup) {
        for (Eigen::Index i = 0; i < paths.rows(); ++i) v = std::max(v, std::abs(x[i]));
      } else {
        for (Eigen::Index i = 0; i < paths.rows(); ++i) v += weights[i] * x[i] * x[i];
        v = std::sqrt(v);
      }
      out[lo + c] = v;
    }
  });
  return out;
}

SmallBallEstimate small_ball(const PriorSpec& spec, const Grid& grid, NormKind norm, std::vector<double> eps_grid,
                             std::size_t reps, std::uint64_t seed, int threads) {
  if (reps == 0) throw DomainError("small_ball: reps must be positive");
  for (double e : eps_grid)
    if (!(e > 0.0)) throw DomainError("small_ball: eps values must be positive");
  std::sort(eps_grid.begin(), eps_grid.end());
  std::vector<double> norms = prior_draw_norms(spec, grid, norm, reps, seed, threads);
  std::sort(norms.begin(), norms.end());

  SmallBallEstimate est;
  est.norm = norm;
  est.reps = reps;
  est.seed = seed;
  for (double e : eps_grid) {
    SmallBallEntry entry;
    entry.eps = e;
    entry.hits = static_cast<std::size_t>(std::lower_bound(norms.begin(), norms.end(), e) - norms.begin());
    Interval p = wilson_interval(entry.hits, reps);
    if (entry.hits == 0) {
      entry.censored = true;
      entry.p_hat = 1.0 / reps;
    } else {
      entry.p_hat = static_cast<double>(entry.hits) / reps;
    }
    entry.exponent = -std::log(entry.p_hat);
    entry.exponent_ci.lo = std::max(0.0, -std::log(p.hi));
    entry.exponent_ci.hi = entry.hits >= 5 ? -std::log(p.lo) : kInf;
    est.entries.push_back(entry);
  }
  return est;
}

LineFit small_ball_slope(const SmallBallEstimate& est, const SlopeWindow& window) {
  std::vector<double> x, y;
  for (const auto& e : est.entries) {
    if (e.censored || e.hits < window.min_hits || e.exponent < window.min_exponent || !(e.exponent > 0.0)) continue;
    x.push_back(std::log(1.0 / e.eps));
    y.push_back(std::log(e.exponent));
  }
  if (x.size() < 2) throw RangeError("small_ball_slope: fewer than two usable entries");
  return fit_line(x, y);
}

std::vector<double> wavelet_lower_weights(const WaveletSeries& spec) {
  const double d = spec.d;
  double k = 8.0;
  if (spec.a > 0.0) {
    // g(L) = 2^{La/d}/(K + L²) is increasing on [0, Jd] iff K ≥ 2L/c − L², c = a·ln2/d.
    double c = spec.a * std::log(2.0) / d, top = spec.J * d;
    double need = (1.0 / c <= top) ? 1.0 / (c * c) : 2.0 * top / c - top * top;
    k = std::max(k, need);
  }
  std::vector<double> alpha(spec.J);
  for (int j = 1; j <= spec.J; ++j) alpha[j - 1] = 1.0 / (k + d * d * j * j);
  return alpha;
}

double wavelet_small_ball_lower(const WaveletSeries& spec, double eps) {
  if (!(eps > 0.0)) throw DomainError("wavelet_small_ball_lower: eps must be positive");
  auto alpha = wavelet_lower_weights(spec);
  double total = 0.0;
  for (int j = 1; j <= spec.J; ++j) {
    double scale = wavelet_scale(spec, j) * std::pow(2.0, 0.5 * j * spec.d);
    double x = alpha[j - 1] * eps / scale;
    double factor = std::erf(x / std::sqrt(2.0));  // 2Φ(x) − 1
    if (!(factor > 0.0)) throw DomainError("wavelet_small_ball_lower: factor underflows at this eps");
    double log_factor = factor > 0.5 ? std::log1p(-std::erfc(x / std::sqrt(2.0))) : std::log(factor);
    total -= std::ldexp(1.0, j * spec.d) * log_factor;
  }
  return total;
}

ConcentrationProfile::ConcentrationProfile(std::vector<ProfileEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw DomainError("ConcentrationProfile: no entries");
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.eps < b.eps; });
  std::vector<double> raw;
  for (auto& e : entries_) {
    if (!(e.eps > 0.0) || e.D < 0.0 || e.S < 0.0) throw DomainError("ConcentrationProfile: invalid entry");
    e.phi_raw = e.D + e.S;
    raw.push_back(e.phi_raw);
  }
  auto iso = isotonic_nonincreasing(raw);
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i].phi = iso[i];
}

ConcentrationProfile ConcentrationProfile::from_values(const std::vector<double>& eps, const std::vector<double>& d,
                                                       const std::vector<double>& s, const std::string& provenance_d,
                                                       const std::string& provenance_s) {
  if (eps.size() != d.size() || eps.size() != s.size()) throw DomainError("from_values: length mismatch");
  std::vector<ProfileEntry> entries;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ProfileEntry e;
    e.eps = eps[i];
    e.D = d[i];
    e.S = s[i];
    e.provenance_D = provenance_d;
    e.provenance_S = provenance_s;
    entries.push_back(e);
  }
  return ConcentrationProfile(std::move(entries));
}

double ConcentrationProfile::eps_min() const { return entries_.front().eps; }
double ConcentrationProfile::eps_max() const { return entries_.back().eps; }

double ConcentrationProfile::phi_at(double eps) const {
  const double slack = 1e-12;
  if (entries_.empty()) throw RangeError("phi_at: empty profile");
  if (eps < eps_min() * (1.0 - slack) || eps > eps_max() * (1.0 + slack))
    throw RangeError("phi_at: eps outside profile coverage");
  eps = std::clamp(eps, eps_min(), eps_max());
  auto it = std::lower_bound(entries_.begin(), entries_.end(), eps,
                             [](const ProfileEntry& e, double x) { return e.eps < x; });
  if (it == entries_.begin() || it->eps == eps) return it->phi;
  const auto& b = *it;
  const auto& a = *(it - 1);
  double t = (std::log(eps) - std::log(a.eps)) / (std::log(b.eps) - std::log(a.eps));
  if (a.phi > 0.0 && b.phi > 0.0) return std::exp(std::log(a.phi) + t * (std::log(b.phi) - std::log(a.phi)));
  return a.phi + t * (b.phi - a.phi);
}

ConcentrationProfile assemble_profile(const GridFunction& w0, const PriorSpec& spec, const std::vector<double>& eps_grid,
                                      const ProfileOptions& options) {
  std::vector<double> eps(eps_grid);
  std::sort(eps.begin(), eps.end());
  auto dec = decentering_profile(w0, spec, eps, options.norm);
  SmallBallEstimate sb = small_ball(spec, w0.grid(), options.norm, eps, options.reps, options.seed, options.threads);
  std::vector<ProfileEntry> entries;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ProfileEntry e;
    e.eps = eps[i];
    e.D = dec[i].value;
    e.provenance_D = dec[i].provenance;
    e.S = sb.entries[i].exponent;
    e.censored = sb.entries[i].censored;
    e.provenance_S = e.censored ? "monte-carlo-censored" : "monte-carlo";
    entries.push_back(e);
  }
  return ConcentrationProfile(std::move(entries));
}

ConcentrationProfile assemble_profile(const WaveletCoefficients& w0, const WaveletSeries& spec,
                                      const std::vector<double>& eps_grid, const ProfileOptions& options) {
  std::vector<double> eps(eps_grid);
  std::sort(eps.begin(), eps.end());
  auto dec = decentering_profile(w0, spec, eps, options.norm);
  std::vector<ProfileEntry> entries;
  std::optional<SmallBallEstimate> sb;
  if (!options.wavelet_closed_form) {
    Grid grid(spec.d, std::size_t{1} << spec.J);
    sb = small_ball(PriorSpec::wavelet(spec.d, spec.a, spec.J), grid, options.norm, eps, options.reps, options.seed,
                    options.threads);
  }
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ProfileEntry e;
    e.eps = eps[i];
    e.D = dec[i].value;
    e.provenance_D = dec[i].provenance;
    if (sb) {
      e.S = sb->entries[i].exponent;
      e.censored = sb->entries[i].censored;
      e.provenance_S = e.censored ? "monte-carlo-censored" : "monte-carlo";
    } else {
      if (options.norm != NormKind::Sup)
        throw UnsupportedSpec("assemble_profile: the closed-form wavelet bound is for the sup norm");
      e.S = wavelet_small_ball_lower(spec, eps[i]);
      e.provenance_S = "closed-form";
    }
    entries.push_back(e);
  }
  return ConcentrationProfile(std::move(entries));
}

namespace {

// F(x) = log φ(e^x) − log n − 2x is nonincreasing; a root brackets ε_n.
RatePoint solve_one(const std::function<double(double)>& phi, double lo_eps, double hi_eps, double n, double tol) {
  RatePoint pt;
  pt.n = n;
  auto f = [&](double x) {
    double p = phi(std::exp(x));
    if (!(p > 0.0)) return -kInf;
    return std::log(p) - std::log(n) - 2.0 * x;
  };
  double lo = std::log(lo_eps), hi = std::log(hi_eps);
  double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0) || fhi > 0.0) {
    pt.note = "bracket-failure: profile does not straddle n*eps^2";
    return pt;
  }
  const double stop = -std::log1p(-tol / 4.0);
  int side = 0;
  for (int iter = 0; iter < 200 && hi - lo > stop; ++iter) {
    double x;
    if (std::isfinite(fhi)) {
      x = hi - fhi * (hi - lo) / (fhi - flo);
      // Fall back to bisection when the secant point sits on the bracket edge.
      if (!(x > lo + 0.01 * (hi - lo) && x < hi - 0.01 * (hi - lo))) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    double fx = f(x);
    if (fx == 0.0) {
      lo = hi = x;
      break;
    }
    if (fx > 0.0) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  pt.bracket_lo = std::exp(lo);
  pt.bracket_hi = std::exp(hi);
  pt.eps_n = pt.bracket_hi;
  return pt;
}

RateSolution finish(std::vector<RatePoint> points) {
  RateSolution sol;
  std::vector<double> x, y;
  const RatePoint* prev = nullptr;
  for (auto& p : points) {
    p.slope_partial = std::numeric_limits<double>::quiet_NaN();
    if (!p.eps_n) continue;
    if (prev) p.slope_partial = (std::log(*p.eps_n) - std::log(*prev->eps_n)) / (std::log(p.n) - std::log(prev->n));
    prev = &p;
    x.push_back(std::log(p.n));
    y.push_back(std::log(*p.eps_n));
  }
  sol.points = std::move(points);
  if (x.size() >= 2) sol.fit = fit_line(x, y);
  return sol;
}

void check_ladder(const std::vector<double>& n_ladder, double tol) {
  if (n_ladder.empty()) throw DomainError("solve_rate: empty n ladder");
  for (double n : n_ladder)
    if (!(n > 0.0)) throw DomainError("solve_rate: n must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("solve_rate: tol must lie in (0, 1)");
}

}  // namespace

RateSolution solve_rate(const ConcentrationProfile& profile, const std::vector<double>& n_ladder, double tol) {
  check_ladder(n_ladder, tol);
  std::vector<RatePoint> pts;
  auto phi = [&](double e) { return profile.phi_at(e); };
  for (double n : n_ladder) pts.push_back(solve_one(phi, profile.eps_min(), profile.eps_max(), n, tol));
  return finish(std::move(pts));
}

RateSolution solve_rate(const std::function<double(double)>& phi, double eps_lo, double eps_hi,
                        const std::vector<double>& n_ladder, double tol) {
  check_ladder(n_ladder, tol);
  if (!(eps_lo > 0.0 && eps_hi > eps_lo)) throw DomainError("solve_rate: need 0 < eps_lo < eps_hi");
  std::vector<RatePoint> pts;
  for (double n : n_ladder) pts.push_back(solve_one(phi, eps_lo, eps_hi, n, tol));
  return finish(std::move(pts));
}

double sum_rule(const std::vector<ConcentrationProfile>& profiles, double eps) {
  if (profiles.empty()) throw DomainError("sum_rule: no profiles");
  if (!(eps > 0.0)) throw DomainError("sum_rule: eps must be positive");
  double s = 0.0;
  for (const auto& p : profiles) s += p.phi_at(eps / 2.0);
  return 2.0 * s;
}

ScaleBounds scale_rule(const ConcentrationProfile& profile_of_w, double k, double K, double pr_a_geq_k, double n,
                       double eps_n, double C) {
  if (!(k > 0.0 && k <= 1.0 && K >= 1.0)) throw DomainError("scale_rule: need 0 < k <= 1 <= K");
  if (!(pr_a_geq_k > 0.0 && pr_a_geq_k <= 1.0)) throw DomainError("scale_rule: Pr(A >= k) must lie in (0, 1]");
  if (!(C > 1.0)) throw DomainError("scale_rule: C must exceed 1");
  if (!(n > 0.0 && eps_n > 0.0)) throw DomainError("scale_rule: n and eps_n must be positive");
  if (!profile_of_w.entries().empty() && eps_n >= profile_of_w.eps_min() && eps_n <= profile_of_w.eps_max()) {
    if (profile_of_w.phi_at(eps_n) > n * eps_n * eps_n * (1.0 + 1e-9))
      throw DomainError("scale_rule: eps_n does not satisfy phi(eps_n) <= n eps_n^2");
  }
  double x = n * eps_n * eps_n;
  ScaleBounds b;
  b.entropy_radius = 3.0 * K * eps_n;
  b.entropy_bound = 6.0 * C * x;
  b.excess_mass_bound = std::exp(-C * x);
  b.mass_radius = 2.0 * K * eps_n;
  b.mass_lower = pr_a_geq_k * std::exp(-x / (k * k));
  return b;
}

}  // namespace gplab
