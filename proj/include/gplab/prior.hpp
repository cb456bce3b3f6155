#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab {

class PriorSpec;

struct BrownianMotion {};
/// Brownian motion plus an independent N(0,1) starting value.
struct ReleasedBM {};
/// k-fold integrated BM plus Σ_{i≤k} Z_i t^i / i!.
struct IntegratedBM {
  int k = 1;
};
/// Σ_{k≤ᾱ} Z_k t^k + ∫_0^t (t−s)^{α−1/2} dW_s, with ᾱ the largest integer below α.
struct RLPlusPoly {
  double alpha = 1.0;
};
/// The path part of RLPlusPoly alone.
struct RiemannLiouville {
  double alpha = 1.0;
};
/// Σ_{i≤degree} Z_i t^i, or Σ Z_i t^i / i! when factorial_scaled.
struct RandomPolynomial {
  int degree = 0;
  bool factorial_scaled = false;
};
struct FractionalBM {
  double alpha = 0.5;
};
/// Σ_{j=1}^{J} Σ_k μ_j Z_{j,k} ψ_{j,k} with μ_j = 2^{−ja}·2^{−jd/2}, tensor Haar ψ.
struct WaveletSeries {
  int d = 1;
  double a = 1.0;
  int J = 4;
};

struct FixedScale {
  double a = 1.0;
};
struct UniformScale {
  double lo = 0.0;
  double hi = 1.0;
};
using ScaleLaw = std::variant<FixedScale, UniformScale>;

struct Scaled {
  std::shared_ptr<const PriorSpec> base;
  ScaleLaw law;
};
struct SumPrior {
  std::vector<PriorSpec> components;
};

/// Immutable description of a centred Gaussian prior. Construct through the
/// static factories, which validate parameter ranges.
class PriorSpec {
 public:
  using Variant = std::variant<BrownianMotion, ReleasedBM, IntegratedBM, RLPlusPoly, RiemannLiouville,
                               RandomPolynomial, FractionalBM, WaveletSeries, Scaled, SumPrior>;

  static PriorSpec bm();
  static PriorSpec released_bm();
  static PriorSpec integrated_bm(int k);
  static PriorSpec rl_plus_poly(double alpha);
  static PriorSpec riemann_liouville(double alpha);
  static PriorSpec random_polynomial(int degree, bool factorial_scaled);
  static PriorSpec fbm(double alpha);
  static PriorSpec wavelet(int d, double a, int J);
  static PriorSpec scaled(const PriorSpec& base, double a);
  static PriorSpec scaled_uniform(const PriorSpec& base, double lo, double hi);
  static PriorSpec sum(std::vector<PriorSpec> components);

  const Variant& variant() const { return v_; }
  template <class T>
  bool is() const { return std::holds_alternative<T>(v_); }
  template <class T>
  const T& as() const { return std::get<T>(v_); }

  /// Short human-readable description, e.g. "rl_plus_poly(alpha=1.2)".
  std::string describe() const;

 private:
  explicit PriorSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Highest power in the random polynomial of RLPlusPoly: ⌈α⌉ − 1.
int rl_polynomial_degree(double alpha);

/// Tensor Haar basis, levels 1..J, 2^{jd} functions per level.
class WaveletBasis {
 public:
  WaveletBasis(int d, int J);

  int dimension() const { return d_; }
  int levels() const { return J_; }
  std::size_t count(int j) const { return std::size_t{1} << (j * d_); }
  std::size_t offset(int j) const;  // flat index of (j, 0)
  std::size_t total() const { return offset(J_ + 1); }

  /// ψ_{j,k} at x (d = 1) or (x, y) (d = 2). Cells are half-open except the
  /// last, which also owns the right endpoint.
  double evaluate(int j, std::size_t k, double x, double y = 0.0) const;

  bool operator==(const WaveletBasis&) const = default;

 private:
  int d_;
  int J_;
};

/// Coefficients on a WaveletBasis, flattened level by level.
class WaveletCoefficients {
 public:
  WaveletCoefficients(WaveletBasis basis, std::vector<double> values);
  static WaveletCoefficients zeros(const WaveletBasis& basis);

  const WaveletBasis& basis() const { return basis_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  std::span<const double> level(int j) const;

  /// Orthonormal ℓ2 norm (equals the L2 norm of the synthesized function).
  double l2_norm() const;
  /// Σ_j 2^{jd/2} max_k |w_{j,k}|, the sequence stand-in for the sup norm.
  double sup_norm() const;
  /// max_j 2^{j(β + d/2)} max_k |w_{j,k}|.
  double besov_norm(double beta) const;

  GridFunction synthesize(const Grid& grid) const;

 private:
  WaveletBasis basis_;
  std::vector<double> values_;
};

double sequence_norm(const WaveletCoefficients& w, NormKind kind);

/// μ_j = 2^{−ja}·2^{−jd/2}.
double wavelet_scale(const WaveletSeries& w, int j);

}  // namespace gplab
