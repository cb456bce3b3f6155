#include "gplab/prior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

PriorSpec PriorSpec::bm() { return PriorSpec(BrownianMotion{}); }
PriorSpec PriorSpec::released_bm() { return PriorSpec(ReleasedBM{}); }

PriorSpec PriorSpec::integrated_bm(int k) {
  require(k >= 0, "IntegratedBM: k must be a nonnegative integer");
  return PriorSpec(IntegratedBM{k});
}

PriorSpec PriorSpec::rl_plus_poly(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "RLPlusPoly: alpha must be positive");
  return PriorSpec(RLPlusPoly{alpha});
}

PriorSpec PriorSpec::riemann_liouville(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "RiemannLiouville: alpha must be positive");
  return PriorSpec(RiemannLiouville{alpha});
}

PriorSpec PriorSpec::random_polynomial(int degree, bool factorial_scaled) {
  require(degree >= 0, "RandomPolynomial: degree must be nonnegative");
  return PriorSpec(RandomPolynomial{degree, factorial_scaled});
}

PriorSpec PriorSpec::fbm(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "FBM: alpha must lie in (0, 1)");
  return PriorSpec(FractionalBM{alpha});
}

PriorSpec PriorSpec::wavelet(int d, double a, int J) {
  require(d == 1 || d == 2, "WaveletSeries: d must be 1 or 2");
  require(a >= 0.0 && std::isfinite(a), "WaveletSeries: a must be nonnegative");
  require(J >= 1 && J * d <= 24, "WaveletSeries: J must satisfy 1 <= J and J*d <= 24");
  return PriorSpec(WaveletSeries{d, a, J});
}

PriorSpec PriorSpec::scaled(const PriorSpec& base, double a) {
  require(a > 0.0 && std::isfinite(a), "Scaled: fixed scale must be positive and finite");
  return PriorSpec(Scaled{std::make_shared<const PriorSpec>(base), FixedScale{a}});
}

PriorSpec PriorSpec::scaled_uniform(const PriorSpec& base, double lo, double hi) {
  require(lo >= 0.0 && hi > lo && std::isfinite(hi), "Scaled: uniform law needs 0 <= lo < hi < inf");
  return PriorSpec(Scaled{std::make_shared<const PriorSpec>(base), UniformScale{lo, hi}});
}

PriorSpec PriorSpec::sum(std::vector<PriorSpec> components) {
  require(!components.empty(), "Sum: components must be non-empty");
  return PriorSpec(SumPrior{std::move(components)});
}

std::string PriorSpec::describe() const {
  struct Visitor {
    std::string operator()(const BrownianMotion&) const { return "bm"; }
    std::string operator()(const ReleasedBM&) const { return "released_bm"; }
    std::string operator()(const IntegratedBM& p) const { return "integrated_bm(k=" + std::to_string(p.k) + ")"; }
    std::string operator()(const RLPlusPoly& p) const { return "rl_plus_poly(alpha=" + num(p.alpha) + ")"; }
    std::string operator()(const RiemannLiouville& p) const { return "riemann_liouville(alpha=" + num(p.alpha) + ")"; }
    std::string operator()(const RandomPolynomial& p) const {
      return "random_polynomial(degree=" + std::to_string(p.degree) +
             (p.factorial_scaled ? ",factorial)" : ")");
    }
    std::string operator()(const FractionalBM& p) const { return "fbm(alpha=" + num(p.alpha) + ")"; }
    std::string operator()(const WaveletSeries& p) const {
      return "wavelet(d=" + std::to_string(p.d) + ",a=" + num(p.a) + ",J=" + std::to_string(p.J) + ")";
    }
    std::string operator()(const Scaled& p) const {
      if (auto* f = std::get_if<FixedScale>(&p.law)) return "scaled(" + p.base->describe() + ",a=" + num(f->a) + ")";
      const auto& u = std::get<UniformScale>(p.law);
      return "scaled(" + p.base->describe() + ",uniform[" + num(u.lo) + "," + num(u.hi) + "])";
    }
    std::string operator()(const SumPrior& p) const {
      std::string s = "sum(";
      for (std::size_t i = 0; i < p.components.size(); ++i) s += (i ? "," : "") + p.components[i].describe();
      return s + ")";
    }
  };
  return std::visit(Visitor{}, v_);
}

int rl_polynomial_degree(double alpha) { return static_cast<int>(std::ceil(alpha)) - 1; }

WaveletBasis::WaveletBasis(int d, int J) : d_(d), J_(J) {
  require(d == 1 || d == 2, "WaveletBasis: d must be 1 or 2");
  require(J >= 1, "WaveletBasis: J must be >= 1");
}

std::size_t WaveletBasis::offset(int j) const {
  std::size_t off = 0;
  for (int l = 1; l < j; ++l) off += count(l);
  return off;
}

namespace {

// Cell index and Haar sign at level j for coordinate x ∈ [0,1].
inline void haar_locate(int j, double x, std::size_t& cell, double& sign) {
  double scaled = std::ldexp(x, j);
  std::size_t n = std::size_t{1} << j;
  std::size_t c = static_cast<std::size_t>(std::floor(scaled));
  if (c >= n) c = n - 1;
  double u = scaled - static_cast<double>(c);
  cell = c;
  sign = u < 0.5 ? 1.0 : -1.0;
}

}  // namespace

double WaveletBasis::evaluate(int j, std::size_t k, double x, double y) const {
  require(j >= 1 && j <= J_ && k < count(j), "WaveletBasis::evaluate: index out of range");
  std::size_t cx, cy = 0;
  double sx, sy = 1.0;
  haar_locate(j, x, cx, sx);
  if (d_ == 2) haar_locate(j, y, cy, sy);
  std::size_t expected = d_ == 1 ? cx : cx * (std::size_t{1} << j) + cy;
  if (expected != k) return 0.0;
  return std::pow(2.0, 0.5 * j * d_) * sx * sy;
}

WaveletCoefficients::WaveletCoefficients(WaveletBasis basis, std::vector<double> values)
    : basis_(basis), values_(std::move(values)) {
  require(values_.size() == basis_.total(), "WaveletCoefficients: value count does not match basis");
}

WaveletCoefficients WaveletCoefficients::zeros(const WaveletBasis& basis) {
  return WaveletCoefficients(basis, std::vector<double>(basis.total()));
}

std::span<const double> WaveletCoefficients::level(int j) const {
  require(j >= 1 && j <= basis_.levels(), "WaveletCoefficients::level: level out of range");
  return std::span<const double>(values_).subspan(basis_.offset(j), basis_.count(j));
}

double WaveletCoefficients::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double WaveletCoefficients::sup_norm() const {
  double s = 0.0;
  for (int j = 1; j <= basis_.levels(); ++j) {
    double mx = 0.0;
    for (double v : level(j)) mx = std::max(mx, std::abs(v));
    s += std::pow(2.0, 0.5 * j * basis_.dimension()) * mx;
  }
  return s;
}

double WaveletCoefficients::besov_norm(double beta) const {
  double s = 0.0;
  for (int j = 1; j <= basis_.levels(); ++j) {
    double mx = 0.0;
    for (double v : level(j)) mx = std::max(mx, std::abs(v));
    s = std::max(s, std::pow(2.0, j * (beta + 0.5 * basis_.dimension())) * mx);
  }
  return s;
}

GridFunction WaveletCoefficients::synthesize(const Grid& grid) const {
  require(grid.dimension() == basis_.dimension(), "synthesize: grid and basis dimensions differ");
  require(grid.m() >= (std::size_t{1} << basis_.levels()), "synthesize: grid resolution must be >= 2^J per axis");
  const int d = basis_.dimension();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto x = grid.node(i);
    double v = 0.0;
    for (int j = 1; j <= basis_.levels(); ++j) {
      std::size_t cx, cy = 0;
      double sx, sy = 1.0;
      haar_locate(j, x[0], cx, sx);
      if (d == 2) haar_locate(j, x[1], cy, sy);
      std::size_t k = d == 1 ? cx : cx * (std::size_t{1} << j) + cy;
      v += values_[basis_.offset(j) + k] * std::pow(2.0, 0.5 * j * d) * sx * sy;
    }
    out[i] = v;
  }
  return GridFunction(grid, std::move(out));
}

double sequence_norm(const WaveletCoefficients& w, NormKind kind) {
  return kind == NormKind::Sup ? w.sup_norm() : w.l2_norm();
}

double wavelet_scale(const WaveletSeries& w, int j) { return std::pow(2.0, -j * w.a - 0.5 * j * w.d); }

}  // namespace gplab
