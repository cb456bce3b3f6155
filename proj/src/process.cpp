#include "gplab/process.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>

#include "gplab/error.hpp"
#include "gplab/parallel.hpp"
#include "gplab/seed.hpp"

namespace gplab {

CovarianceKernel::CovarianceKernel(std::function<double(double, double)> rule, std::string tag)
    : rule_(std::move(rule)), tag_(std::move(tag)) {}

Eigen::MatrixXd CovarianceKernel::gram(std::span<const double> points) const {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = (*this)(points[i], points[j]);
  return k;
}

namespace {

// Gauss-Jacobi rule on [0,1] for the weight x^b (Golub-Welsch).
struct JacobiRule {
  std::vector<double> nodes, weights;
};

JacobiRule build_jacobi(double b, int n) {
  // Monic recurrence for P^{(0,b)} on [-1,1].
  const double a = 0.0;
  Eigen::VectorXd diag(n), off(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) {
    double s = 2.0 * k + a + b;
    diag(k) = (k == 0 && std::abs(a + b) < 1e-14) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    double s = 2.0 * k + a + b;
    double beta = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0));
    off(k - 1) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  // ∫_{-1}^{1} (1+ξ)^b dξ = 2^{b+1}/(b+1); mapped to [0,1] the total mass is 1/(b+1).
  JacobiRule rule;
  for (int i = 0; i < n; ++i) {
    double v0 = es.eigenvectors()(0, i);
    rule.nodes.push_back(0.5 * (1.0 + es.eigenvalues()(i)));
    rule.weights.push_back(v0 * v0 / (b + 1.0));
  }
  return rule;
}

const JacobiRule& jacobi_rule(double b) {
  static std::mutex mutex;
  static std::map<double, JacobiRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(b);
  if (it == cache.end()) it = cache.emplace(b, build_jacobi(b, 32)).first;
  return it->second;
}

}  // namespace

// With x = lo − u the integral is ∫_0^{lo} x^γ (δ + x)^γ dx, δ = hi − lo.
// The x^γ endpoint singularity is absorbed by a Gauss-Jacobi rule on
// [0, min(lo, δ)]; beyond δ the integrand is smooth and is covered by
// Gauss-Legendre panels whose lengths double, so each panel stays at least its
// own length away from the branch point at x = −δ.
double singular_path_covariance(double s, double t, double gamma) {
  if (!(gamma > -0.5)) throw DomainError("singular_path_covariance: gamma must exceed -1/2");
  double lo = std::min(s, t), hi = std::max(s, t);
  if (lo < 0.0) throw DomainError("singular_path_covariance: arguments must be nonnegative");
  if (lo == 0.0) return 0.0;
  if (gamma == 0.0) return lo;
  double delta = hi - lo;
  if (delta == 0.0) return std::pow(lo, 2.0 * gamma + 1.0) / (2.0 * gamma + 1.0);

  double c = std::min(lo, delta);
  const JacobiRule& jr = jacobi_rule(gamma);
  double head = 0.0;
  for (std::size_t i = 0; i < jr.nodes.size(); ++i) head += jr.weights[i] * std::pow(delta + c * jr.nodes[i], gamma);
  head *= std::pow(c, gamma + 1.0);

  double tail = 0.0;
  double left = c;
  while (left < lo) {
    double right = std::min(lo, 2.0 * left);
    tail += integrate([&](double x) { return std::pow(x * (delta + x), gamma); }, left, right, 24);
    left = right;
  }
  return head + tail;
}

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double polynomial_covariance(double s, double t, int degree, bool factorial_scaled) {
  double sum = 0.0, p = 1.0;
  for (int i = 0; i <= degree; ++i) {
    double fi = factorial_scaled ? factorial(i) : 1.0;
    sum += p / (fi * fi);
    p *= s * t;
  }
  return sum;
}

struct KernelBuilder {
  CovarianceKernel operator()(const BrownianMotion&) const {
    return {[](double s, double t) { return std::min(s, t); }, "bm"};
  }
  CovarianceKernel operator()(const ReleasedBM&) const {
    return {[](double s, double t) { return 1.0 + std::min(s, t); }, "released_bm"};
  }
  CovarianceKernel operator()(const IntegratedBM& p) const {
    int k = p.k;
    double norm = factorial(k) * factorial(k);
    return {[k, norm](double s, double t) {
              return polynomial_covariance(s, t, k, true) + singular_path_covariance(s, t, k) / norm;
            },
            "integrated_bm"};
  }
  CovarianceKernel operator()(const RLPlusPoly& p) const {
    int degree = rl_polynomial_degree(p.alpha);
    double gamma = p.alpha - 0.5;
    return {[degree, gamma](double s, double t) {
              return polynomial_covariance(s, t, degree, false) + singular_path_covariance(s, t, gamma);
            },
            "rl_plus_poly"};
  }
  CovarianceKernel operator()(const RiemannLiouville& p) const {
    double gamma = p.alpha - 0.5;
    return {[gamma](double s, double t) { return singular_path_covariance(s, t, gamma); }, "riemann_liouville"};
  }
  CovarianceKernel operator()(const RandomPolynomial& p) const {
    int degree = p.degree;
    bool fact = p.factorial_scaled;
    return {[degree, fact](double s, double t) { return polynomial_covariance(s, t, degree, fact); },
            "random_polynomial"};
  }
  CovarianceKernel operator()(const FractionalBM& p) const {
    double h2 = 2.0 * p.alpha;
    return {[h2](double s, double t) {
              return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
            },
            "fbm"};
  }
  CovarianceKernel operator()(const WaveletSeries&) const {
    throw UnsupportedSpec("kernel_of: wavelet priors are defined in coefficient space");
  }
  CovarianceKernel operator()(const Scaled& p) const {
    CovarianceKernel base = kernel_of(*p.base);
    double second_moment;
    if (auto* f = std::get_if<FixedScale>(&p.law)) {
      second_moment = f->a * f->a;
    } else {
      const auto& u = std::get<UniformScale>(p.law);
      second_moment = (u.lo * u.lo + u.lo * u.hi + u.hi * u.hi) / 3.0;
    }
    return {[base, second_moment](double s, double t) { return second_moment * base(s, t); }, "scaled"};
  }
  CovarianceKernel operator()(const SumPrior& p) const {
    std::vector<CovarianceKernel> parts;
    for (const auto& c : p.components) parts.push_back(kernel_of(c));
    return {[parts](double s, double t) {
              double sum = 0.0;
              for (const auto& k : parts) sum += k(s, t);
              return sum;
            },
            "sum"};
  }
};

}  // namespace

CovarianceKernel kernel_of(const PriorSpec& spec) { return std::visit(KernelBuilder{}, spec.variant()); }

CholeskyFactor jittered_cholesky(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw DomainError("jittered_cholesky: matrix is not square");
  CholeskyFactor f;
  f.dimension = static_cast<std::size_t>(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    if (k(i, i) != 0.0) f.active.push_back(static_cast<std::size_t>(i));
  const Eigen::Index n = static_cast<Eigen::Index>(f.active.size());
  if (n == 0) return f;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = k(f.active[i], f.active[j]);
  double scale = a.trace() / static_cast<double>(f.dimension);
  if (!(scale > 0.0)) throw CholeskyFailure("jittered_cholesky: nonpositive trace");
  for (double rel = 1e-12; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += rel * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      f.lower = llt.matrixL();
      f.jitter = rel * scale;
      f.relative_jitter = rel;
      return f;
    }
  }
  throw CholeskyFailure("jittered_cholesky: not positive definite with jitter up to 1e-6*trace/m");
}

struct PathSampler::Node {
  enum class Kind { Kernel, Wavelet, Scaled, Sum } kind;
  CholeskyFactor factor;
  WaveletSeries wavelet;
  ScaleLaw law;
  std::vector<std::shared_ptr<const Node>> children;
};

namespace {

using NodePtr = std::shared_ptr<const PathSampler::Node>;

NodePtr build_node(const PriorSpec& spec, const Grid& grid) {
  auto node = std::make_shared<PathSampler::Node>();
  if (spec.is<WaveletSeries>()) {
    node->kind = PathSampler::Node::Kind::Wavelet;
    node->wavelet = spec.as<WaveletSeries>();
    if (node->wavelet.d != grid.dimension()) throw IncompatibleSpecs("sample_path: wavelet d differs from grid d");
    if (grid.m() < (std::size_t{1} << node->wavelet.J))
      throw DomainError("sample_path: grid resolution must be >= 2^J per axis");
  } else if (spec.is<Scaled>()) {
    node->kind = PathSampler::Node::Kind::Scaled;
    node->law = spec.as<Scaled>().law;
    node->children.push_back(build_node(*spec.as<Scaled>().base, grid));
  } else if (spec.is<SumPrior>()) {
    node->kind = PathSampler::Node::Kind::Sum;
    for (const auto& c : spec.as<SumPrior>().components) node->children.push_back(build_node(c, grid));
  } else {
    if (grid.dimension() != 1) throw UnsupportedSpec("sample_path: kernel priors are defined on [0,1] only");
    node->kind = PathSampler::Node::Kind::Kernel;
    auto t = grid.axis_nodes();
    node->factor = jittered_cholesky(kernel_of(spec).gram(t));
  }
  return node;
}

void fill_normals(std::uint64_t seed, double* out, std::size_t n) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < n; ++i) out[i] = z(rng);
}

double draw_scale(const ScaleLaw& law, std::uint64_t seed) {
  if (auto* f = std::get_if<FixedScale>(&law)) return f->a;
  const auto& u = std::get<UniformScale>(law);
  Rng rng(child_seed(seed, "scale", 0));
  return std::uniform_real_distribution<double>(u.lo, u.hi)(rng);
}

void draw_node(const PathSampler::Node& node, const Grid& grid, std::span<const std::uint64_t> seeds,
               Eigen::MatrixXd& out) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index b = static_cast<Eigen::Index>(seeds.size());
  out.setZero(n, b);
  switch (node.kind) {
    case PathSampler::Node::Kind::Kernel: {
      const auto& f = node.factor;
      const Eigen::Index na = static_cast<Eigen::Index>(f.active.size());
      if (na == 0) return;
      Eigen::MatrixXd z(na, b);
      for (Eigen::Index c = 0; c < b; ++c) fill_normals(seeds[c], z.col(c).data(), na);
      Eigen::MatrixXd x = f.lower.triangularView<Eigen::Lower>() * z;
      for (Eigen::Index i = 0; i < na; ++i) out.row(f.active[i]) = x.row(i);
      return;
    }
    case PathSampler::Node::Kind::Wavelet: {
      for (Eigen::Index c = 0; c < b; ++c) {
        GridFunction g = sample_coefficients(node.wavelet, seeds[c]).synthesize(grid);
        for (Eigen::Index i = 0; i < n; ++i) out(i, c) = g[i];
      }
      return;
    }
    case PathSampler::Node::Kind::Scaled: {
      draw_node(*node.children[0], grid, seeds, out);
      for (Eigen::Index c = 0; c < b; ++c) out.col(c) *= draw_scale(node.law, seeds[c]);
      return;
    }
    case PathSampler::Node::Kind::Sum: {
      Eigen::MatrixXd part;
      std::vector<std::uint64_t> child(seeds.size());
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        for (std::size_t c = 0; c < seeds.size(); ++c) child[c] = child_seed(seeds[c], "component", i);
        draw_node(*node.children[i], grid, child, part);
        out += part;
      }
      return;
    }
  }
}

}  // namespace

PathSampler::PathSampler(const PriorSpec& spec, const Grid& grid)
    : spec_(spec), grid_(grid), root_(build_node(spec, grid)) {}
PathSampler::~PathSampler() = default;
PathSampler::PathSampler(const PathSampler&) = default;
PathSampler& PathSampler::operator=(const PathSampler&) = default;

void PathSampler::draw_batch(std::span<const std::uint64_t> seeds, Eigen::MatrixXd& out) const {
  draw_node(*root_, grid_, seeds, out);
}

GridFunction PathSampler::draw(std::uint64_t seed) const {
  Eigen::MatrixXd out;
  draw_batch(std::span<const std::uint64_t>(&seed, 1), out);
  return GridFunction(grid_, std::vector<double>(out.data(), out.data() + out.size()));
}

WaveletCoefficients PathSampler::draw_coefficients(std::uint64_t seed) const {
  if (!spec_.is<WaveletSeries>()) throw UnsupportedSpec("draw_coefficients: spec is not a wavelet series");
  return sample_coefficients(spec_.as<WaveletSeries>(), seed);
}

GridFunction sample_path(const PriorSpec& spec, const Grid& grid, std::uint64_t seed) {
  return PathSampler(spec, grid).draw(seed);
}

WaveletCoefficients sample_coefficients(const WaveletSeries& spec, std::uint64_t seed) {
  WaveletBasis basis(spec.d, spec.J);
  std::vector<double> v(basis.total());
  fill_normals(seed, v.data(), v.size());
  for (int j = 1; j <= spec.J; ++j) {
    double mu = wavelet_scale(spec, j);
    for (std::size_t i = basis.offset(j); i < basis.offset(j + 1); ++i) v[i] *= mu;
  }
  return WaveletCoefficients(basis, std::move(v));
}

int truncation_level(double alpha, int d, double n) {
  if (!(alpha > 0.0)) throw DomainError("truncation_level: alpha must be positive");
  if (d < 1) throw DomainError("truncation_level: d must be >= 1");
  if (!(n >= 2.0)) throw DomainError("truncation_level: n must be >= 2");
  double j = std::round(std::log2(n) / (2.0 * alpha + d));
  return std::max(1, static_cast<int>(j));
}

TruncationGap mean_sq_truncation_gap(const PriorSpec& full, const PriorSpec& truncated, const Grid& grid,
                                     double n, std::size_t mc_reps, std::uint64_t seed, int threads) {
  if (!full.is<WaveletSeries>() || !truncated.is<WaveletSeries>())
    throw IncompatibleSpecs("mean_sq_truncation_gap: both specs must be wavelet series");
  const auto& f = full.as<WaveletSeries>();
  const auto& t = truncated.as<WaveletSeries>();
  if (f.d != t.d || f.a != t.a) throw IncompatibleSpecs("mean_sq_truncation_gap: bases or scales differ");
  if (t.J > f.J) throw IncompatibleSpecs("mean_sq_truncation_gap: truncated series is deeper than the full one");
  if (grid.dimension() != f.d || grid.m() < (std::size_t{1} << f.J))
    throw DomainError("mean_sq_truncation_gap: grid too coarse for the full series");
  if (mc_reps < 2) throw DomainError("mean_sq_truncation_gap: mc_reps must be >= 2");
  if (!(n > 0.0)) throw DomainError("mean_sq_truncation_gap: n must be positive");

  WaveletBasis basis(f.d, f.J);
  std::size_t tail_start = basis.offset(t.J + 1);
  std::vector<double> gap(mc_reps);
  parallel_for(mc_reps, threads, [&](std::size_t r) {
    // The truncated draw with the same seed equals the first t.J levels of the
    // full draw, so the difference is exactly the tail.
    WaveletCoefficients w = sample_coefficients(f, child_seed(seed, "truncation_gap", r));
    double s = 0.0;
    for (std::size_t i = tail_start; i < w.values().size(); ++i) s += w.values()[i] * w.values()[i];
    gap[r] = 10.0 * s;
  });
  double mean = 0.0;
  for (double g : gap) mean += g;
  mean /= mc_reps;
  double var = 0.0;
  for (double g : gap) var += (g - mean) * (g - mean);
  var /= (mc_reps - 1);
  double se = std::sqrt(var / mc_reps);

  TruncationGap out;
  out.estimate = mean;
  out.reps = mc_reps;
  out.ci = {std::max(0.0, mean - 1.959963984540054 * se), mean + 1.959963984540054 * se};
  for (int j = t.J + 1; j <= f.J; ++j) {
    double mu = wavelet_scale(f, j);
    out.exact += 10.0 * mu * mu * std::ldexp(1.0, j * f.d);
  }
  out.passes = out.ci.hi <= 1.0 / n;
  return out;
}

}  // namespace gplab
