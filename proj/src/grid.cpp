#include "gplab/grid.hpp"

#include <cmath>
#include <string>

#include "gplab/error.hpp"

namespace gplab {

Grid::Grid(int dimension, std::size_t m) : d_(dimension), m_(m) {
  if (dimension != 1 && dimension != 2) throw DomainError("Grid: dimension must be 1 or 2");
  if (m < 2 || (m & (m - 1)) != 0) throw DomainError("Grid: points_per_axis must be a power of two >= 2");
}

std::size_t Grid::size() const { return d_ == 1 ? m_ + 1 : (m_ + 1) * (m_ + 1); }

std::vector<double> Grid::axis_nodes() const {
  std::vector<double> t(m_ + 1);
  for (std::size_t i = 0; i <= m_; ++i) t[i] = axis_node(i);
  return t;
}

std::array<double, 2> Grid::node(std::size_t flat) const {
  if (d_ == 1) return {axis_node(flat), 0.0};
  return {axis_node(flat / (m_ + 1)), axis_node(flat % (m_ + 1))};
}

std::vector<double> Grid::trapezoid_weights() const {
  std::vector<double> axis(m_ + 1, spacing());
  axis.front() *= 0.5;
  axis.back() *= 0.5;
  if (d_ == 1) return axis;
  std::vector<double> w(size());
  for (std::size_t i = 0; i <= m_; ++i)
    for (std::size_t j = 0; j <= m_; ++j) w[i * (m_ + 1) + j] = axis[i] * axis[j];
  return w;
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("GridFunction: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("GridFunction: non-finite value");
}

GridFunction GridFunction::zeros(const Grid& grid) { return GridFunction(grid, std::vector<double>(grid.size())); }

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double, double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto x = grid.node(i);
    v[i] = f(x[0], x[1]);
  }
  return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double)>& f) {
  return sample(grid, [&](double x, double) { return f(x); });
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::l2_norm() const {
  auto w = grid_.trapezoid_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += w[i] * values_[i] * values_[i];
  return std::sqrt(s);
}

double GridFunction::empirical_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s / values_.size());
}

GridFunction GridFunction::operator+(const GridFunction& other) const {
  if (!(grid_ == other.grid_)) throw DomainError("GridFunction: grids differ");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator-(const GridFunction& other) const { return *this + other * -1.0; }

GridFunction GridFunction::operator*(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return GridFunction(grid_, std::move(v));
}

double sup_distance(const GridFunction& a, const GridFunction& b) { return (a - b).sup_norm(); }
double l2_distance(const GridFunction& a, const GridFunction& b) { return (a - b).l2_norm(); }

double norm_of(const GridFunction& f, NormKind kind) {
  return kind == NormKind::Sup ? f.sup_norm() : f.l2_norm();
}

const char* to_string(NormKind kind) { return kind == NormKind::Sup ? "sup" : "l2"; }

NormKind parse_norm_kind(const std::string& text) {
  if (text == "sup") return NormKind::Sup;
  if (text == "l2" || text == "L2") return NormKind::L2;
  throw ConfigError("unknown norm '" + text + "' (expected sup or l2)");
}

}  // namespace gplab
