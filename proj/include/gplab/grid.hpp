#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gplab {

/// Uniform grid {i/m : i = 0..m} on [0,1], or its tensor square for d = 2.
/// Flattened node index for d = 2 is ix*(m+1) + iy.
class Grid {
 public:
  Grid(int dimension, std::size_t m);

  int dimension() const { return d_; }
  std::size_t m() const { return m_; }
  std::size_t nodes_per_axis() const { return m_ + 1; }
  std::size_t size() const;
  double spacing() const { return 1.0 / static_cast<double>(m_); }
  double axis_node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(m_); }
  std::vector<double> axis_nodes() const;
  std::array<double, 2> node(std::size_t flat) const;

  /// Trapezoid weights (tensor product for d = 2); they sum to 1.
  std::vector<double> trapezoid_weights() const;

  bool operator==(const Grid&) const = default;

 private:
  int d_;
  std::size_t m_;
};

class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);

  static GridFunction zeros(const Grid& grid);
  /// Samples f at the nodes; f receives (x, y) with y = 0 when d = 1.
  static GridFunction sample(const Grid& grid, const std::function<double(double, double)>& f);
  static GridFunction sample(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double sup_norm() const;
  /// Trapezoid L2 norm over [0,1]^d.
  double l2_norm() const;
  /// Root mean square over the nodes.
  double empirical_norm() const;

  GridFunction operator+(const GridFunction& other) const;
  GridFunction operator-(const GridFunction& other) const;
  GridFunction operator*(double c) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

double sup_distance(const GridFunction& a, const GridFunction& b);
double l2_distance(const GridFunction& a, const GridFunction& b);

enum class NormKind { Sup, L2 };

double norm_of(const GridFunction& f, NormKind kind);
const char* to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& text);

}  // namespace gplab
