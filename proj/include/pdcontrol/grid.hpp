#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "pdcontrol/errors.hpp"

namespace pdc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

/// Uniform discretization of the unit interval/square, optionally times (0, T].
///
/// Only interior nodes are represented; homogeneous Dirichlet values on the
/// boundary are implicit. A time-dependent grid carries the levels
/// t_n = n * tau for n = 1..n_time_steps (the initial level is data, not unknown).
struct Grid
{
  int dim = 1;
  int n_cells = 2;      // per axis
  int n_time_steps = 0; // 0 = stationary
  double final_time = 1.0;

  Grid() = default;
  Grid(int dim_, int n_cells_, int n_time_steps_ = 0, double final_time_ = 1.0)
    : dim(dim_), n_cells(n_cells_), n_time_steps(n_time_steps_), final_time(final_time_)
  {
    if (dim != 1 && dim != 2)
      throw InvalidGrid("grid dimension must be 1 or 2, got " + std::to_string(dim));
    if (n_cells < 1)
      throw InvalidGrid("grid needs at least one cell per axis");
    if (n_time_steps < 0)
      throw InvalidGrid("negative number of time steps");
    if (!(final_time > 0.0))
      throw InvalidGrid("final time must be positive");
  }

  double h() const { return 1.0 / n_cells; }
  double tau() const { return time_dependent() ? final_time / n_time_steps : 0.0; }
  bool time_dependent() const { return n_time_steps > 0; }

  Index nodes_per_axis() const { return n_cells - 1; }
  Index spatial_size() const { return dim == 1 ? nodes_per_axis() : nodes_per_axis() * nodes_per_axis(); }
  Index time_levels() const { return time_dependent() ? n_time_steps : 1; }
  Index size() const { return spatial_size() * time_levels(); }

  /// Quadrature weight of one node in the discrete L2 inner product.
  double weight() const
  {
    double w = dim == 1 ? h() : h() * h();
    return time_dependent() ? w * tau() : w;
  }

  Grid spatial() const { return Grid(dim, n_cells); }

  double coord(Index i) const { return static_cast<double>(i + 1) * h(); }
  /// Time of level n (0-based): t_{n+1}.
  double time(Index n) const { return static_cast<double>(n + 1) * tau(); }

  bool operator==(const Grid& o) const
  {
    return dim == o.dim && n_cells == o.n_cells && n_time_steps == o.n_time_steps &&
           final_time == o.final_time;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  std::string describe() const
  {
    std::string s = std::to_string(dim) + "D, " + std::to_string(n_cells) + " cells";
    if (time_dependent())
      s += ", " + std::to_string(n_time_steps) + " steps";
    return s;
  }
};

/// Coordinates of a node, x2 = 0 in 1D and t = 0 on stationary grids.
struct Point
{
  double x1 = 0.0;
  double x2 = 0.0;
  double t = 0.0;
};

/// A discrete function over the interior nodes of a grid.
///
/// Ordering is time-major, then row-major in space (x1 runs fastest).
class Field
{
public:
  Field() = default;

  explicit Field(const Grid& grid)
    : grid_(grid), values_(Vector::Zero(grid.size()))
  {}

  Field(const Grid& grid, Vector values)
    : grid_(grid), values_(std::move(values))
  {
    if (values_.size() != grid_.size())
      throw ShapeError("field has " + std::to_string(values_.size()) + " values, grid expects " +
                       std::to_string(grid_.size()));
  }

  static Field constant(const Grid& grid, double c)
  {
    return Field(grid, Vector::Constant(grid.size(), c));
  }

  /// Samples fn(Point) at every interior node.
  template <typename Fn>
  static Field sample(const Grid& grid, Fn&& fn)
  {
    Field out(grid);
    const Index ns = grid.spatial_size();
    const Index n1 = grid.nodes_per_axis();
    for (Index n = 0; n < grid.time_levels(); ++n) {
      const double t = grid.time_dependent() ? grid.time(n) : 0.0;
      for (Index k = 0; k < ns; ++k) {
        Point p;
        p.t = t;
        if (grid.dim == 1) {
          p.x1 = grid.coord(k);
        } else {
          p.x1 = grid.coord(k % n1);
          p.x2 = grid.coord(k / n1);
        }
        out.values_[n * ns + k] = fn(p);
      }
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Index size() const { return values_.size(); }

  double operator[](Index i) const { return values_[i]; }
  double& operator[](Index i) { return values_[i]; }

  /// Spatial slice at time level n.
  auto slice(Index n) const { return values_.segment(n * grid_.spatial_size(), grid_.spatial_size()); }
  auto slice(Index n) { return values_.segment(n * grid_.spatial_size(), grid_.spatial_size()); }

  Field& operator+=(const Field& o)
  {
    require_same(o);
    values_ += o.values_;
    return *this;
  }
  Field& operator-=(const Field& o)
  {
    require_same(o);
    values_ -= o.values_;
    return *this;
  }
  Field& operator*=(double a)
  {
    values_ *= a;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double a, Field b) { return b *= a; }
  friend Field operator*(Field b, double a) { return b *= a; }
  friend Field operator-(Field a) { return a *= -1.0; }

  void require_same(const Field& o) const
  {
    if (grid_ != o.grid_ || values_.size() != o.values_.size())
      throw ShapeError("field grids differ: " + grid_.describe() + " vs " + o.grid_.describe());
  }

private:
  Grid grid_;
  Vector values_;
};

/// Weighted discrete L2 inner product: sum_i w a_i b_i.
inline double inner(const Field& a, const Field& b)
{
  a.require_same(b);
  return a.grid().weight() * a.values().dot(b.values());
}

inline double norm(const Field& a) { return std::sqrt(inner(a, a)); }

/// Weighted discrete L1 norm.
inline double norm_l1(const Field& a) { return a.grid().weight() * a.values().lpNorm<1>(); }

} // namespace pdc
