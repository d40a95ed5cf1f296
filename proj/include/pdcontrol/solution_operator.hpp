#pragma once

#include <functional>
#include <string>
#include <utility>

#include "pdcontrol/grid.hpp"

namespace pdc {

/// The affine control-to-state map u -> S u + y_f of a discretized state equation.
///
/// S acts on fields over `grid()` and maps into the same grid (distributed
/// control on the whole domain). apply_adjoint is the adjoint with respect to
/// the weighted inner product. Instances are immutable apart from the cached
/// norm estimate and may be shared across threads once that is set.
class SolutionOperator
{
public:
  using Map = std::function<Field(const Field&)>;

  SolutionOperator(Grid grid, Map linear, Map adjoint, Field offset, int pde_solves_per_apply = 1)
    : grid_(std::move(grid))
    , linear_(std::move(linear))
    , adjoint_(std::move(adjoint))
    , offset_(std::move(offset))
    , solves_per_apply_(pde_solves_per_apply)
  {
    offset_.require_same(Field(grid_));
  }

  const Grid& grid() const { return grid_; }

  Field apply_linear(const Field& u) const
  {
    u.require_same(offset_);
    return linear_(u);
  }

  Field apply_adjoint(const Field& p) const
  {
    p.require_same(offset_);
    return adjoint_(p);
  }

  /// S u + y_f. Surrogates may evaluate this jointly instead of by superposition.
  Field apply_affine(const Field& u) const
  {
    u.require_same(offset_);
    if (affine_)
      return affine_(u);
    return linear_(u) + offset_;
  }

  void set_affine(Map affine) { affine_ = std::move(affine); }

  const Field& offset() const { return offset_; }

  double norm_estimate() const { return norm_estimate_; }
  void set_norm_estimate(double value) { norm_estimate_ = value; }

  /// PDE solves charged per apply_* call: 1 for discrete solvers, 0 for surrogates.
  int pde_solves_per_apply() const { return solves_per_apply_; }

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

private:
  Grid grid_;
  Map linear_;
  Map adjoint_;
  Map affine_;
  Field offset_;
  double norm_estimate_ = 0.0;
  int solves_per_apply_ = 1;
  std::string label_;
};

} // namespace pdc
