#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/nn/deeponet.hpp"
#include "pdcontrol/nn/grf.hpp"
#include "pdcontrol/solution_operator.hpp"

namespace pdc::nn {

/// Trained net evaluated on its own sensor grid, trunk basis precomputed.
///
/// With input_scale > 0 the map is made positively homogeneous:
/// N(v) = c * G(v / c), c = rms(v) / input_scale, so inputs of any amplitude
/// are brought back to the range seen in training.
class SurrogateKernel
{
public:
  explicit SurrogateKernel(std::shared_ptr<const OperatorNet> net) : net_(std::move(net))
  {
    if (!net_)
      throw InvalidOperator("surrogate kernel needs a network");
    net_->check();
    const Matrix z = net_->sensors;
    w_ = Vector::Ones(net_->m());
    for (int j = 0; j < net_->m(); ++j)
      w_(j) = boundary_weight(net_->boundary, net_->sensors(j));
    basis_ = w_.asDiagonal() * net_->trunk.forward(z);
  }

  const OperatorNet& net() const { return *net_; }
  int m() const { return net_->m(); }

  /// Output at the m sensor nodes for input values at the same nodes.
  Vector operator()(const Vector& v) const
  {
    if (v.size() != m())
      throw ShapeError("surrogate input has " + std::to_string(v.size()) + " values, expected " +
                       std::to_string(m()));
    double c = 1.0;
    if (net_->input_scale > 0.0) {
      const double rms = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
      if (rms == 0.0)
        return Vector::Zero(m());
      c = rms / net_->input_scale;
    }
    const Vector b = net_->branch.forward((v / c).transpose()).transpose();
    return c * (basis_ * b + net_->b0 * w_);
  }

  /// Interior-node field in, interior-node field out.
  Field apply(const Field& u) const
  {
    Vector out = (*this)(with_boundary(u));
    return Field(u.grid(), out.segment(1, u.size()));
  }

  void require_grid(const Grid& grid) const
  {
    if (grid.dim != 1)
      throw ShapeError("DeepONet surrogates are 1D");
    if (grid.n_cells + 1 != m())
      throw ShapeError("grid has " + std::to_string(grid.n_cells + 1) + " nodes but the net has " +
                       std::to_string(m()) + " sensors");
  }

private:
  std::shared_ptr<const OperatorNet> net_;
  Matrix basis_;
  Vector w_;
};

/// S u + y_f ~ N(u + f) on a stationary 1D grid; the adjoint uses the same net
/// (self-adjoint elliptic operator). No PDE solves are charged.
inline SolutionOperator as_solution_operator(std::shared_ptr<const OperatorNet> net, const Grid& grid,
                                             const std::optional<Field>& f = std::nullopt,
                                             double norm_estimate = 0.0)
{
  auto kernel = std::make_shared<const SurrogateKernel>(std::move(net));
  kernel->require_grid(grid);
  if (grid.time_dependent())
    throw ShapeError("elliptic surrogate needs a stationary grid");
  Field source(grid);
  if (f) {
    f->require_same(source);
    source = *f;
  }
  auto apply = [kernel](const Field& u) { return kernel->apply(u); };
  SolutionOperator op(grid, apply, apply, kernel->apply(source), 0);
  op.set_affine([kernel, source](const Field& u) { return kernel->apply(u + source); });
  op.set_norm_estimate(norm_estimate);
  op.set_label("deeponet");
  return op;
}

namespace detail {

inline void require_tau(const OperatorNet& net, double tau)
{
  if (!(net.op.tau > 0.0))
    throw ConfigurationError("network was not trained as a time-step operator");
  if (std::abs(net.op.tau - tau) > 1e-12 * tau)
    throw ConfigurationError("network trained for tau = " + std::to_string(net.op.tau) + ", grid has tau = " +
                             std::to_string(tau));
}

inline Field march_forward(const SurrogateKernel& k, const Field& source, const Field& y0, double tau)
{
  Field y(source.grid());
  Field prev = y0;
  const Grid space = source.grid().spatial();
  for (Index n = 0; n < source.grid().time_levels(); ++n) {
    Field rhs(space, prev.values() + tau * source.slice(n));
    prev = k.apply(rhs);
    y.slice(n) = prev.values();
  }
  return y;
}

inline Field march_backward(const SurrogateKernel& k, const Field& p, double tau)
{
  Field q(p.grid());
  const Grid space = p.grid().spatial();
  Field next(space);
  for (Index n = p.grid().time_levels() - 1; n >= 0; --n) {
    Field rhs(space, next.values() + tau * p.slice(n));
    next = k.apply(rhs);
    q.slice(n) = next.values();
  }
  return q;
}

} // namespace detail

/// y_n = N(tau (f_n + u_n) + y_{n-1}), y_0 = phi, one surrogate call per step.
inline Field surrogate_parabolic_march(std::shared_ptr<const OperatorNet> net, const Field& u,
                                       const std::optional<Field>& f, double tau,
                                       const std::optional<Field>& phi = std::nullopt)
{
  SurrogateKernel k(std::move(net));
  k.require_grid(u.grid());
  if (!u.grid().time_dependent())
    throw ShapeError("parabolic march needs a space-time field");
  if (std::abs(u.grid().tau() - tau) > 1e-12 * tau)
    throw ConfigurationError("tau does not match the grid");
  detail::require_tau(k.net(), tau);
  Field source = u;
  if (f)
    source += *f;
  Field y0(u.grid().spatial());
  if (phi) {
    phi->require_same(y0);
    y0 = *phi;
  }
  return detail::march_forward(k, source, y0, tau);
}

/// Space-time surrogate for the backward-Euler heat equation built from a per-step net.
inline SolutionOperator surrogate_parabolic_operator(std::shared_ptr<const OperatorNet> net, const Grid& grid,
                                                     const std::optional<Field>& f = std::nullopt,
                                                     const std::optional<Field>& phi = std::nullopt,
                                                     double norm_estimate = 0.0)
{
  auto kernel = std::make_shared<const SurrogateKernel>(std::move(net));
  kernel->require_grid(grid);
  if (!grid.time_dependent())
    throw ShapeError("parabolic surrogate needs a space-time grid");
  const double tau = grid.tau();
  detail::require_tau(kernel->net(), tau);
  const Grid space = grid.spatial();
  Field source(grid);
  if (f) {
    f->require_same(source);
    source = *f;
  }
  Field y0(space);
  if (phi) {
    phi->require_same(y0);
    y0 = *phi;
  }
  auto linear = [kernel, tau, space](const Field& u) { return detail::march_forward(*kernel, u, Field(space), tau); };
  auto adjoint = [kernel, tau](const Field& p) { return detail::march_backward(*kernel, p, tau); };
  SolutionOperator op(grid, linear, adjoint, detail::march_forward(*kernel, source, y0, tau), 0);
  op.set_affine([kernel, source, y0, tau](const Field& u) { return detail::march_forward(*kernel, u + source, y0, tau); });
  op.set_norm_estimate(norm_estimate);
  op.set_label("deeponet-parabolic");
  return op;
}

struct FidelityReport
{
  double mean_rel_error = 0.0;
  double max_rel_error = 0.0;
  int draws = 0;

  bool passes(double gate = 5e-2) const { return draws > 0 && mean_rel_error <= gate; }
};

/// Relative L2 error of the surrogate against `exact` (stationary 1D) on fresh GRF draws.
inline FidelityReport evaluate_fidelity(const OperatorNet& net, const SolutionOperator& exact, int draws = 100,
                                        std::uint64_t seed = 0x5eed0fULL)
{
  const SurrogateKernel k(std::make_shared<const OperatorNet>(net));
  k.require_grid(exact.grid());
  FidelityReport rep;
  rep.draws = draws;
  for (int i = 0; i < draws; ++i) {
    const Field u = sample_grf(derive_seed(seed, static_cast<std::uint64_t>(i)), k.m());
    const Field y = exact.apply_linear(u);
    const double den = norm(y);
    const double err = norm(k.apply(u) - y);
    const double rel = den > 0.0 ? err / den : err;
    rep.mean_rel_error += rel;
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
  }
  if (draws > 0)
    rep.mean_rel_error /= draws;
  return rep;
}

/// Throws unless the held-out mean relative error is within the gate.
inline void require_fidelity(const FidelityReport& rep, double gate = 5e-2)
{
  if (!rep.passes(gate))
    throw InvalidOperator("surrogate fails the fidelity gate: mean relative error " +
                          std::to_string(rep.mean_rel_error) + " > " + std::to_string(gate));
}

} // namespace pdc::nn
