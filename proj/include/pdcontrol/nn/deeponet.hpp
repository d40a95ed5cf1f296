#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "pdcontrol/nn/mlp.hpp"

namespace pdc::nn {

enum class BoundaryFactor { None, XTimesXMinusOne };

inline std::string to_string(BoundaryFactor b)
{
  return b == BoundaryFactor::None ? "none" : "x(x-1)";
}

inline BoundaryFactor parse_boundary(const std::string& s)
{
  if (s == "none")
    return BoundaryFactor::None;
  if (s == "x(x-1)")
    return BoundaryFactor::XTimesXMinusOne;
  throw ConfigurationError("unknown boundary factor '" + s + "'");
}

inline double boundary_weight(BoundaryFactor b, double z)
{
  return b == BoundaryFactor::None ? 1.0 : z * (z - 1.0);
}

/// Elliptic problem -nu y'' + c y = u the net was trained for; tau > 0 marks a per-step net.
struct OperatorTag
{
  double nu = 1.0;
  double c = 0.0;
  double tau = 0.0;
  int n_cells = 64;
};

struct TrainingMeta
{
  std::uint64_t seed = 0;
  int iterations = 0;
  double final_loss = 0.0;
  int n_functions = 0;
};

/// Unstacked DeepONet: G(u)(z) = (sum_i b_i(u) t_i(z) + b0) * w(z).
struct OperatorNet
{
  MLP branch;
  MLP trunk;
  double b0 = 0.0;
  Vector sensors;
  BoundaryFactor boundary = BoundaryFactor::None;
  // RMS sensor amplitude of the training inputs; 0 disables input rescaling.
  double input_scale = 0.0;
  OperatorTag op;
  TrainingMeta meta;

  int n() const { return branch.out_dim(); }
  int m() const { return static_cast<int>(sensors.size()); }

  void check() const
  {
    branch.check();
    trunk.check();
    if (branch.out_dim() != trunk.out_dim())
      throw ShapeError("branch and trunk output widths differ");
    if (branch.in_dim() != m())
      throw ShapeError("branch input width must equal the number of sensors");
    if (!std::isfinite(b0) || !(input_scale >= 0.0))
      throw InvalidParameter("invalid scalar parameters in operator net");
  }

  Eigen::Index parameter_count() const { return branch.parameter_count() + trunk.parameter_count() + 1; }
};

/// Paper-shaped net: branch m -> w -> w -> n, trunk dim -> w -> w -> n.
template <class Rng>
OperatorNet make_operator_net(const Vector& sensors, int width, int n, int hidden_layers, int coord_dim,
                              BoundaryFactor boundary, Rng& rng)
{
  std::vector<int> bw{static_cast<int>(sensors.size())};
  std::vector<int> tw{coord_dim};
  for (int i = 0; i < hidden_layers; ++i) {
    bw.push_back(width);
    tw.push_back(width);
  }
  bw.push_back(n);
  tw.push_back(n);
  OperatorNet net;
  net.branch = MLP(bw);
  net.trunk = MLP(tw);
  net.sensors = sensors;
  net.boundary = boundary;
  net.branch.initialize(rng);
  net.trunk.initialize(rng);
  net.b0 = 0.0;
  return net;
}

/// Predictions for a batch of inputs (rows of u, m columns) at query points z (rows).
inline Matrix predict(const OperatorNet& net, const Matrix& u, const Matrix& z)
{
  Matrix g = net.branch.forward(u) * net.trunk.forward(z).transpose();
  g.array() += net.b0;
  if (net.boundary != BoundaryFactor::None)
    for (Eigen::Index j = 0; j < z.rows(); ++j)
      g.col(j) *= boundary_weight(net.boundary, z(j, 0));
  return g;
}

inline double forward(const OperatorNet& net, const Vector& u_sensors, double z)
{
  Matrix zz(1, 1);
  zz(0, 0) = z;
  return predict(net, u_sensors.transpose(), zz)(0, 0);
}

/// Parameters flattened as branch (W, b per layer), trunk (W, b per layer), b0.
inline Vector flatten(const OperatorNet& net)
{
  Vector p(net.parameter_count());
  Eigen::Index k = 0;
  for (const MLP* mlp : {&net.branch, &net.trunk})
    for (int l = 0; l < mlp->layers(); ++l) {
      p.segment(k, mlp->weights[l].size()) = mlp->weights[l].reshaped();
      k += mlp->weights[l].size();
      p.segment(k, mlp->biases[l].size()) = mlp->biases[l];
      k += mlp->biases[l].size();
    }
  p(k) = net.b0;
  return p;
}

inline void unflatten(OperatorNet& net, const Vector& p)
{
  if (p.size() != net.parameter_count())
    throw ShapeError("parameter vector has wrong length");
  Eigen::Index k = 0;
  for (MLP* mlp : {&net.branch, &net.trunk})
    for (int l = 0; l < mlp->layers(); ++l) {
      mlp->weights[l].reshaped() = p.segment(k, mlp->weights[l].size());
      k += mlp->weights[l].size();
      mlp->biases[l] = p.segment(k, mlp->biases[l].size());
      k += mlp->biases[l].size();
    }
  net.b0 = p(k);
}

/// Operator-regression data: inputs at the sensors, shared query points, targets G(u_i)(z_j).
struct TrainingSet
{
  Matrix inputs;  // N1 x m
  Matrix points;  // N2 x coord_dim
  Matrix targets; // N1 x N2

  Eigen::Index n_functions() const { return inputs.rows(); }
  Eigen::Index n_points() const { return points.rows(); }
  Eigen::Index size() const { return targets.size(); }

  void check() const
  {
    if (targets.rows() != inputs.rows() || targets.cols() != points.rows())
      throw ShapeError("training targets must be N1 x N2");
    if (!inputs.allFinite() || !targets.allFinite() || !points.allFinite())
      throw InvalidParameter("training set has non-finite values");
  }
};

/// Mean squared error over all N1*N2 triplets.
inline double loss(const OperatorNet& net, const TrainingSet& data)
{
  if (data.size() == 0)
    throw InvalidParameter("loss of an empty batch");
  data.check();
  return (predict(net, data.inputs, data.points) - data.targets).squaredNorm() / static_cast<double>(data.size());
}

struct LossAndGrad
{
  double loss = 0.0;
  Vector grad; // flatten() layout
};

/// Loss and its exact gradient by reverse-mode differentiation.
inline LossAndGrad loss_and_grad(const OperatorNet& net, const TrainingSet& data)
{
  if (data.size() == 0)
    throw InvalidParameter("gradient of an empty batch");
  MLPCache bc, tc;
  const Matrix b = forward(net.branch, data.inputs, bc);
  const Matrix t = forward(net.trunk, data.points, tc);
  Vector w = Vector::Ones(data.n_points());
  if (net.boundary != BoundaryFactor::None)
    for (Eigen::Index j = 0; j < w.size(); ++j)
      w(j) = boundary_weight(net.boundary, data.points(j, 0));

  Matrix g = b * t.transpose();
  g.array() += net.b0;
  const Matrix resid = g * w.asDiagonal() - data.targets;
  const double scale = 1.0 / static_cast<double>(data.size());

  LossAndGrad out;
  out.loss = resid.squaredNorm() * scale;
  const Matrix dg = (2.0 * scale) * (resid * w.asDiagonal());
  const MLPGrad gb = backward(net.branch, bc, dg * t);
  const MLPGrad gt = backward(net.trunk, tc, dg.transpose() * b);

  out.grad.resize(net.parameter_count());
  Eigen::Index k = 0;
  for (const MLPGrad* mg : {&gb, &gt})
    for (std::size_t l = 0; l < mg->weights.size(); ++l) {
      out.grad.segment(k, mg->weights[l].size()) = mg->weights[l].reshaped();
      k += mg->weights[l].size();
      out.grad.segment(k, mg->biases[l].size()) = mg->biases[l];
      k += mg->biases[l].size();
    }
  out.grad(k) = dg.sum();
  return out;
}

inline Vector grad(const OperatorNet& net, const TrainingSet& data) { return loss_and_grad(net, data).grad; }

} // namespace pdc::nn
