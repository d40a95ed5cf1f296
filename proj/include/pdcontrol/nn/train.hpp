#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "pdcontrol/nn/deeponet.hpp"
#include "pdcontrol/nn/grf.hpp"
#include "pdcontrol/solution_operator.hpp"

namespace pdc::nn {

/// N1 GRF draws on the grid of `op` (1D, stationary); sensors and query points are the
/// n_cells + 1 grid nodes, so N2 must equal n_cells + 1.
inline TrainingSet generate_dataset(const SolutionOperator& op, int n1, int n2, std::uint64_t seed)
{
  const Grid& grid = op.grid();
  if (grid.dim != 1 || grid.time_dependent())
    throw ShapeError("datasets are generated for 1D stationary operators");
  if (n1 < 1)
    throw InvalidParameter("need at least one input function");
  if (n2 != grid.n_cells + 1)
    throw ShapeError("N2 must equal the number of grid nodes (" + std::to_string(grid.n_cells + 1) + ")");
  TrainingSet data;
  data.inputs.resize(n1, n2);
  data.targets.resize(n1, n2);
  data.points.resize(n2, 1);
  for (int j = 0; j < n2; ++j)
    data.points(j, 0) = static_cast<double>(j) / grid.n_cells;
  for (int i = 0; i < n1; ++i) {
    const Field u = sample_grf(derive_seed(seed, static_cast<std::uint64_t>(i)), n2);
    data.inputs.row(i) = with_boundary(u).transpose();
    data.targets.row(i) = with_boundary(op.apply_linear(u)).transpose();
  }
  return data;
}

struct AdamState
{
  Vector m;
  Vector v;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_size(Eigen::Index n, double lr = 1e-3)
  {
    AdamState s;
    s.m = Vector::Zero(n);
    s.v = Vector::Zero(n);
    s.lr = lr;
    return s;
  }
};

/// Bias-corrected Adam update.
inline Vector adam_step(const Vector& params, const Vector& grads, AdamState& state)
{
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw ShapeError("Adam state, parameters and gradients must have the same length");
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const Vector m_hat = state.m / c1;
  const Vector v_hat = state.v / c2;
  return params - state.lr * (m_hat.array() / (v_hat.array().sqrt() + state.eps)).matrix();
}

struct NetConfig
{
  int width = 20;
  int basis = 20;
  int hidden_layers = 2;
  BoundaryFactor boundary = BoundaryFactor::XTimesXMinusOne;
};

struct TrainConfig
{
  NetConfig net;
  int iterations = 20000;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  int record_every = 1;
  std::function<void(int, double)> progress; // called with (iteration, loss) every record_every steps
};

struct TrainResult
{
  OperatorNet net;
  std::vector<double> loss_curve; // loss before each recorded update
};

inline double rms_input(const TrainingSet& data)
{
  return std::sqrt(data.inputs.squaredNorm() / static_cast<double>(data.inputs.size()));
}

/// Full-batch Adam on the mean squared error.
inline TrainResult train(const TrainingSet& data, const TrainConfig& config)
{
  data.check();
  if (data.size() == 0)
    throw InvalidParameter("cannot train on an empty dataset");
  if (config.iterations < 0 || !(config.lr > 0.0))
    throw InvalidParameter("training needs iterations >= 0 and lr > 0");
  std::mt19937_64 rng(config.seed);
  const Vector sensors = data.points.col(0);
  TrainResult res;
  res.net = make_operator_net(sensors, config.net.width, config.net.basis, config.net.hidden_layers,
                              static_cast<int>(data.points.cols()), config.net.boundary, rng);
  res.net.input_scale = rms_input(data);

  Vector params = flatten(res.net);
  AdamState adam = AdamState::for_size(params.size(), config.lr);
  const int every = std::max(1, config.record_every);
  for (int it = 0; it < config.iterations; ++it) {
    const LossAndGrad lg = loss_and_grad(res.net, data);
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite())
      throw TrainingDiverged("training loss became non-finite", it);
    if (it % every == 0) {
      res.loss_curve.push_back(lg.loss);
      if (config.progress)
        config.progress(it, lg.loss);
    }
    params = adam_step(params, lg.grad, adam);
    unflatten(res.net, params);
  }
  const double final_loss = loss(res.net, data);
  if (!std::isfinite(final_loss))
    throw TrainingDiverged("training loss became non-finite", config.iterations);
  res.net.meta.seed = config.seed;
  res.net.meta.iterations = config.iterations;
  res.net.meta.final_loss = final_loss;
  res.net.meta.n_functions = static_cast<int>(data.n_functions());
  return res;
}

} // namespace pdc::nn
