#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pdcontrol/errors.hpp"

namespace pdc::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Fully connected net, tanh on hidden layers, identity on the output layer.
/// weights[l] is (widths[l+1] x widths[l]); a batch is one sample per row.
struct MLP
{
  std::vector<int> widths;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  MLP() = default;

  explicit MLP(std::vector<int> widths_) : widths(std::move(widths_))
  {
    if (widths.size() < 2)
      throw InvalidParameter("MLP needs at least an input and an output width");
    for (int w : widths)
      if (w < 1)
        throw InvalidParameter("MLP widths must be positive");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      weights.push_back(Matrix::Zero(widths[l + 1], widths[l]));
      biases.push_back(Vector::Zero(widths[l + 1]));
    }
  }

  int layers() const { return static_cast<int>(weights.size()); }
  int in_dim() const { return widths.front(); }
  int out_dim() const { return widths.back(); }

  Eigen::Index parameter_count() const
  {
    Eigen::Index n = 0;
    for (int l = 0; l < layers(); ++l)
      n += weights[l].size() + biases[l].size();
    return n;
  }

  void check() const
  {
    if (weights.size() + 1 != widths.size() || biases.size() != weights.size())
      throw ShapeError("MLP layer lists do not match its widths");
    for (int l = 0; l < layers(); ++l) {
      if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] || biases[l].size() != widths[l + 1])
        throw ShapeError("MLP layer " + std::to_string(l) + " has the wrong shape");
      if (!weights[l].allFinite() || !biases[l].allFinite())
        throw InvalidParameter("MLP layer " + std::to_string(l) + " has non-finite parameters");
    }
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  template <class Rng>
  void initialize(Rng& rng)
  {
    for (int l = 0; l < layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index j = 0; j < weights[l].cols(); ++j)
        for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
          weights[l](i, j) = dist(rng);
      for (Eigen::Index i = 0; i < biases[l].size(); ++i)
        biases[l](i) = dist(rng);
    }
  }

  Matrix forward(const Matrix& x) const
  {
    if (x.cols() != in_dim())
      throw ShapeError("MLP input has " + std::to_string(x.cols()) + " columns, expected " +
                       std::to_string(in_dim()));
    Matrix a = x;
    for (int l = 0; l < layers(); ++l) {
      Matrix z = a * weights[l].transpose();
      z.rowwise() += biases[l].transpose();
      a = l + 1 < layers() ? Matrix(z.array().tanh()) : std::move(z);
    }
    return a;
  }
};

/// Activations kept for the backward pass; acts[0] is the input.
struct MLPCache
{
  std::vector<Matrix> acts;
};

inline Matrix forward(const MLP& net, const Matrix& x, MLPCache& cache)
{
  if (x.cols() != net.in_dim())
    throw ShapeError("MLP input has wrong width");
  cache.acts.clear();
  cache.acts.push_back(x);
  for (int l = 0; l < net.layers(); ++l) {
    Matrix z = cache.acts.back() * net.weights[l].transpose();
    z.rowwise() += net.biases[l].transpose();
    if (l + 1 < net.layers())
      z = z.array().tanh();
    cache.acts.push_back(std::move(z));
  }
  return cache.acts.back();
}

struct MLPGrad
{
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Reverse pass given dL/d(output) for the cached batch.
inline MLPGrad backward(const MLP& net, const MLPCache& cache, Matrix d_out)
{
  MLPGrad g;
  g.weights.resize(net.layers());
  g.biases.resize(net.layers());
  Matrix delta = std::move(d_out);
  for (int l = net.layers() - 1; l >= 0; --l) {
    if (l + 1 < net.layers())
      delta.array() *= 1.0 - cache.acts[l + 1].array().square();
    g.weights[l] = delta.transpose() * cache.acts[l];
    g.biases[l] = delta.colwise().sum().transpose();
    if (l > 0)
      delta = delta * net.weights[l];
  }
  return g;
}

} // namespace pdc::nn
