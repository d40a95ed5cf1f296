#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/grid.hpp"
#include "pdcontrol/nn/mlp.hpp"

namespace pdc::nn {

/// splitmix64 finalizer; derives independent per-draw seeds from a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Karhunen-Loeve weight of mode k for the covariance 49^2 (-Laplace + 49 I)^(-2.5) on (0,1).
inline double grf_sigma(int k)
{
  const double kp = k * std::numbers::pi;
  return 49.0 * std::pow(kp * kp + 49.0, -1.25);
}

/// Standard normal KL coefficients xi_1..xi_K for one draw.
inline Vector grf_coefficients(std::uint64_t seed, int modes)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector xi(modes);
  for (int k = 0; k < modes; ++k)
    xi(k) = normal(rng);
  return xi;
}

/// u at the n_points equi-spaced nodes of [0,1], endpoints set to exactly 0.
inline Vector sample_grf_nodes(std::uint64_t seed, int n_points)
{
  if (n_points < 3)
    throw InvalidParameter("GRF sampling needs at least 3 points");
  const int modes = n_points - 1;
  const Vector xi = grf_coefficients(seed, modes);
  Vector u = Vector::Zero(n_points);
  const double h = 1.0 / (n_points - 1);
  for (int i = 1; i + 1 < n_points; ++i) {
    const double x = i * h;
    double v = 0.0;
    for (int k = 1; k <= modes; ++k)
      v += grf_sigma(k) * xi(k - 1) * std::sqrt(2.0) * std::sin(k * std::numbers::pi * x);
    u(i) = v;
  }
  return u;
}

/// One draw as a field on the interior nodes of Grid(1, n_points - 1).
inline Field sample_grf(std::uint64_t seed, int n_points)
{
  const Vector nodes = sample_grf_nodes(seed, n_points);
  return Field(Grid(1, n_points - 1), nodes.segment(1, n_points - 2));
}

/// Interior field extended by the zero boundary values, i.e. the sensor vector.
inline Vector with_boundary(const Field& u)
{
  if (u.grid().dim != 1 || u.grid().time_dependent())
    throw ShapeError("sensor vectors are defined for 1D stationary fields");
  Vector v = Vector::Zero(u.size() + 2);
  v.segment(1, u.size()) = u.values();
  return v;
}

} // namespace pdc::nn
