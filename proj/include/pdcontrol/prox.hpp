#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/grid.hpp"

namespace pdc {

/// Indicator of {a <= u <= b}.
struct BoxIndicator
{
  double a = -0.5;
  double b = 0.5;
};

/// mu * ||u||_1 plus the indicator of {a <= u <= b}, with a < 0 < b.
struct L1Box
{
  double mu = 0.0;
  double a = -1.0;
  double b = 1.0;
};

using Regularizer = std::variant<BoxIndicator, L1Box>;

inline void validate(const Regularizer& reg)
{
  std::visit(
    [](const auto& r) {
      using T = std::decay_t<decltype(r)>;
      if (!(r.a < r.b))
        throw InvalidParameter("box bounds need a < b");
      if constexpr (std::is_same_v<T, L1Box>) {
        if (!(r.a < 0.0 && 0.0 < r.b))
          throw InvalidParameter("sparse box bounds need a < 0 < b");
        if (r.mu < 0.0)
          throw InvalidParameter("L1 weight must be nonnegative");
      }
    },
    reg);
}

inline double l1_weight(const Regularizer& reg)
{
  if (const auto* r = std::get_if<L1Box>(&reg))
    return r->mu;
  return 0.0;
}

namespace scalar {

inline double clamp(double v, double a, double b) { return std::max(a, std::min(v, b)); }

// sgn(0) = 0
inline double shrink(double v, double zeta)
{
  const double m = std::abs(v) - zeta;
  if (m <= 0.0)
    return 0.0;
  return v > 0.0 ? m : -m;
}

} // namespace scalar

inline Field project_box(Field v, double a, double b)
{
  if (!(a < b))
    throw InvalidParameter("projection bounds need a < b");
  v.values() = v.values().cwiseMax(a).cwiseMin(b);
  return v;
}

inline Field shrink(Field v, double zeta)
{
  if (zeta < 0.0)
    throw InvalidParameter("shrinkage threshold must be nonnegative");
  for (Index i = 0; i < v.size(); ++i)
    v[i] = scalar::shrink(v[i], zeta);
  return v;
}

/// argmin_u (alpha/2)|u|^2 + I_[a,b](u) + (S*p, u) + |u - u_prev|^2/(2r)
inline Field prox_primal_box(const Field& u_prev, const Field& sstar_p, double r, double alpha, double a, double b)
{
  if (!(r > 0.0) || alpha < 0.0)
    throw InvalidParameter("primal step needs r > 0 and alpha >= 0");
  Field v = sstar_p - (1.0 / r) * u_prev;
  v *= -1.0 / (alpha + 1.0 / r);
  return project_box(std::move(v), a, b);
}

/// Same subproblem with the additional term mu*|u|_1.
inline Field prox_primal_l1_box(const Field& u_prev, const Field& sstar_p, double r, double alpha, double mu,
                                double a, double b)
{
  if (!(r > 0.0) || alpha < 0.0 || mu < 0.0)
    throw InvalidParameter("primal step needs r > 0, alpha >= 0 and mu >= 0");
  validate(L1Box{mu, a, b});
  const double denom = alpha * r + 1.0;
  Field v = (1.0 / denom) * (u_prev - r * sstar_p);
  return project_box(shrink(std::move(v), mu * r / denom), a, b);
}

/// Dispatches the primal prox on the regularizer kind.
inline Field prox_primal(const Regularizer& reg, const Field& u_prev, const Field& sstar_p, double r, double alpha)
{
  return std::visit(
    [&](const auto& g) -> Field {
      using T = std::decay_t<decltype(g)>;
      if constexpr (std::is_same_v<T, BoxIndicator>)
        return prox_primal_box(u_prev, sstar_p, r, alpha, g.a, g.b);
      else
        return prox_primal_l1_box(u_prev, sstar_p, r, alpha, g.mu, g.a, g.b);
    },
    reg);
}

/// Pointwise minimizer of (alpha/2)|u|^2 + theta(u) + (S*p, u), i.e. the limit r -> inf.
inline Field pointwise_minimizer(const Regularizer& reg, const Field& sstar_p, double alpha)
{
  if (!(alpha > 0.0))
    throw InvalidParameter("pointwise minimizer needs alpha > 0");
  Field v = (-1.0 / alpha) * sstar_p;
  if (const auto* g = std::get_if<L1Box>(&reg))
    return project_box(shrink(std::move(v), g->mu / alpha), g->a, g->b);
  const auto& g = std::get<BoxIndicator>(reg);
  return project_box(std::move(v), g.a, g.b);
}

/// Maximizer of (p, Sy) - f*(p) - |p - p_prev|^2/(2s) with f*(p) = |p|^2/2 + (p, y_d).
/// `sy` must already contain the affine offset.
inline Field dual_update(const Field& sy, const Field& p_prev, const Field& y_d, double s)
{
  if (!(s > 0.0))
    throw InvalidParameter("dual step must be positive");
  Field p = sy + (1.0 / s) * p_prev - y_d;
  p *= 1.0 / (1.0 + 1.0 / s);
  return p;
}

/// prox(w, step) = argmin_v phi(v) + |v - w|^2 / (2 step)
using ProxMap = std::function<Field(const Field&, double)>;

/// Defect of the scaled Moreau decomposition
///   w = prox_{s phi}(w) + s * prox_{phi*/s}(w/s).
/// Only used to check conjugate prox pairs in tests.
inline double moreau_check(const Field& w, double s, const ProxMap& prox_f, const ProxMap& prox_fstar)
{
  Field rebuilt = prox_f(w, s) + s * prox_fstar((1.0 / s) * w, 1.0 / s);
  return norm(w - rebuilt);
}

} // namespace pdc
