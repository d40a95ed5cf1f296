#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/pd_solver.hpp"
#include "pdcontrol/pde_core.hpp"

namespace pdc::bench {

enum class Method { PDC, PDI, APD, PDONet };

inline std::string to_string(Method m, int apd_every = 1)
{
  switch (m) {
    case Method::PDC: return "PD-C";
    case Method::PDI: return "PD-I";
    case Method::APD: return "APD(" + std::to_string(apd_every) + ")";
    case Method::PDONet: return "PD-ONet";
  }
  return "?";
}

inline Method parse_method(const std::string& s, int* apd_every = nullptr)
{
  if (s == "PD-C" || s == "pd-c" || s == "pdc")
    return Method::PDC;
  if (s == "PD-I" || s == "pd-i" || s == "pdi")
    return Method::PDI;
  if (s == "PD-ONet" || s == "pd-onet" || s == "pdonet")
    return Method::PDONet;
  if (s.rfind("APD", 0) == 0 || s.rfind("apd", 0) == 0) {
    int every = 1;
    const auto open = s.find('(');
    if (open != std::string::npos)
      every = std::stoi(s.substr(open + 1));
    if (apd_every)
      *apd_every = every;
    return Method::APD;
  }
  throw ConfigurationError("unknown method '" + s + "'");
}

/// One experiment: which example, its parameters, the mesh and the method.
/// Unset optional parameters take the example's documented defaults.
struct ExampleSpec
{
  int id = 1;
  double alpha = 1e-3;
  std::optional<double> mu;
  std::optional<double> a;
  std::optional<double> b;
  double k_s = 0.2;
  double k_a = 1.0;
  double nu = 1.0;
  int n_cells = 64;
  std::optional<int> n_time_steps; // defaults to n_cells for parabolic examples
  Method method = Method::PDI;
  int apd_every = 1;
  std::optional<double> r;
  std::optional<double> s;
  double tol = 1e-5;
  int max_iter = 1000;
  std::uint64_t seed = 1;
  std::string model_path; // trained surrogate, PD-ONet only
  std::string label;

  bool parabolic() const { return id == 1 || id == 4; }
  int dim() const { return id <= 2 ? 2 : 1; }

  void validate() const
  {
    if (id < 1 || id > 4)
      throw ConfigurationError("example id must be 1..4");
    if (!(alpha > 0.0))
      throw ConfigurationError("alpha must be positive");
    if (n_cells < 2)
      throw ConfigurationError("need at least 2 cells per axis");
    if (!(tol > 0.0))
      throw ConfigurationError("tolerance must be positive");
    if (max_iter < 1)
      throw ConfigurationError("max_iter must be positive");
    if (method == Method::PDONet && (id == 1 || id == 2))
      throw ConfigurationError("PD-ONet is defined for the 1D examples 3 and 4 only");
    if (method == Method::PDONet && model_path.empty())
      throw ConfigurationError("PD-ONet needs a trained model (model_path)");
    if (id == 2 && mu && *mu < 0.0)
      throw ConfigurationError("mu must be nonnegative");
  }

  Grid grid() const
  {
    if (parabolic())
      return Grid(dim(), n_cells, n_time_steps.value_or(n_cells));
    return Grid(dim(), n_cells);
  }

  double lower() const { return a.value_or(id == 2 ? -30.0 : id == 4 ? -100.0 : -0.5); }
  double upper() const { return b.value_or(id == 2 ? 30.0 : id == 4 ? 100.0 : 0.5); }
};

/// Default (r, s) from the parameter tables of each example.
inline StepRule default_step_rule(const ExampleSpec& spec)
{
  double r = 4e3, s = 1e-1;
  const bool small_alpha = spec.alpha < 1e-4;
  switch (spec.method) {
    case Method::PDC:
      r = 4e3, s = 1e-1;
      break;
    case Method::PDI:
      if (small_alpha)
        r = 5.6e3, s = 1e-1;
      else
        r = 4e3, s = 4e-1;
      break;
    case Method::APD:
      if (small_alpha)
        r = 4e3, s = 1e-1;
      else
        r = 1e3, s = 4e-1;
      break;
    case Method::PDONet:
      break;
  }
  if (spec.id == 3)
    r = 2e3, s = 4e-1;
  if (spec.id == 4)
    r = 8e2, s = 4e-1;
  r = spec.r.value_or(r);
  s = spec.s.value_or(s);
  switch (spec.method) {
    case Method::PDC: return StepRule::classic(r, s);
    case Method::APD: return StepRule::apd(r, s, spec.apd_every);
    default: return StepRule::enlarged(r, s);
  }
}

/// Manufactured data shared by the exact-solver and surrogate variants of an example.
struct ExampleData
{
  Grid grid;
  Field y_d;
  std::optional<Field> f;
  std::optional<Field> phi; // spatial grid
  std::optional<ExactSolution> exact;
  Regularizer reg;
  EllipticProblem spatial;
};

namespace detail {

using std::numbers::pi;

inline ExampleData example1(const ExampleSpec& spec, const Grid& grid)
{
  const double al = spec.alpha, lo = spec.lower(), hi = spec.upper();
  auto s1 = [](const Point& p) { return std::sin(pi * p.x1) * std::sin(pi * p.x2); };
  auto s2 = [](const Point& p) { return std::sin(2 * pi * p.x1) * std::sin(2 * pi * p.x2); };
  auto u = [=](const Point& p) { return scalar::clamp(-(1 - p.t) * s2(p), lo, hi); };
  ExampleData d;
  d.grid = grid;
  d.spatial = {1.0, 0.0};
  d.reg = BoxIndicator{lo, hi};
  d.exact = ExactSolution{Field::sample(grid, u), Field::sample(grid, [=](const Point& p) { return (1 - p.t) * s1(p); }),
                          std::nullopt};
  d.f = Field::sample(grid, [=](const Point& p) { return -u(p) - s1(p) + 2 * pi * pi * (1 - p.t) * s1(p); });
  d.y_d = Field::sample(grid, [=](const Point& p) {
    return (1 - p.t) * s1(p) - al * s2(p) - 8 * pi * pi * al * (1 - p.t) * s2(p);
  });
  d.phi = Field::sample(grid.spatial(), s1);
  return d;
}

inline ExampleData example2(const ExampleSpec& spec, const Grid& grid)
{
  ExampleData d;
  d.grid = grid;
  d.spatial = {1.0, 0.0};
  d.reg = L1Box{spec.mu.value_or(5e-3), spec.lower(), spec.upper()};
  d.y_d = Field::sample(grid, [](const Point& p) {
    return std::exp(2 * p.x1) * std::sin(2 * pi * p.x1) * std::sin(2 * pi * p.x2) / 6.0;
  });
  return d;
}

inline ExampleData example3(const ExampleSpec& spec, const Grid& grid)
{
  const double al = spec.alpha, ks = spec.k_s, ka = spec.k_a, nu = spec.nu, lo = spec.lower(), hi = spec.upper();
  auto u = [=](const Point& p) { return scalar::clamp(-ka * std::sin(2 * pi * p.x1), lo, hi); };
  auto y = [=](const Point& p) { return ks * std::sin(pi * p.x1); };
  ExampleData d;
  d.grid = grid;
  d.spatial = {nu, 1.0};
  d.reg = BoxIndicator{lo, hi};
  d.exact = ExactSolution{Field::sample(grid, u), Field::sample(grid, y), std::nullopt};
  d.f = Field::sample(grid, [=](const Point& p) { return -u(p) + (nu * pi * pi + 1) * y(p); });
  d.y_d = Field::sample(grid, [=](const Point& p) {
    return y(p) - al * ka * (4 * pi * pi * nu + 1) * std::sin(2 * pi * p.x1);
  });
  return d;
}

inline ExampleData example4(const ExampleSpec& spec, const Grid& grid)
{
  const double al = spec.alpha, ks = spec.k_s, ka = spec.k_a, lo = spec.lower(), hi = spec.upper();
  const double T = grid.final_time;
  auto u = [=](const Point& p) { return scalar::clamp(-ka * (T - p.t) * std::sin(2 * pi * p.x1), lo, hi); };
  auto y = [=](const Point& p) { return ks * (std::exp(p.t) - 1) * std::sin(pi * p.x1); };
  ExampleData d;
  d.grid = grid;
  d.spatial = {1.0, 0.0};
  d.reg = BoxIndicator{lo, hi};
  d.exact = ExactSolution{Field::sample(grid, u), Field::sample(grid, y), std::nullopt};
  d.f = Field::sample(grid, [=](const Point& p) {
    return -u(p) + ks * std::exp(p.t) * std::sin(pi * p.x1) + pi * pi * y(p);
  });
  d.y_d = Field::sample(grid, [=](const Point& p) {
    return y(p) - al * ka * std::sin(2 * pi * p.x1) - 4 * pi * pi * al * ka * (T - p.t) * std::sin(2 * pi * p.x1);
  });
  d.phi = Field(grid.spatial());
  return d;
}

} // namespace detail

/// Grid, target, source terms, regularizer and manufactured solution of an example.
inline ExampleData example_data(const ExampleSpec& spec)
{
  spec.validate();
  const Grid grid = spec.grid();
  switch (spec.id) {
    case 1: return detail::example1(spec, grid);
    case 2: return detail::example2(spec, grid);
    case 3: return detail::example3(spec, grid);
    default: return detail::example4(spec, grid);
  }
}

/// Exact discrete solution operator for the example's state equation.
inline SolutionOperator exact_operator(const ExampleSpec& spec, const ExampleData& d)
{
  if (spec.parabolic())
    return make_parabolic_operator(d.grid, d.f, d.phi, d.spatial);
  return make_elliptic_operator(d.grid, d.spatial, d.f);
}

/// Assembles the problem with the exact finite-difference operator.
/// Surrogate-backed instances are built by build_surrogate_example.
inline ProblemInstance build_exact_example(const ExampleSpec& spec, double norm_tol = 1e-8)
{
  ExampleData d = example_data(spec);
  auto op = std::make_shared<SolutionOperator>(exact_operator(spec, d));
  estimate_operator_norm(*op, norm_tol, 2000);
  ProblemInstance prob;
  prob.op = op;
  prob.y_d = d.y_d;
  prob.alpha = spec.alpha;
  prob.reg = d.reg;
  prob.exact = d.exact;
  return prob;
}

/// Fraction of nodes where |u| exceeds the threshold.
inline double noz(const Field& u, double threshold = 1e-8)
{
  if (u.size() == 0)
    return 0.0;
  const auto count = (u.values().array().abs() > threshold).count();
  return static_cast<double>(count) / static_cast<double>(u.size());
}

} // namespace pdc::bench
