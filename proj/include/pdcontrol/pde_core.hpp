#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/grid.hpp"
#include "pdcontrol/solution_operator.hpp"

namespace pdc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// -nu * Laplace + c * I with homogeneous Dirichlet data.
struct EllipticProblem
{
  double nu = 1.0;
  double c = 0.0;
};

/// Standard 3-point (1D) / 5-point (2D) finite-difference matrix over interior nodes.
inline SparseMatrix assemble_elliptic(const Grid& grid, const EllipticProblem& problem)
{
  if (grid.n_cells < 2)
    throw InvalidGrid("grid has no interior nodes (n_cells = " + std::to_string(grid.n_cells) + ")");
  if (!(problem.nu > 0.0))
    throw InvalidParameter("diffusion coefficient must be positive");
  if (problem.c < 0.0)
    throw InvalidParameter("reaction coefficient must be nonnegative");

  const Index m = grid.nodes_per_axis();
  const Index n = grid.spatial_size();
  const double k = problem.nu / (grid.h() * grid.h());

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (grid.dim == 1 ? 3 : 5));
  for (Index row = 0; row < n; ++row) {
    const Index i = row % m;
    const Index j = row / m;
    entries.emplace_back(row, row, 2.0 * grid.dim * k + problem.c);
    if (i > 0)
      entries.emplace_back(row, row - 1, -k);
    if (i + 1 < m)
      entries.emplace_back(row, row + 1, -k);
    if (grid.dim == 2) {
      if (j > 0)
        entries.emplace_back(row, row - m, -k);
      if (j + 1 < m)
        entries.emplace_back(row, row + m, -k);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

inline double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b)
{
  const double nb = b.norm();
  const double nr = (a * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

/// Factorized (or iterative) solver for a fixed SPD matrix.
///
/// Small systems use a sparse LDL^T factorization; beyond `direct_limit`
/// unknowns a Jacobi-preconditioned CG with relative tolerance 1e-12 is used.
/// solve() is const and keeps its workspace local, so one instance serves
/// concurrent callers.
class SpdSolver
{
public:
  enum class Method { Auto, Direct, ConjugateGradient };

  static constexpr Index direct_limit = 400000;

  explicit SpdSolver(SparseMatrix matrix, Method method = Method::Auto, double cg_tol = 1e-12,
                     int cg_max_iter = 20000)
    : a_(std::move(matrix)), cg_tol_(cg_tol), cg_max_iter_(cg_max_iter)
  {
    if (a_.rows() != a_.cols())
      throw ShapeError("SPD solver needs a square matrix");
    if (method == Method::Auto)
      method = a_.rows() <= direct_limit ? Method::Direct : Method::ConjugateGradient;
    method_ = method;
    if (method_ == Method::Direct) {
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(a_);
      if (ldlt_->info() != Eigen::Success)
        throw SolverFailure("LDL^T factorization failed; matrix not SPD", 1.0);
      if ((ldlt_->vectorD().array() <= 0.0).any())
        throw SolverFailure("LDL^T factorization has a nonpositive pivot; matrix not SPD", 1.0);
    } else {
      inv_diag_ = a_.diagonal().cwiseInverse();
    }
  }

  Index size() const { return a_.rows(); }
  Method method() const { return method_; }
  const SparseMatrix& matrix() const { return a_; }

  Vector solve(const Vector& b) const
  {
    if (b.size() != a_.rows())
      throw ShapeError("right-hand side has wrong length");
    if (method_ == Method::Direct)
      return ldlt_->solve(b);
    return pcg(b);
  }

private:
  Vector pcg(const Vector& b) const
  {
    Vector x = Vector::Zero(b.size());
    const double nb = b.norm();
    if (nb == 0.0)
      return x;
    Vector r = b;
    Vector z = inv_diag_.cwiseProduct(r);
    Vector p = z;
    Vector q(b.size());
    double rz = r.dot(z);
    double rel = 1.0;
    for (int it = 0; it < cg_max_iter_; ++it) {
      q.noalias() = a_ * p;
      const double step = rz / p.dot(q);
      x += step * p;
      r -= step * q;
      rel = r.norm() / nb;
      if (rel <= cg_tol_)
        return x;
      z = inv_diag_.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    throw SolverFailure("conjugate gradient did not converge in " + std::to_string(cg_max_iter_) +
                          " iterations",
                        rel);
  }

  SparseMatrix a_;
  Method method_ = Method::Direct;
  double cg_tol_;
  int cg_max_iter_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  Vector inv_diag_;
};

inline Field solve_spd(const SparseMatrix& matrix, const Field& rhs,
                       SpdSolver::Method method = SpdSolver::Method::Auto)
{
  if (matrix.rows() != rhs.size())
    throw ShapeError("matrix and right-hand side sizes differ");
  SpdSolver solver(matrix, method);
  return Field(rhs.grid(), solver.solve(rhs.values()));
}

/// Solution operator of -nu*Laplace y + c*y = u + f on a stationary grid.
/// Self-adjoint; the offset is the state for u = 0.
inline SolutionOperator make_elliptic_operator(const Grid& grid, const EllipticProblem& problem,
                                               const std::optional<Field>& f = std::nullopt)
{
  if (grid.time_dependent())
    throw InvalidGrid("elliptic operator needs a stationary grid");
  auto solver = std::make_shared<const SpdSolver>(assemble_elliptic(grid, problem));
  auto apply = [solver](const Field& u) { return Field(u.grid(), solver->solve(u.values())); };
  Field offset(grid);
  if (f) {
    f->require_same(offset);
    offset = apply(*f);
  }
  SolutionOperator op(grid, apply, apply, offset);
  op.set_label("elliptic");
  return op;
}

/// Backward-Euler solution operator of y_t - nu*Laplace y = u + f, y(0) = phi.
///
/// Each step solves (I + tau*A) y_n = y_{n-1} + tau*(u_n + f_n). The adjoint is
/// the exact transpose of that march: (I + tau*A) q_n = tau*p_n + q_{n+1},
/// marching backward from q_{N+1} = 0. `phi` lives on the spatial grid.
inline SolutionOperator make_parabolic_operator(const Grid& grid, const std::optional<Field>& f = std::nullopt,
                                                const std::optional<Field>& phi = std::nullopt,
                                                const EllipticProblem& spatial = {})
{
  if (!grid.time_dependent())
    throw InvalidGrid("parabolic operator needs at least one time step");
  const Grid space = grid.spatial();
  const double tau = grid.tau();
  SparseMatrix step = assemble_elliptic(space, spatial) * tau;
  SparseMatrix identity(step.rows(), step.cols());
  identity.setIdentity();
  step += identity;
  auto solver = std::make_shared<const SpdSolver>(std::move(step));
  const Index levels = grid.time_levels();

  auto march = [solver, tau, levels](const Field& source, const Vector& initial) {
    Field y(source.grid());
    Vector prev = initial;
    for (Index n = 0; n < levels; ++n) {
      Vector rhs = prev + tau * source.slice(n);
      prev = solver->solve(rhs);
      y.slice(n) = prev;
    }
    return y;
  };
  auto forward = [march, space](const Field& u) { return march(u, Vector::Zero(space.spatial_size())); };
  auto adjoint = [solver, tau, levels, space](const Field& p) {
    Field q(p.grid());
    Vector next = Vector::Zero(space.spatial_size());
    for (Index n = levels - 1; n >= 0; --n) {
      Vector rhs = next + tau * p.slice(n);
      next = solver->solve(rhs);
      q.slice(n) = next;
    }
    return q;
  };

  Vector y0 = Vector::Zero(space.spatial_size());
  if (phi) {
    phi->require_same(Field(space));
    y0 = phi->values();
  }
  Field source(grid);
  if (f) {
    f->require_same(source);
    source = *f;
  }
  Field offset = march(source, y0);
  SolutionOperator op(grid, forward, adjoint, offset);
  op.set_label("parabolic");
  return op;
}

struct NormEstimate
{
  double value = 0.0;
  int iterations = 0;
  bool stale = false; // iteration cap reached before the tolerance
};

/// Power iteration on S*S; returns sqrt of its largest eigenvalue and stores it in op.
///
/// The start vector is the normalized all-ones field with a 1% perturbation
/// drawn from a generator seeded with `seed`.
inline NormEstimate estimate_operator_norm(SolutionOperator& op, double tol = 1e-8, int max_iter = 1000,
                                           std::uint64_t seed = 42)
{
  Field v = Field::constant(op.grid(), 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (Index i = 0; i < v.size(); ++i)
    v[i] += 0.01 * jitter(rng);
  v *= 1.0 / norm(v);

  NormEstimate est;
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Field w = op.apply_adjoint(op.apply_linear(v));
    const double next = inner(w, v);
    const double nw = norm(w);
    est.iterations = it;
    if (nw == 0.0) {
      lambda = 0.0;
      break;
    }
    v = (1.0 / nw) * std::move(w);
    const bool done = it > 1 && std::abs(next - lambda) <= tol * std::abs(next);
    lambda = next;
    if (done)
      break;
    if (it == max_iter)
      est.stale = true;
  }
  est.value = std::sqrt(std::max(lambda, 0.0));
  op.set_norm_estimate(est.value);
  return est;
}

} // namespace pdc
