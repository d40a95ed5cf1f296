#pragma once

#include <optional>

#include "pdcontrol/pd_solver.hpp"

namespace pdc {

/// Iterate of the linearized ADMM. `y` is the full (affine) state variable and
/// `su` caches S u + y_f for the current u. `p` is the dual variable of the
/// equivalent primal-dual iteration recovered from the last sweep:
///   p^k = lambda^k + s (S u^k + y_f - y^{k+1}).
struct ADMMState
{
  Field u;
  Field y;
  Field lambda;
  Field su;
  std::optional<Field> p;
  int k = 0;
  long pde_solves = 0;
};

/// Zero control with lambda^0 = s (y_d - y_f), so the recovered p^0 is zero and the
/// sequence lines up with the primal-dual iteration started at (0, 0).
inline ADMMState admm_initial_state(const ProblemInstance& prob, double s)
{
  ADMMState st;
  st.u = Field(prob.grid());
  st.su = prob.op->offset();
  st.lambda = s * (prob.y_d - prob.op->offset());
  st.y = Field(prob.grid());
  return st;
}

/// One sweep: y-minimization, linearized u-minimization, multiplier update.
inline ADMMState linearized_admm_step(const ADMMState& state, const ProblemInstance& prob, double r, double s)
{
  const SolutionOperator& op = *prob.op;
  ADMMState next;
  next.y = (1.0 / (1.0 + s)) * (prob.y_d + s * state.su + state.lambda);
  Field p = state.lambda + s * (state.su - next.y);
  next.u = prox_primal(prob.reg, state.u, op.apply_adjoint(p), r, prob.alpha);
  next.su = op.apply_affine(next.u);
  next.lambda = state.lambda + s * (next.su - next.y);
  next.p = std::move(p);
  next.k = state.k + 1;
  next.pde_solves = state.pde_solves + 2L * op.pde_solves_per_apply();
  return next;
}

/// E_k for the iterate (u^k, lambda^k) with previous control u^{k-1}.
/// Costs one solve for S(u^k - u^{k-1}).
inline double lyapunov_energy(const ADMMState& state, const Field& prev_u, const ProblemInstance& prob, double r,
                              double s)
{
  if (!(prob.exact && prob.exact->lambda))
    throw DiagnosticUnavailable("Lyapunov energy needs the exact discrete saddle point (u*, lambda*)");
  const Field du = state.u - prev_u;
  const Field s_du = prob.op->apply_linear(du);
  return detail::lyapunov_energy(state.u, state.lambda, du, s_du, *prob.exact, prob.alpha, r, s);
}

/// Replaces y_d so that the optimum of the instance is known exactly on the grid:
/// given a multiplier p*, u* minimizes g + (S*p*, .) pointwise and y_d = S u* + y_f - p*.
inline ProblemInstance with_discrete_solution(ProblemInstance prob, const Field& p_star)
{
  const SolutionOperator& op = *prob.op;
  Field u_star = pointwise_minimizer(prob.reg, op.apply_adjoint(p_star), prob.alpha);
  Field y_star = op.apply_affine(u_star);
  prob.y_d = y_star - p_star;
  prob.exact = ExactSolution{std::move(u_star), std::move(y_star), p_star};
  return prob;
}

} // namespace pdc
