#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/grid.hpp"
#include "pdcontrol/prox.hpp"
#include "pdcontrol/solution_operator.hpp"

namespace pdc {

enum class StepKind { Classic, Enlarged, APD };

inline std::string to_string(StepKind k)
{
  switch (k) {
    case StepKind::Classic: return "classic";
    case StepKind::Enlarged: return "enlarged";
    case StepKind::APD: return "apd";
  }
  return "?";
}

/// Step sizes r (primal) and s (dual) plus the rule used to judge them.
struct StepRule
{
  StepKind kind = StepKind::Classic;
  double r0 = 1.0;
  double s0 = 1.0;
  int adjust_every = 1; // APD only

  static StepRule classic(double r, double s) { return {StepKind::Classic, r, s, 1}; }
  static StepRule enlarged(double r, double s) { return {StepKind::Enlarged, r, s, 1}; }
  static StepRule apd(double r, double s, int every) { return {StepKind::APD, r, s, every}; }

  void validate() const
  {
    if (!(r0 > 0.0) || !(s0 > 0.0))
      throw InvalidParameter("step sizes must be positive");
    if (kind == StepKind::APD && adjust_every < 1)
      throw InvalidParameter("APD adjustment period must be at least 1");
  }
};

/// Supremum of admissible r*s: 1/|S|^2 (classic, APD) or (4 + 2 alpha r)/(3 |S|^2) (enlarged).
inline double step_size_bound(StepKind kind, double r, double alpha, double norm_s)
{
  if (!(norm_s > 0.0))
    throw InvalidOperator("operator norm must be positive to bound step sizes");
  if (!(r > 0.0) || alpha < 0.0)
    throw InvalidParameter("step bound needs r > 0 and alpha >= 0");
  const double classic = 1.0 / norm_s / norm_s;
  if (kind == StepKind::Enlarged)
    return classic * (4.0 + 2.0 * alpha * r) / 3.0;
  return classic;
}

inline bool validate_step_sizes(double r, double s, StepKind kind, double alpha, double norm_s)
{
  return r * s < step_size_bound(kind, r, alpha, norm_s);
}

enum class StepVerdict { Admissible, Borderline, Violated, Unchecked };

inline std::string to_string(StepVerdict v)
{
  switch (v) {
    case StepVerdict::Admissible: return "admissible";
    case StepVerdict::Borderline: return "borderline";
    case StepVerdict::Violated: return "violated";
    case StepVerdict::Unchecked: return "unchecked";
  }
  return "?";
}

/// Borderline means r*s within 0.1% below or on the bound. The norm is itself an
/// estimate, so only a violation beyond that band is reported as such.
inline StepVerdict assess_step_sizes(double r, double s, StepKind kind, double alpha, double norm_s)
{
  if (!(norm_s > 0.0))
    return StepVerdict::Unchecked;
  const double bound = step_size_bound(kind, r, alpha, norm_s);
  const double rs = r * s;
  if (rs < 0.999 * bound)
    return StepVerdict::Admissible;
  if (rs <= bound * (1.0 + 1e-12))
    return StepVerdict::Borderline;
  return StepVerdict::Violated;
}

/// Known solution of a problem instance, used for error reports and diagnostics.
/// `lambda` (= y* - y_d) is only set when (u, y) is the exact discrete saddle point.
struct ExactSolution
{
  Field u;
  Field y;
  std::optional<Field> lambda;
};

/// min 1/2 |S u + y_f - y_d|^2 + alpha/2 |u|^2 + theta(u)
struct ProblemInstance
{
  std::shared_ptr<const SolutionOperator> op;
  Field y_d;
  double alpha = 1e-3;
  Regularizer reg = BoxIndicator{};
  std::optional<ExactSolution> exact;

  const Grid& grid() const { return op->grid(); }

  void validate() const
  {
    if (!op)
      throw InvalidOperator("problem instance has no solution operator");
    if (!(alpha > 0.0))
      throw InvalidParameter("alpha must be positive");
    y_d.require_same(op->offset());
    pdc::validate(reg);
  }
};

inline double objective(const ProblemInstance& prob, const Field& u, const Field& y)
{
  const double misfit = norm(y - prob.y_d);
  const double nu = norm(u);
  return 0.5 * misfit * misfit + 0.5 * prob.alpha * nu * nu + l1_weight(prob.reg) * norm_l1(u);
}

struct PDState
{
  Field u;
  Field p;
  int k = 0;
  double r = 1.0;
  double s = 1.0;
  double last_stop_measure = std::numeric_limits<double>::infinity();
  long pde_solves = 0;
};

inline PDState initial_state(const ProblemInstance& prob, const StepRule& rule)
{
  PDState st;
  st.u = Field(prob.grid());
  st.p = Field(prob.grid());
  st.r = rule.r0;
  st.s = rule.s0;
  return st;
}

/// One primal-dual iteration:
///   u+ = prox(u - r S*p),  p+ = argmax over p of the dual step at S(2u+ - u) + y_f.
inline PDState pd_step(const PDState& state, const ProblemInstance& prob)
{
  const SolutionOperator& op = *prob.op;
  PDState next;
  const Field sstar_p = op.apply_adjoint(state.p);
  next.u = prox_primal(prob.reg, state.u, sstar_p, state.r, prob.alpha);
  const Field sy = op.apply_affine(2.0 * next.u - state.u);
  next.p = dual_update(sy, state.p, prob.y_d, state.s);
  next.k = state.k + 1;
  next.r = state.r;
  next.s = state.s;
  next.last_stop_measure = state.last_stop_measure;
  next.pde_solves = state.pde_solves + 2L * op.pde_solves_per_apply();
  return next;
}

struct ApdUpdate
{
  double r;
  double s;
  double tau;
};

/// tau_k = 1/sqrt(1 + s_k), r_{k+1} = r_k / tau_k, s_{k+1} = s_k * tau_k.
inline ApdUpdate apd_update(double r, double s)
{
  if (!(s > 0.0))
    throw InvalidParameter("APD update needs s > 0");
  const double tau = 1.0 / std::sqrt(1.0 + s);
  return {r / tau, s * tau, tau};
}

struct StopCheck
{
  bool stop = false;
  double measure = 0.0;
};

/// max of relative changes of u and p, each divided by max{1, |previous|}.
inline StopCheck check_stop(const Field& u_k, const Field& u_next, const Field& p_k, const Field& p_next, double tol)
{
  const double du = norm(u_next - u_k) / std::max(1.0, norm(u_k));
  const double dp = norm(p_next - p_k) / std::max(1.0, norm(p_k));
  StopCheck c;
  c.measure = std::max(du, dp);
  c.stop = c.measure <= tol;
  return c;
}

struct ErrorNorms
{
  double u_abs = 0.0;
  double u_rel = 0.0;
  double y_abs = 0.0;
  double y_rel = 0.0;
};

/// Absolute and relative weighted-L2 errors against a known solution.
inline ErrorNorms compute_errors(const Field& u, const Field& y, const ExactSolution& exact)
{
  ErrorNorms e;
  e.u_abs = norm(u - exact.u);
  e.y_abs = norm(y - exact.y);
  const double nu = norm(exact.u);
  const double ny = norm(exact.y);
  e.u_rel = nu > 0.0 ? e.u_abs / nu : e.u_abs;
  e.y_rel = ny > 0.0 ? e.y_abs / ny : e.y_abs;
  return e;
}

struct LogRow
{
  int k = 0;
  double stop_measure = 0.0;
  double objective = 0.0;
  std::optional<double> energy;
  std::optional<double> kkt;
};

struct SolveOptions
{
  int log_every = 0;         // 0: no per-iteration rows
  bool monitor_energy = false; // needs prob.exact->lambda; one extra solve per iteration
  bool monitor_kkt = false;    // two extra solves per logged row
  double norm_s = 0.0;         // 0: use the operator's cached estimate
};

struct SolveReport
{
  int iterations = 0;
  long pde_solves = 0; // iteration solves only; diagnostics are not charged
  bool converged = false;
  double objective = 0.0;
  double final_measure = 0.0;
  std::optional<ErrorNorms> errors;
  std::vector<LogRow> log;
  double wall_time = 0.0;
  StepVerdict step_verdict = StepVerdict::Unchecked;
  Field u;
  Field y;
  Field p;
};

namespace detail {

/// E_k with |v|_D^2 = |v|^2/r - 3s/(4 + 2 alpha r) |S v|^2 and sigma = (2 + 4 alpha r)/(2 + alpha r) s,
/// where du = u^k - u^{k-1} and s_du = S du.
inline double lyapunov_energy(const Field& u, const Field& lambda, const Field& du, const Field& s_du,
                              const ExactSolution& exact, double alpha, double r, double s)
{
  const double eu = norm(u - exact.u);
  const double el = norm(lambda - *exact.lambda);
  const double ndu = norm(du);
  const double nsdu = norm(s_du);
  const double d_norm2 = ndu * ndu / r - 3.0 * s / (4.0 + 2.0 * alpha * r) * nsdu * nsdu;
  const double sigma = (2.0 + 4.0 * alpha * r) / (2.0 + alpha * r) * s;
  return (1.0 / r + alpha) * eu * eu + el * el / s + 0.5 * d_norm2 + sigma / 8.0 * nsdu * nsdu;
}

} // namespace detail

inline double kkt_residual(const Field& u, const ProblemInstance& prob);

/// Runs pd_step from (u, p) = (0, 0) until check_stop or max_iter.
inline SolveReport solve(const ProblemInstance& prob, const StepRule& rule, double tol, int max_iter,
                         const SolveOptions& options = {})
{
  prob.validate();
  rule.validate();
  if (options.monitor_energy && !(prob.exact && prob.exact->lambda))
    throw DiagnosticUnavailable("energy monitor needs the exact discrete saddle point");
  const auto start = std::chrono::steady_clock::now();
  const SolutionOperator& op = *prob.op;

  SolveReport rep;
  const double norm_s = options.norm_s > 0.0 ? options.norm_s : op.norm_estimate();
  rep.step_verdict = assess_step_sizes(rule.r0, rule.s0, rule.kind, prob.alpha, norm_s);

  PDState st = initial_state(prob, rule);
  for (int k = 0; k < max_iter; ++k) {
    PDState next = pd_step(st, prob);
    const StopCheck c = check_stop(st.u, next.u, st.p, next.p, tol);
    next.last_stop_measure = c.measure;

    const bool last = c.stop || k + 1 == max_iter;
    std::optional<double> energy;
    if (options.monitor_energy) {
      const Field du = next.u - st.u;
      const Field s_du = op.apply_linear(du);
      const Field lambda = st.p + st.s * s_du;
      energy = detail::lyapunov_energy(next.u, lambda, du, s_du, *prob.exact, prob.alpha, st.r, st.s);
    }
    if (options.log_every > 0 && ((k + 1) % options.log_every == 0 || last)) {
      LogRow row;
      row.k = k + 1;
      row.stop_measure = c.measure;
      row.objective = objective(prob, next.u, op.apply_affine(next.u));
      row.energy = energy;
      if (options.monitor_kkt)
        row.kkt = kkt_residual(next.u, prob);
      rep.log.push_back(row);
    } else if (energy) {
      LogRow row;
      row.k = k + 1;
      row.stop_measure = c.measure;
      row.objective = std::numeric_limits<double>::quiet_NaN();
      row.energy = energy;
      rep.log.push_back(row);
    }

    if (rule.kind == StepKind::APD && k % rule.adjust_every == 0) {
      const ApdUpdate upd = apd_update(next.r, next.s);
      next.r = upd.r;
      next.s = upd.s;
    }
    st = std::move(next);
    if (c.stop) {
      rep.converged = true;
      break;
    }
  }

  rep.iterations = st.k;
  rep.pde_solves = st.pde_solves;
  rep.final_measure = st.last_stop_measure;
  rep.u = st.u;
  rep.p = st.p;
  rep.y = op.apply_affine(st.u);
  rep.objective = objective(prob, rep.u, rep.y);
  if (prob.exact)
    rep.errors = compute_errors(rep.u, rep.y, *prob.exact);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// |u - prox_g(u - S*(S u + y_f - y_d))|, the fixed-point residual at r = 1.
inline double kkt_residual(const Field& u, const ProblemInstance& prob)
{
  const SolutionOperator& op = *prob.op;
  const Field lambda = op.apply_affine(u) - prob.y_d;
  const Field v = prox_primal(prob.reg, u, op.apply_adjoint(lambda), 1.0, prob.alpha);
  return norm(u - v);
}

} // namespace pdc
