#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

#include "pdcontrol/admm.hpp"
#include "pdcontrol/bench/examples.hpp"
#include "pdcontrol/pd_solver.hpp"
#include "pdcontrol/pde_core.hpp"

using namespace pdc;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng, double scale = 1.0)
{
  std::normal_distribution<double> d(0.0, scale);
  Field f(g);
  for (Index i = 0; i < f.size(); ++i)
    f[i] = d(rng);
  return f;
}

// 1D elliptic toy with n_cells - 1 unknowns, random target and source.
ProblemInstance toy_elliptic(int n_cells, Regularizer reg, std::uint64_t seed, double alpha = 1e-3)
{
  std::mt19937_64 rng(seed);
  Grid g(1, n_cells);
  auto op = std::make_shared<SolutionOperator>(make_elliptic_operator(g, {}, random_field(g, rng)));
  estimate_operator_norm(*op, 1e-12, 5000);
  ProblemInstance prob;
  prob.op = op;
  prob.y_d = random_field(g, rng, 0.05);
  prob.alpha = alpha;
  prob.reg = reg;
  return prob;
}

ProblemInstance toy_parabolic(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  Grid g(1, 5, 4); // 16 unknowns
  auto op = std::make_shared<SolutionOperator>(
    make_parabolic_operator(g, random_field(g, rng), random_field(g.spatial(), rng)));
  estimate_operator_norm(*op, 1e-12, 5000);
  ProblemInstance prob;
  prob.op = op;
  prob.y_d = random_field(g, rng, 0.05);
  prob.alpha = 1e-2;
  prob.reg = BoxIndicator{-0.3, 0.4};
  return prob;
}

// Example-1 data on a small space-time grid, with y_d replaced so that the
// discrete saddle point is known: p* = y* - y_d built from the continuous adjoint.
ProblemInstance example1_discrete(int n)
{
  bench::ExampleSpec spec;
  spec.id = 1;
  spec.n_cells = n;
  ProblemInstance prob = bench::build_exact_example(spec, 1e-10);
  const Field p_star = prob.op->apply_affine(prob.exact->u) - prob.y_d;
  return with_discrete_solution(prob, p_star);
}

} // namespace

TEST(StepSizeBound, PaperArithmetic)
{
  EXPECT_EQ(step_size_bound(StepKind::Classic, 4000, 1e-3, 0.05), 400.0);
  EXPECT_EQ(step_size_bound(StepKind::Enlarged, 4000, 1e-3, 0.05), 1600.0);
  EXPECT_DOUBLE_EQ(step_size_bound(StepKind::Enlarged, 4000, 0.0, 0.05), 4.0 / 3.0 * 400.0);
  EXPECT_THROW(step_size_bound(StepKind::Classic, 4000, 1e-3, 0.0), InvalidOperator);
}

TEST(StepSizeBound, Validation)
{
  EXPECT_TRUE(validate_step_sizes(4000, 0.09, StepKind::Classic, 1e-3, 0.05));
  EXPECT_FALSE(validate_step_sizes(4000, 0.1, StepKind::Classic, 1e-3, 0.05));
  EXPECT_TRUE(validate_step_sizes(4000, 0.39, StepKind::Enlarged, 1e-3, 0.05));
  EXPECT_EQ(assess_step_sizes(4000, 0.1, StepKind::Classic, 1e-3, 0.05), StepVerdict::Borderline);
  EXPECT_EQ(assess_step_sizes(4000, 0.09, StepKind::Classic, 1e-3, 0.05), StepVerdict::Admissible);
  EXPECT_EQ(assess_step_sizes(4000, 0.2, StepKind::Classic, 1e-3, 0.05), StepVerdict::Violated);
  EXPECT_EQ(assess_step_sizes(4000, 0.2, StepKind::Classic, 1e-3, 0.0), StepVerdict::Unchecked);
}

TEST(StepRule, Validation)
{
  EXPECT_THROW(StepRule::classic(0.0, 1.0).validate(), InvalidParameter);
  EXPECT_THROW(StepRule::apd(1.0, 1.0, 0).validate(), InvalidParameter);
  EXPECT_NO_THROW(StepRule::apd(1.0, 1.0, 5).validate());
}

TEST(ApdUpdate, Recurrence)
{
  const ApdUpdate a = apd_update(1000.0, 0.4);
  EXPECT_NEAR(a.tau, 0.8451542547285166, 1e-15);
  EXPECT_NEAR(a.s, 0.3380617018914066, 1e-15);
  EXPECT_NEAR(a.r, 1183.215956619923, 1e-9);
  EXPECT_THROW(apd_update(1.0, 0.0), InvalidParameter);
}

TEST(ApdUpdate, ProductInvariant)
{
  double r = 1000.0, s = 0.4;
  for (int k = 0; k < 200; ++k) {
    const ApdUpdate a = apd_update(r, s);
    EXPECT_NEAR(a.r * a.s, r * s, 1e-13 * r * s);
    r = a.r;
    s = a.s;
  }
}

TEST(CheckStop, Examples)
{
  Grid g(1, 2);
  Field u(g), p(g);
  u[0] = 0.5;
  EXPECT_TRUE(check_stop(u, u, p, p, 1e-12).stop);
  EXPECT_EQ(check_stop(u, u, p, p, 1e-12).measure, 0.0);
  Field u2 = u;
  u2[0] = 0.51;
  // |u| = 0.5 weighted by h = 1/2, denominator clamps to 1
  const StopCheck c = check_stop(u, u2, p, p, 1e-3);
  EXPECT_NEAR(c.measure, norm(u2 - u), 1e-15);
  EXPECT_FALSE(c.stop);
  EXPECT_TRUE(check_stop(u, u2, p, p, std::numeric_limits<double>::infinity()).stop);
}

TEST(PdStep, ZeroStart)
{
  ProblemInstance prob = toy_elliptic(6, BoxIndicator{-0.5, 0.5}, 1);
  const double s = 0.3;
  PDState st = initial_state(prob, StepRule::enlarged(50.0, s));
  PDState next = pd_step(st, prob);
  EXPECT_EQ(norm(next.u), 0.0);
  const Field expect = (s / (1 + s)) * (prob.op->offset() - prob.y_d);
  EXPECT_LE(norm(next.p - expect), 1e-15);
  EXPECT_EQ(next.pde_solves, 2);
  EXPECT_EQ(next.k, 1);
}

TEST(PdStep, FixedPointOfDiscreteSaddlePoint)
{
  ProblemInstance prob = example1_discrete(8);
  PDState st = initial_state(prob, StepRule::enlarged(4e3, 0.4));
  st.u = prob.exact->u;
  st.p = *prob.exact->lambda;
  PDState next = pd_step(st, prob);
  EXPECT_LE(norm(next.u - st.u), 1e-9);
  EXPECT_LE(norm(next.p - st.p), 1e-9);
}

TEST(PdStep, DenseOracle)
{
  std::mt19937_64 rng(2);
  ProblemInstance prob = toy_elliptic(6, L1Box{1e-2, -0.2, 0.3}, 3, 0.05);
  const Grid& g = prob.grid();
  const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_elliptic(g, {}));
  const Eigen::MatrixXd s_mat = a.inverse();
  const Eigen::VectorXd yf = prob.op->offset().values();
  PDState st = initial_state(prob, StepRule::classic(20.0, 0.5));
  st.u = random_field(g, rng, 0.2);
  st.p = random_field(g, rng, 0.2);
  const PDState next = pd_step(st, prob);

  const double r = 20.0, s = 0.5, alpha = 0.05, mu = 1e-2;
  Eigen::VectorXd v = (st.u.values() - r * s_mat.transpose() * st.p.values()) / (alpha * r + 1);
  const double zeta = mu * r / (alpha * r + 1);
  for (Index i = 0; i < v.size(); ++i) {
    const double m = std::max(std::abs(v(i)) - zeta, 0.0);
    v(i) = std::clamp((v(i) > 0 ? 1.0 : -1.0) * m, -0.2, 0.3);
  }
  const Eigen::VectorXd p =
    (s_mat * (2 * v - st.u.values()) + yf + st.p.values() / s - prob.y_d.values()) / (1 + 1 / s);
  EXPECT_LE((next.u.values() - v).norm(), 1e-12);
  EXPECT_LE((next.p.values() - p).norm(), 1e-12);
}

TEST(Solve, HugeToleranceStopsAfterOneIteration)
{
  ProblemInstance prob = toy_elliptic(8, BoxIndicator{-0.5, 0.5}, 4);
  const SolveReport rep = solve(prob, StepRule::classic(10.0, 0.1), 1e9, 100);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.pde_solves, 2);
}

TEST(Solve, IterationCapIsNotAnError)
{
  ProblemInstance prob = toy_elliptic(8, BoxIndicator{-0.5, 0.5}, 5);
  const SolveReport rep = solve(prob, StepRule::classic(10.0, 0.1), 1e-300, 7);
  EXPECT_EQ(rep.iterations, 7);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.pde_solves, 14);
}

TEST(Solve, DeterministicAndLogged)
{
  ProblemInstance prob = toy_parabolic(6);
  SolveOptions opt;
  opt.log_every = 3;
  opt.monitor_kkt = true;
  const double bound = step_size_bound(StepKind::Enlarged, 10.0, prob.alpha, prob.op->norm_estimate());
  const StepRule rule = StepRule::enlarged(10.0, 0.5 * bound / 10.0);
  const SolveReport a = solve(prob, rule, 1e-8, 500, opt);
  const SolveReport b = solve(prob, rule, 1e-8, 500, opt);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.u.values(), b.u.values());
  ASSERT_FALSE(a.log.empty());
  EXPECT_EQ(a.log.back().k, a.iterations);
  for (std::size_t i = 0; i + 1 < a.log.size(); ++i)
    EXPECT_EQ(a.log[i].k % 3, 0);
  EXPECT_LT(*a.log.back().kkt, *a.log.front().kkt);
  EXPECT_EQ(a.pde_solves, 2L * a.iterations);
  EXPECT_EQ(a.step_verdict, StepVerdict::Admissible);
}

TEST(Solve, ConvergesToDiscreteSaddlePoint)
{
  ProblemInstance prob = example1_discrete(8);
  const double tol = 1e-5;
  const SolveReport rep = solve(prob, StepRule::enlarged(4e3, 0.4), tol, 1000);
  ASSERT_TRUE(rep.converged);
  EXPECT_LE(rep.errors->u_abs, 10 * tol);
}

TEST(Solve, ApdAdjustEvery)
{
  ProblemInstance prob = toy_elliptic(8, BoxIndicator{-0.5, 0.5}, 7);
  const SolveReport r1 = solve(prob, StepRule::apd(10.0, 0.2, 1), 1e-8, 2000);
  const SolveReport r5 = solve(prob, StepRule::apd(10.0, 0.2, 5), 1e-8, 2000);
  EXPECT_TRUE(r1.converged);
  EXPECT_TRUE(r5.converged);
  EXPECT_LE(norm(r1.u - r5.u), 1e-5);
}

TEST(Admm, FirstUpdateMatchesPd)
{
  ProblemInstance prob = toy_elliptic(10, BoxIndicator{-0.5, 0.5}, 8);
  const double r = 30.0, s = 0.4;
  const ADMMState a1 = linearized_admm_step(admm_initial_state(prob, s), prob, r, s);
  const PDState p1 = pd_step(initial_state(prob, StepRule::enlarged(r, s)), prob);
  EXPECT_LE(norm(a1.u - p1.u), 1e-14);
  EXPECT_LE(norm(*a1.p), 1e-14);
}

TEST(Admm, EquivalenceOverHundredIterations)
{
  for (std::uint64_t seed : {9u, 10u, 11u}) {
    for (int variant = 0; variant < 3; ++variant) {
      ProblemInstance prob = variant == 0   ? toy_elliptic(6, BoxIndicator{-0.5, 0.5}, seed)
                             : variant == 1 ? toy_elliptic(21, L1Box{2e-3, -0.4, 0.6}, seed, 1e-2)
                                            : toy_parabolic(seed);
      ASSERT_LE(prob.grid().size(), 20);
      const double r = 40.0, s = 0.3;
      ADMMState a = admm_initial_state(prob, s);
      PDState p = initial_state(prob, StepRule::enlarged(r, s));
      for (int k = 0; k < 100; ++k) {
        const ADMMState a_next = linearized_admm_step(a, prob, r, s);
        // p^k recovered from the ADMM sweep equals the PD dual iterate
        EXPECT_LE(norm(*a_next.p - p.p), 1e-10);
        p = pd_step(p, prob);
        EXPECT_LE(norm(a_next.u - p.u), 1e-10) << "iteration " << k;
        // multiplier identity
        EXPECT_LE(norm(a_next.lambda - a.lambda - s * (a_next.su - a_next.y)), 1e-12);
        a = a_next;
      }
    }
  }
}

TEST(Lyapunov, ZeroAtSaddlePoint)
{
  ProblemInstance prob = example1_discrete(6);
  ADMMState st;
  st.u = prob.exact->u;
  st.lambda = *prob.exact->lambda;
  EXPECT_NEAR(lyapunov_energy(st, st.u, prob, 4e3, 0.4), 0.0, 1e-20);
}

TEST(Lyapunov, NeedsExactSolution)
{
  ProblemInstance prob = toy_elliptic(6, BoxIndicator{}, 12);
  ADMMState st = admm_initial_state(prob, 0.3);
  EXPECT_THROW(lyapunov_energy(st, st.u, prob, 1.0, 0.3), DiagnosticUnavailable);
  EXPECT_THROW(solve(prob, StepRule::classic(1, 1), 1e-5, 5, SolveOptions{0, true, false, 0.0}),
               DiagnosticUnavailable);
}

// Descent of E_k along ADMM iterates under condition (13), plus a post hoc delta > 0.
TEST(Lyapunov, DescentOnExampleOneToy)
{
  ProblemInstance prob = example1_discrete(6);
  const double r = 4e3;
  const double bound = step_size_bound(StepKind::Enlarged, r, prob.alpha, prob.op->norm_estimate());
  const double s = 0.95 * bound / r;
  ADMMState st = admm_initial_state(prob, s);
  Field prev_u = st.u;
  std::vector<double> energy, steps;
  for (int k = 0; k < 51; ++k) {
    energy.push_back(lyapunov_energy(st, prev_u, prob, r, s));
    ADMMState next = linearized_admm_step(st, prob, r, s);
    const double du = norm(next.u - st.u), dl = norm(next.lambda - st.lambda);
    steps.push_back(du * du + dl * dl);
    prev_u = st.u;
    st = std::move(next);
  }
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < energy.size(); ++k) {
    EXPECT_GE(energy[k], 0.0);
    EXPECT_LE(energy[k + 1], energy[k] + 1e-10) << "k = " << k;
    if (steps[k] > 1e-300)
      delta = std::min(delta, (energy[k] - energy[k + 1] + 1e-10) / steps[k]);
  }
  EXPECT_GT(delta, 0.0);
}

TEST(Lyapunov, SolverMonitorMatchesAdmmEnergy)
{
  ProblemInstance prob = example1_discrete(6);
  const double r = 4e3;
  const double s = 0.9 * step_size_bound(StepKind::Enlarged, r, prob.alpha, prob.op->norm_estimate()) / r;
  SolveOptions opt;
  opt.monitor_energy = true;
  const SolveReport rep = solve(prob, StepRule::enlarged(r, s), 1e-300, 20, opt);
  ADMMState st = admm_initial_state(prob, s);
  for (int k = 0; k < 20; ++k) {
    const ADMMState next = linearized_admm_step(st, prob, r, s);
    const double e = lyapunov_energy(next, st.u, prob, r, s);
    EXPECT_NEAR(*rep.log[k].energy, e, 1e-10 * std::max(1.0, e));
    st = next;
  }
}

TEST(Kkt, ZeroControlIsNotOptimal)
{
  ProblemInstance prob = toy_elliptic(8, BoxIndicator{-0.5, 0.5}, 13);
  const Field zero(prob.grid());
  const double rho = kkt_residual(zero, prob);
  EXPECT_GT(rho, 0.0);
  EXPECT_EQ(kkt_residual(zero, prob), rho);
}

TEST(Kkt, ManufacturedSolutionResidualShrinksWithMesh)
{
  std::vector<double> rho;
  for (int n : {8, 16, 32}) {
    bench::ExampleSpec spec;
    spec.id = 1;
    spec.n_cells = n;
    ProblemInstance prob = bench::build_exact_example(spec, 1e-6);
    rho.push_back(kkt_residual(prob.exact->u, prob));
  }
  EXPECT_LT(rho[1], rho[0]);
  EXPECT_LT(rho[2], rho[1]);
  EXPECT_LE(rho[2], 5.0 * (1.0 / (32.0 * 32.0) + 1.0 / 32.0));
  // discrete saddle point: residual at solver precision
  ProblemInstance d = example1_discrete(8);
  EXPECT_LE(kkt_residual(d.exact->u, d), 1e-12);
}

TEST(ExampleOne, Table2IterationCounts)
{
  bench::ExampleSpec spec;
  spec.id = 1;
  spec.n_cells = 64;
  spec.method = bench::Method::PDC;
  const SolveReport pdc = solve(bench::build_exact_example(spec), bench::default_step_rule(spec), 1e-5, 1000);
  spec.method = bench::Method::PDI;
  const SolveReport pdi = solve(bench::build_exact_example(spec), bench::default_step_rule(spec), 1e-5, 1000);
  EXPECT_GE(pdc.iterations, 62);
  EXPECT_LE(pdc.iterations, 84);
  EXPECT_GE(pdi.iterations, 20);
  EXPECT_LE(pdi.iterations, 30);
  EXPECT_EQ(pdi.pde_solves, 2L * pdi.iterations);
}
