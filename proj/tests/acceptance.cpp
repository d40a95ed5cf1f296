// Acceptance suite: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pdcontrol/pdcontrol.hpp"

using namespace pdc;
using bench::ExampleSpec;
using bench::Method;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Example 1 instances share one operator per mesh; only y_d depends on alpha.
class ExampleOneMeshes
{
public:
  ProblemInstance instance(int n, double alpha)
  {
    auto it = ops_.find(n);
    if (it == ops_.end()) {
      ExampleSpec spec = base(n, 1e-3);
      const auto t0 = Clock::now();
      ProblemInstance p = bench::build_exact_example(spec);
      std::printf("  built Example 1 at h = 1/%d, |S| = %.6f (%.1f s)\n", n, p.op->norm_estimate(), seconds_since(t0));
      std::fflush(stdout);
      it = ops_.emplace(n, p.op).first;
    }
    const bench::ExampleData d = bench::example_data(base(n, alpha));
    ProblemInstance prob;
    prob.op = it->second;
    prob.y_d = d.y_d;
    prob.alpha = alpha;
    prob.reg = d.reg;
    prob.exact = d.exact;
    return prob;
  }

  SolveReport run(int n, double alpha, Method m)
  {
    const auto key = std::make_tuple(n, alpha, m);
    auto it = runs_.find(key);
    if (it != runs_.end())
      return it->second;
    ExampleSpec spec = base(n, alpha);
    spec.method = m;
    const ProblemInstance prob = instance(n, alpha);
    SolveReport rep = solve(prob, bench::default_step_rule(spec), 1e-5, 1000);
    std::printf("  Example 1 alpha = %g h = 1/%d %s: %d iterations, |u - u*| = %.4e (%.1f s)\n", alpha, n,
                bench::to_string(m).c_str(), rep.iterations, rep.errors->u_abs, rep.wall_time);
    std::fflush(stdout);
    runs_.emplace(key, rep);
    return rep;
  }

private:
  static ExampleSpec base(int n, double alpha)
  {
    ExampleSpec s;
    s.id = 1;
    s.alpha = alpha;
    s.n_cells = n;
    return s;
  }

  std::map<int, std::shared_ptr<const SolutionOperator>> ops_;
  std::map<std::tuple<int, double, Method>, SolveReport> runs_;
};

ExampleOneMeshes ex1;
std::string cache_dir = "acceptance_cache";

Field random_field(const Grid& g, std::mt19937_64& rng, double scale)
{
  std::normal_distribution<double> d(0.0, scale);
  Field f(g);
  for (Index i = 0; i < f.size(); ++i)
    f[i] = d(rng);
  return f;
}

// Grid search over [a, b] at step 1e-3, then at step 1e-6 around the best node.
double brute_force_min(const std::function<double(double)>& phi, double a, double b)
{
  auto scan = [&](double lo, double hi, double step) {
    double best = lo, best_val = phi(lo);
    for (double x = lo; x <= hi + 0.5 * step; x += step) {
      const double xc = std::min(x, hi);
      const double v = phi(xc);
      if (v < best_val)
        best_val = v, best = xc;
    }
    return best;
  };
  const double coarse = scan(a, b, 1e-3);
  return scan(std::max(a, coarse - 2e-3), std::min(b, coarse + 2e-3), 1e-6);
}

Outcome step_size_bounds()
{
  const auto t0 = Clock::now();
  const double classic = step_size_bound(StepKind::Classic, 4000, 1e-3, 0.05);
  const double enlarged = step_size_bound(StepKind::Enlarged, 4000, 1e-3, 0.05);
  const double ms = 1e3 * seconds_since(t0);
  return {classic == 400.0 && enlarged == 1600.0 && ms < 1.0,
          fmt("classic %.17g, enlarged %.17g, %.4f ms", classic, enlarged, ms)};
}

Outcome table2_counts()
{
  const SolveReport c = ex1.run(64, 1e-3, Method::PDC);
  const SolveReport i = ex1.run(64, 1e-3, Method::PDI);
  const double ratio = static_cast<double>(i.iterations) / c.iterations;
  const bool ok = c.converged && i.converged && c.iterations >= 62 && c.iterations <= 84 && i.iterations >= 20 &&
                  i.iterations <= 30 && ratio <= 0.45 && c.wall_time <= 120 && i.wall_time <= 120;
  return {ok, fmt("PD-C %d in [62, 84], PD-I %d in [20, 30], ratio %.3f <= 0.45, %.1f s / %.1f s", c.iterations,
                  i.iterations, ratio, c.wall_time, i.wall_time)};
}

Outcome table5_ratio()
{
  const SolveReport c = ex1.run(64, 1e-5, Method::PDC);
  const SolveReport i = ex1.run(64, 1e-5, Method::PDI);
  const double ratio = static_cast<double>(i.iterations) / c.iterations;
  return {c.converged && i.converged && ratio <= 0.9,
          fmt("alpha 1e-5: PD-I %d vs PD-C %d, ratio %.3f <= 0.90", i.iterations, c.iterations, ratio)};
}

Outcome mesh_independence()
{
  std::string detail;
  bool ok = true;
  for (Method m : {Method::PDC, Method::PDI}) {
    int lo = 1 << 30, hi = 0;
    std::string counts;
    for (int n : {16, 32, 64, 128, 256}) {
      const SolveReport r = ex1.run(n, 1e-3, m);
      ok = ok && r.converged;
      lo = std::min(lo, r.iterations);
      hi = std::max(hi, r.iterations);
      counts += (counts.empty() ? "" : " ") + std::to_string(r.iterations);
    }
    ok = ok && hi - lo <= 2;
    detail += (detail.empty() ? "" : "; ") + bench::to_string(m) + " " + counts + fmt(" (spread %d <= 2)", hi - lo);
  }
  return {ok, "h = 1/16..1/256: " + detail};
}

ProblemInstance dense_instance(int kind, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  ProblemInstance prob;
  std::shared_ptr<SolutionOperator> op;
  if (kind == 0) {
    Grid g(1, 21);
    op = std::make_shared<SolutionOperator>(make_elliptic_operator(g, {}, random_field(g, rng, 1.0)));
    prob.reg = L1Box{2e-3, -0.4, 0.6};
  } else if (kind == 1) {
    Grid g(2, 5);
    op = std::make_shared<SolutionOperator>(make_elliptic_operator(g, {1.0, 1.0}, random_field(g, rng, 1.0)));
    prob.reg = BoxIndicator{-0.5, 0.5};
  } else {
    Grid g(1, 5, 5);
    op = std::make_shared<SolutionOperator>(
      make_parabolic_operator(g, random_field(g, rng, 1.0), random_field(g.spatial(), rng, 1.0)));
    prob.reg = L1Box{1e-2, -0.3, 0.4};
  }
  estimate_operator_norm(*op, 1e-12, 5000);
  prob.op = op;
  prob.y_d = random_field(op->grid(), rng, 0.05);
  prob.alpha = 1e-2;
  return prob;
}

Outcome admm_equivalence()
{
  const auto t0 = Clock::now();
  double worst = 0.0;
  int instances = 0, max_unknowns = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (int kind = 0; kind < 3; ++kind) {
      const ProblemInstance prob = dense_instance(kind, seed);
      max_unknowns = std::max<int>(max_unknowns, prob.grid().size());
      const double r = 40.0, s = 0.3;
      ADMMState a = admm_initial_state(prob, s);
      PDState p = initial_state(prob, StepRule::enlarged(r, s));
      for (int k = 0; k < 100; ++k) {
        a = linearized_admm_step(a, prob, r, s);
        p = pd_step(p, prob);
        worst = std::max(worst, norm(a.u - p.u));
      }
      ++instances;
    }
  }
  const double sec = seconds_since(t0);
  return {worst <= 1e-10 && max_unknowns <= 20 && sec < 1.0,
          fmt("%d instances, <= %d unknowns, max |u_pd - u_admm| = %.2e over 100 iterations, %.3f s", instances,
              max_unknowns, worst, sec)};
}

Outcome lyapunov_descent()
{
  ExampleSpec spec;
  spec.id = 1;
  spec.n_cells = 8;
  ProblemInstance prob = bench::build_exact_example(spec, 1e-12);
  prob = with_discrete_solution(prob, prob.op->apply_affine(prob.exact->u) - prob.y_d);
  const double r = 4e3;
  const double bound = step_size_bound(StepKind::Enlarged, r, prob.alpha, prob.op->norm_estimate());
  const double s = 0.95 * bound / r;
  SolveOptions opt;
  opt.monitor_energy = true;
  opt.log_every = 1;
  const SolveReport rep = solve(prob, StepRule::enlarged(r, s), 1e-300, 50, opt);
  double worst = -std::numeric_limits<double>::infinity();
  bool nonneg = true;
  for (std::size_t k = 0; k + 1 < rep.log.size(); ++k) {
    worst = std::max(worst, *rep.log[k + 1].energy - *rep.log[k].energy);
    nonneg = nonneg && *rep.log[k].energy >= 0.0;
  }
  const bool ok = rep.log.size() == 50 && nonneg && worst <= 1e-10 &&
                  validate_step_sizes(r, s, StepKind::Enlarged, prob.alpha, prob.op->norm_estimate());
  return {ok, fmt("%zu logged iterations, r s = %.4g < %.4g, max E_{k+1} - E_k = %.3e, E_0 = %.3e", rep.log.size(),
                  r * s, bound, worst, *rep.log.front().energy)};
}

Outcome prox_oracles()
{
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0), pos(0.05, 3.0);
  const Grid g(1, 2);
  auto one = [&](double v) {
    Field f(g);
    f[0] = v;
    return f;
  };
  double worst_box = 0.0, worst_l1 = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double u0 = 2 * U(rng), p = 2 * U(rng), r = pos(rng), alpha = pos(rng);
    const double a = -0.1 - 0.45 * (U(rng) + 1), b = a + 0.1 + (U(rng) + 1) / 2;
    auto phi = [&](double x) { return 0.5 * alpha * x * x + p * x + (x - u0) * (x - u0) / (2 * r); };
    worst_box = std::max(worst_box, std::abs(prox_primal_box(one(u0), one(p), r, alpha, a, b)[0] -
                                             brute_force_min(phi, a, b)));
  }
  for (int t = 0; t < 100; ++t) {
    const double u0 = 2 * U(rng), p = 2 * U(rng), r = pos(rng), alpha = pos(rng), mu = 0.5 * pos(rng);
    const double a = -0.05 - (U(rng) + 1) / 2, b = 0.05 + (U(rng) + 1) / 2;
    auto phi = [&](double x) {
      return 0.5 * alpha * x * x + mu * std::abs(x) + p * x + (x - u0) * (x - u0) / (2 * r);
    };
    worst_l1 = std::max(worst_l1, std::abs(prox_primal_l1_box(one(u0), one(p), r, alpha, mu, a, b)[0] -
                                           brute_force_min(phi, a, b)));
  }
  const double sec = seconds_since(t0);
  return {worst_box <= 1e-5 && worst_l1 <= 1e-5 && sec < 1.0,
          fmt("box max dev %.2e, l1-box max dev %.2e over 100 instances each, %.3f s", worst_box, worst_l1, sec)};
}

Outcome example2_sparsity()
{
  const double mus[] = {0.0, 5e-4, 3e-3, 2e-2};
  double z[4];
  bool conv = true;
  for (int i = 0; i < 4; ++i) {
    ExampleSpec s;
    s.id = 2;
    s.mu = mus[i];
    s.n_cells = 64;
    const SolveReport rep = solve(bench::build_exact_example(s), bench::default_step_rule(s), s.tol, s.max_iter);
    conv = conv && rep.converged;
    z[i] = bench::noz(rep.u);
  }
  const bool ok = conv && z[0] >= 0.95 && z[1] >= 0.73 && z[1] <= 0.93 && z[2] >= 0.22 && z[2] <= 0.42 && z[3] == 0.0;
  return {ok, fmt("noz = %.4f (>= 0.95), %.4f in [0.73, 0.93], %.4f in [0.22, 0.42], %.4f (= 0)", z[0], z[1], z[2],
                  z[3])};
}

Outcome gradient_check()
{
  double worst = 0.0;
  int draws = 0, max_params = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    Vector sensors = Vector::LinSpaced(4, 0.0, 1.0);
    const auto boundary = seed % 2 ? nn::BoundaryFactor::XTimesXMinusOne : nn::BoundaryFactor::None;
    nn::OperatorNet net = nn::make_operator_net(sensors, 3, 2, 1, 1, boundary, rng);
    net.b0 = 0.1 * static_cast<double>(seed % 5);
    std::normal_distribution<double> d(0.0, 1.0);
    nn::TrainingSet data;
    data.inputs = nn::Matrix::NullaryExpr(5, 4, [&] { return d(rng); });
    data.points = nn::Matrix::NullaryExpr(3, 1, [&] { return 0.5 + 0.4 * d(rng); });
    data.targets = nn::Matrix::NullaryExpr(5, 3, [&] { return d(rng); });
    const Vector g = nn::grad(net, data);
    const Vector p = nn::flatten(net);
    Vector fd(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      nn::OperatorNet a = net, b = net;
      Vector pa = p, pb = p;
      pa(i) += 1e-6;
      pb(i) -= 1e-6;
      nn::unflatten(a, pa);
      nn::unflatten(b, pb);
      fd(i) = (nn::loss(a, data) - nn::loss(b, data)) / 2e-6;
    }
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
    max_params = std::max<int>(max_params, p.size());
    ++draws;
  }
  return {worst <= 1e-5, fmt("%d toy nets (<= %d parameters), max relative deviation %.2e", draws, max_params, worst)};
}

std::shared_ptr<const nn::OperatorNet> surrogate(const ExampleSpec& spec, const std::string& name)
{
  const std::string path = cache_dir + "/" + name;
  const bool cached = std::filesystem::exists(path);
  const auto t0 = Clock::now();
  auto net = std::make_shared<const nn::OperatorNet>(bench::load_or_train_surrogate(bench::surrogate_tag(spec), path));
  const nn::FidelityReport fid = bench::surrogate_fidelity(*net);
  std::printf("  %s %s: final loss %.3e, held-out mean rel. error %.3e (%.1f s)\n", cached ? "loaded" : "trained",
              name.c_str(), net->meta.final_loss, fid.mean_rel_error, seconds_since(t0));
  std::fflush(stdout);
  return net;
}

Outcome pdonet_pairs(int id, const std::vector<std::pair<double, double>>& pairs, int max_it, double gate_u,
                     double gate_y)
{
  ExampleSpec base;
  base.id = id;
  base.method = Method::PDONet;
  base.n_cells = 64;
  const auto net = surrogate(base, id == 3 ? "ex3_n64.json" : "ex4_n64_tau64.json");
  bool ok = true;
  std::string detail;
  for (auto [ks, ka] : pairs) {
    ExampleSpec s = base;
    s.k_s = ks;
    s.k_a = ka;
    const ProblemInstance prob = bench::build_surrogate_example(s, net);
    const SolveReport rep = solve(prob, bench::default_step_rule(s), s.tol, s.max_iter);
    const bool pass = rep.converged && rep.iterations <= max_it && rep.errors->u_rel <= gate_u &&
                      rep.errors->y_rel <= gate_y && rep.pde_solves == 0;
    ok = ok && pass;
    detail += fmt("%s(%g,%g): %d it, Err(u) %.2e, Err(y) %.2e, %ld solves", detail.empty() ? "" : "; ", ks, ka,
                  rep.iterations, rep.errors->u_rel, rep.errors->y_rel, rep.pde_solves);
  }
  return {ok, fmt("<= %d it, Err(u) <= %g, Err(y) <= %g: ", max_it, gate_u, gate_y) + detail};
}

Outcome example3_pdonet()
{
  return pdonet_pairs(3, {{-0.2, -1}, {0.2, 1}, {0.4, 2}, {0.6, 3}, {0.8, 4}, {1, 5}}, 60, 5e-2, 1e-2);
}

Outcome example4_pdonet()
{
  return pdonet_pairs(4, {{0.3, 500}, {0.4, 600}, {0.6, 700}, {-0.3, -500}, {-0.5, -600}}, 80, 5e-2, 2e-1);
}

Outcome discretization_order()
{
  const double alpha = 1e-5;
  std::vector<double> err;
  std::string detail;
  bool ok = true;
  for (int n : {32, 64, 128, 256}) {
    const SolveReport r = ex1.run(n, alpha, Method::PDI);
    ok = ok && r.converged;
    err.push_back(r.errors->u_abs);
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double ratio = err[i - 1] / err[i];
    ok = ok && ratio >= 3.0;
    detail += fmt("%s%.2f", i == 1 ? "" : ", ", ratio);
  }
  return {ok, fmt("alpha 1e-5, PD-I, |u - u*| = %.3e %.3e %.3e %.3e at h = 1/32..1/256, ratios ", err[0], err[1],
                  err[2], err[3]) +
                detail + " (>= 3)"};
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--cache", cache_dir, "Directory for trained surrogate models");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"step-size bounds", step_size_bounds},
    {"Example 1 iteration counts (alpha 1e-3)", table2_counts},
    {"Example 1 PD-I/PD-C ratio (alpha 1e-5)", table5_ratio},
    {"mesh independence", mesh_independence},
    {"PD / linearized ADMM equivalence", admm_equivalence},
    {"Lyapunov descent", lyapunov_descent},
    {"prox oracles", prox_oracles},
    {"Example 2 sparsity", example2_sparsity},
    {"DeepONet gradient check", gradient_check},
    {"Example 3 PD-ONet", example3_pdonet},
    {"Example 4 PD-ONet", example4_pdonet},
    {"discretization order", discretization_order},
  };

  int passed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
      continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    ++ran;
    passed += o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", passed, ran);
  return passed == ran ? 0 : 1;
}
