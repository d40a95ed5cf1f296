#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "pdcontrol/pdcontrol.hpp"

namespace {

using namespace pdc;
using namespace pdc::bench;

struct SpecFlags
{
  int example = 1;
  std::string method = "PD-I";
  std::optional<double> alpha, mu, a, b, r, s, k_s, k_a, nu;
  std::optional<std::string> h;
  std::optional<int> n_cells, n_time_steps, apd_every, max_iter;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string label;

  void add(CLI::App* app)
  {
    app->add_option("--example", example, "example id 1..4")->required();
    app->add_option("--method", method, "PD-C, PD-I, APD(m) or PD-ONet");
    app->add_option("--alpha", alpha);
    app->add_option("--mu", mu, "L1 weight (example 2)");
    app->add_option("--a", a, "lower control bound");
    app->add_option("--b", b, "upper control bound");
    app->add_option("--k-s", k_s);
    app->add_option("--k-a", k_a);
    app->add_option("--nu", nu);
    app->add_option("--n-cells", n_cells);
    app->add_option("--h", h, "mesh width, e.g. 1/64");
    app->add_option("--n-time-steps", n_time_steps);
    app->add_option("--apd-every", apd_every);
    app->add_option("--r", r);
    app->add_option("--s", s);
    app->add_option("--tol", tol);
    app->add_option("--max-iter", max_iter);
    app->add_option("--seed", seed);
    app->add_option("--model", model, "trained surrogate (PD-ONet)");
    app->add_option("--label", label);
  }

  ExampleSpec spec() const
  {
    ExampleSpec sp;
    apply_key(sp, "example", std::to_string(example));
    apply_key(sp, "method", method);
    if (alpha) sp.alpha = *alpha;
    sp.mu = mu;
    sp.a = a;
    sp.b = b;
    if (k_s) sp.k_s = *k_s;
    if (k_a) sp.k_a = *k_a;
    if (nu) sp.nu = *nu;
    if (h) apply_key(sp, "h", *h);
    if (n_cells) sp.n_cells = *n_cells;
    if (n_time_steps) sp.n_time_steps = *n_time_steps;
    if (apd_every) sp.apd_every = *apd_every;
    sp.r = r;
    sp.s = s;
    if (tol) sp.tol = *tol;
    if (max_iter) sp.max_iter = *max_iter;
    if (seed) sp.seed = *seed;
    sp.model_path = model;
    sp.label = label;
    sp.validate();
    return sp;
  }
};

void print_row(const RunRow& row)
{
  std::printf("%s example=%d h=%.6g iterations=%d pde_solves=%ld converged=%s", row.method.c_str(), row.example,
              row.mesh_h, row.iterations, row.pde_solves, row.converged ? "yes" : "no");
  if (row.objective)
    std::printf(" objective=%.8e", *row.objective);
  if (row.errors)
    std::printf(" err_u=%.4e (rel %.4e) err_y=%.4e (rel %.4e)", row.errors->u_abs, row.errors->u_rel,
                row.errors->y_abs, row.errors->y_rel);
  if (row.noz)
    std::printf(" noz=%.4f", *row.noz);
  if (!row.step_verdict.empty())
    std::printf(" steps=%s", row.step_verdict.c_str());
  if (!row.error.empty())
    std::printf(" error=\"%s\"", row.error.c_str());
  std::printf("\n");
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Primal-dual solvers for PDE-constrained optimal control"};
  app.require_subcommand(1);

  SpecFlags solve_flags;
  std::string solve_out;
  int solve_log_every = 0;
  bool solve_no_wall = false;
  auto* solve_cmd = app.add_subcommand("solve", "solve one example");
  solve_cmd->set_help_flag("--help", "print this help message and exit"); // -h would clash with --h
  solve_flags.add(solve_cmd);
  solve_cmd->add_option("--out", solve_out, "report stem; writes <stem>.csv and <stem>.json");
  solve_cmd->add_option("--log-every", solve_log_every, "emit a log row every k iterations");
  solve_cmd->add_flag("--no-wall-time", solve_no_wall, "leave wall_time_s empty");

  std::string bench_config, bench_out = "bench";
  std::optional<int> bench_log_every, bench_jobs;
  bool bench_no_wall = false;
  auto* bench_cmd = app.add_subcommand("bench", "run a config file of experiments");
  bench_cmd->add_option("config", bench_config, "suite config")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--out", bench_out, "report stem");
  bench_cmd->add_option("--log-every", bench_log_every);
  bench_cmd->add_option("--jobs", bench_jobs);
  bench_cmd->add_flag("--no-wall-time", bench_no_wall);

  int train_example = 3, train_cells = 64, train_n1 = 1000, train_iters = 20000, train_log_every = 1000;
  std::optional<int> train_steps;
  double train_lr = 1e-3, train_nu = 1.0;
  std::uint64_t train_seed = 1;
  std::string train_out = "model.json";
  auto* train_cmd = app.add_subcommand("train", "train the DeepONet surrogate for example 3 or 4");
  train_cmd->add_option("--example", train_example)->check(CLI::IsMember({3, 4}));
  train_cmd->add_option("--n-cells", train_cells);
  train_cmd->add_option("--n-time-steps", train_steps, "example 4; defaults to n-cells");
  train_cmd->add_option("--nu", train_nu, "example 3 diffusion");
  train_cmd->add_option("--n1", train_n1, "number of GRF input functions");
  train_cmd->add_option("--iterations", train_iters);
  train_cmd->add_option("--lr", train_lr);
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_option("--out", train_out, "model file");
  train_cmd->add_option("--log-every", train_log_every, "print the loss every k iterations (0: never)");

  std::string eval_model, eval_out;
  int eval_draws = 100;
  double eval_gate = 5e-2;
  std::uint64_t eval_seed = 0x5eed0fULL;
  auto* eval_cmd = app.add_subcommand("eval", "held-out fidelity report for a trained surrogate");
  eval_cmd->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--draws", eval_draws);
  eval_cmd->add_option("--gate", eval_gate);
  eval_cmd->add_option("--seed", eval_seed);
  eval_cmd->add_option("--out", eval_out, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      const ExampleSpec spec = solve_flags.spec();
      SuiteOptions opt;
      opt.log_every = solve_log_every;
      opt.wall_time = !solve_no_wall;
      BenchReport rep;
      rep.rows.push_back(run_spec(spec, opt));
      for (const auto& l : rep.rows.front().log)
        std::printf("k=%d measure=%.6e objective=%.10e\n", l.k, l.stop_measure, l.objective);
      print_row(rep.rows.front());
      if (!solve_out.empty())
        write_report(rep, solve_out);
      return rep.exit_code();
    }
    if (*bench_cmd) {
      SuiteConfig cfg = load_config(bench_config);
      if (bench_log_every)
        cfg.options.log_every = *bench_log_every;
      if (bench_jobs)
        cfg.options.jobs = std::max(1, *bench_jobs);
      if (bench_no_wall)
        cfg.options.wall_time = false;
      const BenchReport rep = run_suite(cfg);
      for (const auto& row : rep.rows)
        print_row(row);
      write_report(rep, bench_out);
      return rep.exit_code();
    }
    if (*train_cmd) {
      ExampleSpec spec;
      spec.id = train_example;
      spec.n_cells = train_cells;
      spec.n_time_steps = train_steps;
      spec.nu = train_nu;
      SurrogateTraining setup;
      setup.n_functions = train_n1;
      setup.config.iterations = train_iters;
      setup.config.lr = train_lr;
      setup.config.seed = train_seed;
      if (train_log_every > 0) {
        setup.config.record_every = train_log_every;
        setup.config.progress = [](int it, double loss) {
          std::printf("iteration %d loss %.6e\n", it, loss);
          std::fflush(stdout);
        };
      }
      const nn::TrainResult res = train_surrogate(surrogate_tag(spec), setup);
      nn::save_model(res.net, train_out);
      const nn::FidelityReport fr = surrogate_fidelity(res.net);
      std::printf("final loss %.6e, held-out mean relative error %.4e (max %.4e), gate %s\n", res.net.meta.final_loss,
                  fr.mean_rel_error, fr.max_rel_error, fr.passes() ? "passed" : "FAILED");
      return fr.passes() ? 0 : 1;
    }
    if (*eval_cmd) {
      const nn::OperatorNet net = nn::load_model(eval_model);
      const nn::FidelityReport fr = nn::evaluate_fidelity(net, tag_operator(net.op), eval_draws, eval_seed);
      nlohmann::json j{{"model", eval_model},
                       {"draws", fr.draws},
                       {"mean_rel_error", fr.mean_rel_error},
                       {"max_rel_error", fr.max_rel_error},
                       {"gate", eval_gate},
                       {"passes", fr.passes(eval_gate)}};
      if (eval_out.empty())
        std::cout << j.dump(2) << '\n';
      else
        write_text(eval_out, j.dump(2) + "\n");
      return fr.passes(eval_gate) ? 0 : 1;
    }
  } catch (const pdc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
