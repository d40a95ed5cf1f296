#pragma once

#include <algorithm>
#include <future>
#include <string>
#include <vector>

#include "pdcontrol/bench/config.hpp"
#include "pdcontrol/bench/report.hpp"
#include "pdcontrol/bench/surrogates.hpp"

namespace pdc::bench {

inline std::string method_label(const ExampleSpec& spec)
{
  return spec.label.empty() ? to_string(spec.method, spec.apd_every) : spec.label;
}

/// Builds and solves one spec. Solver errors are recorded in the row, not thrown.
inline RunRow run_spec(const ExampleSpec& spec, const SuiteOptions& options = {})
{
  RunRow row;
  row.method = method_label(spec);
  row.label = spec.label;
  row.example = spec.id;
  row.mesh_h = 1.0 / spec.n_cells;
  if (spec.parabolic())
    row.mesh_tau = 1.0 / spec.n_time_steps.value_or(spec.n_cells);
  try {
    const ProblemInstance prob = build_example(spec);
    SolveOptions so;
    so.log_every = options.log_every;
    const SolveReport rep = solve(prob, default_step_rule(spec), spec.tol, spec.max_iter, so);
    row.iterations = rep.iterations;
    row.pde_solves = rep.pde_solves;
    row.converged = rep.converged;
    row.objective = rep.objective;
    row.errors = rep.errors;
    if (spec.id == 2)
      row.noz = noz(rep.u);
    if (options.wall_time)
      row.wall_time_s = rep.wall_time;
    row.step_verdict = to_string(rep.step_verdict);
    row.log = rep.log;
  } catch (const Error& e) {
    row.converged = false;
    row.error = e.what();
  }
  return row;
}

/// Runs every spec, up to options.jobs at a time, and keeps config order.
inline BenchReport run_suite(const SuiteConfig& cfg)
{
  BenchReport rep;
  rep.rows.resize(cfg.runs.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg.options.jobs));
  for (std::size_t start = 0; start < cfg.runs.size(); start += jobs) {
    const std::size_t stop = std::min(cfg.runs.size(), start + jobs);
    if (jobs == 1) {
      rep.rows[start] = run_spec(cfg.runs[start], cfg.options);
      continue;
    }
    std::vector<std::future<RunRow>> batch;
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, [&cfg, i] { return run_spec(cfg.runs[i], cfg.options); }));
    for (std::size_t i = start; i < stop; ++i)
      rep.rows[i] = batch[i - start].get();
  }
  return rep;
}

/// Loads the config, runs it and writes <out_stem>.csv / .json.
inline BenchReport run_suite(const std::string& config_path, const std::string& out_stem)
{
  const SuiteConfig cfg = load_config(config_path);
  BenchReport rep = run_suite(cfg);
  write_report(rep, out_stem);
  return rep;
}

} // namespace pdc::bench
