#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>

#include "pdcontrol/bench/examples.hpp"
#include "pdcontrol/nn/serialize.hpp"
#include "pdcontrol/nn/surrogate.hpp"
#include "pdcontrol/nn/train.hpp"

namespace pdc::bench {

/// Elliptic operator the surrogate of an example approximates:
/// Example 3 the state operator itself, Example 4 one backward-Euler step.
inline nn::OperatorTag surrogate_tag(const ExampleSpec& spec)
{
  if (spec.id == 3)
    return {spec.nu, 1.0, 0.0, spec.n_cells};
  if (spec.id == 4) {
    const double tau = spec.grid().tau();
    return {tau, 1.0, tau, spec.n_cells};
  }
  throw ConfigurationError("surrogates exist for examples 3 and 4 only");
}

inline SolutionOperator tag_operator(const nn::OperatorTag& tag)
{
  return make_elliptic_operator(Grid(1, tag.n_cells), {tag.nu, tag.c});
}

struct SurrogateTraining
{
  int n_functions = 1000;
  nn::TrainConfig config;
};

/// Generates the GRF dataset for the example's operator and trains a net on it.
inline nn::TrainResult train_surrogate(const nn::OperatorTag& tag, const SurrogateTraining& setup)
{
  const SolutionOperator exact = tag_operator(tag);
  const nn::TrainingSet data = nn::generate_dataset(exact, setup.n_functions, tag.n_cells + 1, setup.config.seed);
  nn::TrainResult res = nn::train(data, setup.config);
  res.net.op = tag;
  return res;
}

inline nn::FidelityReport surrogate_fidelity(const nn::OperatorNet& net, int draws = 100)
{
  return nn::evaluate_fidelity(net, tag_operator(net.op), draws);
}

namespace detail {

inline void require_matching(const nn::OperatorNet& net, const nn::OperatorTag& want)
{
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  if (net.op.n_cells != want.n_cells || net.m() != want.n_cells + 1)
    throw ConfigurationError("model was trained on " + std::to_string(net.op.n_cells) + " cells, run uses " +
                             std::to_string(want.n_cells));
  if (want.tau > 0.0 && !close(net.op.tau, want.tau))
    throw ConfigurationError("model trained for tau = " + std::to_string(net.op.tau) + ", run uses tau = " +
                             std::to_string(want.tau));
  if (!close(net.op.nu, want.nu) || !close(net.op.c, want.c) || (want.tau == 0.0 && net.op.tau != 0.0))
    throw ConfigurationError("model was trained for a different operator");
}

} // namespace detail

/// Loads the model at `path` if it exists and matches `tag`; otherwise trains one and saves it there.
inline nn::OperatorNet load_or_train_surrogate(const nn::OperatorTag& tag, const std::string& path,
                                               const SurrogateTraining& setup = {})
{
  namespace fs = std::filesystem;
  if (fs::exists(path)) {
    nn::OperatorNet net = nn::load_model(path);
    detail::require_matching(net, tag);
    return net;
  }
  nn::OperatorNet net = train_surrogate(tag, setup).net;
  const fs::path target(path);
  if (target.has_parent_path())
    fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  nn::save_model(net, tmp);
  fs::rename(tmp, target);
  return net;
}

/// PD-ONet instance: the exact operator is only used for its norm and the fidelity gate.
inline ProblemInstance build_surrogate_example(const ExampleSpec& spec, std::shared_ptr<const nn::OperatorNet> net)
{
  if (spec.id != 3 && spec.id != 4)
    throw ConfigurationError("PD-ONet is defined for examples 3 and 4 only");
  if (!net)
    throw ConfigurationError("PD-ONet needs a trained model");
  ExampleSpec exact_spec = spec;
  exact_spec.method = Method::PDI;
  exact_spec.model_path.clear();
  ExampleData d = example_data(exact_spec);
  detail::require_matching(*net, surrogate_tag(spec));
  nn::require_fidelity(surrogate_fidelity(*net));

  SolutionOperator exact = exact_operator(exact_spec, d);
  const double norm_s = estimate_operator_norm(exact).value;
  auto op = std::make_shared<SolutionOperator>(
    spec.id == 3 ? nn::as_solution_operator(net, d.grid, d.f, norm_s)
                 : nn::surrogate_parabolic_operator(net, d.grid, d.f, d.phi, norm_s));
  ProblemInstance prob;
  prob.op = op;
  prob.y_d = d.y_d;
  prob.alpha = spec.alpha;
  prob.reg = d.reg;
  prob.exact = d.exact;
  return prob;
}

/// Exact or surrogate instance depending on the method.
inline ProblemInstance build_example(const ExampleSpec& spec)
{
  spec.validate();
  if (spec.method == Method::PDONet)
    return build_surrogate_example(spec, std::make_shared<const nn::OperatorNet>(nn::load_model(spec.model_path)));
  return build_exact_example(spec);
}

} // namespace pdc::bench
