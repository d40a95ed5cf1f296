#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pdcontrol/errors.hpp"
#include "pdcontrol/nn/deeponet.hpp"

namespace pdc::nn {

inline constexpr const char* model_schema = "pdcontrol.deeponet";
inline constexpr int model_version = 1;

namespace detail {

inline nlohmann::json mlp_to_json(const MLP& mlp)
{
  nlohmann::json j;
  j["widths"] = mlp.widths;
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (int l = 0; l < mlp.layers(); ++l) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(mlp.weights[l].size()));
    for (Eigen::Index r = 0; r < mlp.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < mlp.weights[l].cols(); ++c)
        w.push_back(mlp.weights[l](r, c));
    j["weights"].push_back(w);
    j["biases"].push_back(std::vector<double>(mlp.biases[l].data(), mlp.biases[l].data() + mlp.biases[l].size()));
  }
  return j;
}

inline MLP mlp_from_json(const nlohmann::json& j)
{
  MLP mlp(j.at("widths").get<std::vector<int>>());
  const auto& ws = j.at("weights");
  const auto& bs = j.at("biases");
  if (static_cast<int>(ws.size()) != mlp.layers() || static_cast<int>(bs.size()) != mlp.layers())
    throw ShapeError("model file: layer count does not match widths");
  for (int l = 0; l < mlp.layers(); ++l) {
    const auto w = ws[l].get<std::vector<double>>();
    const auto b = bs[l].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != mlp.weights[l].size() ||
        static_cast<Eigen::Index>(b.size()) != mlp.biases[l].size())
      throw ShapeError("model file: layer " + std::to_string(l) + " has the wrong size");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < mlp.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < mlp.weights[l].cols(); ++c)
        mlp.weights[l](r, c) = w[k++];
    for (Eigen::Index i = 0; i < mlp.biases[l].size(); ++i)
      mlp.biases[l](i) = b[static_cast<std::size_t>(i)];
  }
  return mlp;
}

} // namespace detail

inline nlohmann::json to_json(const OperatorNet& net)
{
  nlohmann::json j;
  j["schema"] = model_schema;
  j["version"] = model_version;
  j["branch"] = detail::mlp_to_json(net.branch);
  j["trunk"] = detail::mlp_to_json(net.trunk);
  j["b0"] = net.b0;
  j["sensors"] = std::vector<double>(net.sensors.data(), net.sensors.data() + net.sensors.size());
  j["boundary"] = to_string(net.boundary);
  j["input_scale"] = net.input_scale;
  j["operator"] = {{"nu", net.op.nu}, {"c", net.op.c}, {"tau", net.op.tau}, {"n_cells", net.op.n_cells}};
  j["training"] = {{"seed", net.meta.seed},
                   {"iterations", net.meta.iterations},
                   {"final_loss", net.meta.final_loss},
                   {"n_functions", net.meta.n_functions}};
  return j;
}

inline OperatorNet from_json(const nlohmann::json& j)
{
  try {
    if (j.at("schema").get<std::string>() != model_schema)
      throw ConfigurationError("not a DeepONet model file");
    if (j.at("version").get<int>() != model_version)
      throw ConfigurationError("unsupported model version " + std::to_string(j.at("version").get<int>()));
    OperatorNet net;
    net.branch = detail::mlp_from_json(j.at("branch"));
    net.trunk = detail::mlp_from_json(j.at("trunk"));
    net.b0 = j.at("b0").get<double>();
    const auto s = j.at("sensors").get<std::vector<double>>();
    net.sensors = Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
    net.boundary = parse_boundary(j.at("boundary").get<std::string>());
    net.input_scale = j.value("input_scale", 0.0);
    if (j.contains("operator")) {
      const auto& o = j["operator"];
      net.op.nu = o.value("nu", 1.0);
      net.op.c = o.value("c", 0.0);
      net.op.tau = o.value("tau", 0.0);
      net.op.n_cells = o.value("n_cells", static_cast<int>(s.size()) - 1);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      net.meta.seed = t.value("seed", std::uint64_t{0});
      net.meta.iterations = t.value("iterations", 0);
      net.meta.final_loss = t.value("final_loss", 0.0);
      net.meta.n_functions = t.value("n_functions", 0);
    }
    net.check();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const OperatorNet& net, const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw ConfigurationError("cannot write model file '" + path + "'");
  out << to_json(net).dump(1) << '\n';
}

inline OperatorNet load_model(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigurationError("cannot read model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

} // namespace pdc::nn
