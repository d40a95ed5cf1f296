#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdcontrol/bench/examples.hpp"
#include "pdcontrol/pd_solver.hpp"

namespace pdc::bench {

struct RunRow
{
  std::string method;
  std::string label;
  int example = 0;
  double mesh_h = 0.0;
  std::optional<double> mesh_tau;
  int iterations = 0;
  long pde_solves = 0;
  bool converged = false;
  std::optional<double> objective;
  std::optional<ErrorNorms> errors;
  std::optional<double> noz;
  std::optional<double> wall_time_s;
  std::string step_verdict;
  std::string error; // set when the run threw
  std::vector<LogRow> log;
};

struct BenchReport
{
  std::vector<RunRow> rows;

  bool all_converged() const
  {
    for (const auto& r : rows)
      if (!r.converged)
        return false;
    return true;
  }
  int exit_code() const { return all_converged() ? 0 : 1; }
};

inline const char* csv_header()
{
  return "method,mesh_h,mesh_tau,iterations,pde_solves,objective,err_u_abs,err_u_rel,err_y_abs,err_y_rel,noz,"
         "wall_time_s";
}

namespace detail {

inline std::string num(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string opt(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

} // namespace detail

inline std::string to_csv(const BenchReport& rep)
{
  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& r : rep.rows) {
    const auto& e = r.errors;
    out << r.method << ',' << detail::num(r.mesh_h) << ',' << detail::opt(r.mesh_tau) << ',' << r.iterations << ','
        << r.pde_solves << ',' << detail::opt(r.objective) << ','
        << detail::opt(e ? std::optional<double>(e->u_abs) : std::nullopt) << ','
        << detail::opt(e ? std::optional<double>(e->u_rel) : std::nullopt) << ','
        << detail::opt(e ? std::optional<double>(e->y_abs) : std::nullopt) << ','
        << detail::opt(e ? std::optional<double>(e->y_rel) : std::nullopt) << ',' << detail::opt(r.noz) << ','
        << detail::opt(r.wall_time_s) << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const RunRow& r)
{
  nlohmann::json j;
  j["method"] = r.method;
  j["label"] = r.label;
  j["example"] = r.example;
  j["mesh_h"] = r.mesh_h;
  j["mesh_tau"] = r.mesh_tau ? nlohmann::json(*r.mesh_tau) : nlohmann::json();
  j["iterations"] = r.iterations;
  j["pde_solves"] = r.pde_solves;
  j["converged"] = r.converged;
  j["objective"] = r.objective ? nlohmann::json(*r.objective) : nlohmann::json();
  if (r.errors)
    j["errors"] = {{"u_abs", r.errors->u_abs}, {"u_rel", r.errors->u_rel}, {"y_abs", r.errors->y_abs},
                   {"y_rel", r.errors->y_rel}};
  else
    j["errors"] = nullptr;
  j["noz"] = r.noz ? nlohmann::json(*r.noz) : nlohmann::json();
  j["wall_time_s"] = r.wall_time_s ? nlohmann::json(*r.wall_time_s) : nlohmann::json();
  j["step_verdict"] = r.step_verdict;
  if (!r.error.empty())
    j["error"] = r.error;
  if (!r.log.empty()) {
    auto& log = j["log"] = nlohmann::json::array();
    for (const auto& row : r.log) {
      nlohmann::json e{{"k", row.k}, {"stop_measure", row.stop_measure}, {"objective", row.objective}};
      if (row.energy)
        e["energy"] = *row.energy;
      if (row.kkt)
        e["kkt"] = *row.kkt;
      log.push_back(e);
    }
  }
  return j;
}

inline nlohmann::json to_json(const BenchReport& rep)
{
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : rep.rows)
    j["runs"].push_back(to_json(r));
  j["all_converged"] = rep.all_converged();
  return j;
}

inline void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigurationError("cannot write '" + path + "'");
  out << text;
}

/// Writes <stem>.csv and <stem>.json; a stem ending in .csv is stripped first.
inline void write_report(const BenchReport& rep, std::string stem)
{
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0)
    stem.resize(stem.size() - 4);
  write_text(stem + ".csv", to_csv(rep));
  write_text(stem + ".json", to_json(rep).dump(2) + "\n");
}

} // namespace pdc::bench
