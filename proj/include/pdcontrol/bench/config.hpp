#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pdcontrol/bench/examples.hpp"

namespace pdc::bench {

/// Suite-wide switches read from an optional [suite] section.
struct SuiteOptions
{
  bool wall_time = true; // false keeps the CSV byte-identical across runs
  int jobs = 1;
  int log_every = 0;
};

struct SuiteConfig
{
  SuiteOptions options;
  std::vector<ExampleSpec> runs;
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline double parse_real(const std::string& key, const std::string& v)
{
  try {
    const auto slash = v.find('/');
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double num = std::stod(v.substr(0, slash), &used);
      const double den = std::stod(v.substr(slash + 1));
      return num / den;
    }
    const double x = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigurationError("key '" + key + "': '" + v + "' is not a number");
  }
}

inline long parse_int(const std::string& key, const std::string& v)
{
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigurationError("key '" + key + "': '" + v + "' is not an integer");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
  const std::string l = lower(v);
  if (l == "true" || l == "yes" || l == "on" || l == "1")
    return true;
  if (l == "false" || l == "no" || l == "off" || l == "0")
    return false;
  throw ConfigurationError("key '" + key + "': '" + v + "' is not a boolean");
}

/// Mesh width as a cell count; accepts "1/64", "0.015625" or a plain count via n_cells.
inline int cells_from_h(const std::string& key, const std::string& v)
{
  const double h = parse_real(key, v);
  if (!(h > 0.0 && h < 1.0))
    throw ConfigurationError("mesh width must lie in (0, 1)");
  const double n = 1.0 / h;
  const long r = std::lround(n);
  if (std::abs(n - static_cast<double>(r)) > 1e-9 * n)
    throw ConfigurationError("mesh width must be 1/n for an integer n");
  return static_cast<int>(r);
}

} // namespace detail

/// Applies one `key = value` pair to a spec.
inline void apply_key(ExampleSpec& spec, const std::string& key, const std::string& value)
{
  using namespace detail;
  const std::string k = lower(key);
  if (k == "example" || k == "id")
    spec.id = static_cast<int>(parse_int(k, value));
  else if (k == "method")
    spec.method = parse_method(value, &spec.apd_every);
  else if (k == "apd_every")
    spec.apd_every = static_cast<int>(parse_int(k, value));
  else if (k == "alpha")
    spec.alpha = parse_real(k, value);
  else if (k == "mu")
    spec.mu = parse_real(k, value);
  else if (k == "a")
    spec.a = parse_real(k, value);
  else if (k == "b")
    spec.b = parse_real(k, value);
  else if (k == "k_s")
    spec.k_s = parse_real(k, value);
  else if (k == "k_a")
    spec.k_a = parse_real(k, value);
  else if (k == "nu")
    spec.nu = parse_real(k, value);
  else if (k == "n_cells")
    spec.n_cells = static_cast<int>(parse_int(k, value));
  else if (k == "h")
    spec.n_cells = cells_from_h(k, value);
  else if (k == "n_time_steps")
    spec.n_time_steps = static_cast<int>(parse_int(k, value));
  else if (k == "tau")
    spec.n_time_steps = cells_from_h(k, value);
  else if (k == "r")
    spec.r = parse_real(k, value);
  else if (k == "s")
    spec.s = parse_real(k, value);
  else if (k == "tol")
    spec.tol = parse_real(k, value);
  else if (k == "max_iter")
    spec.max_iter = static_cast<int>(parse_int(k, value));
  else if (k == "seed")
    spec.seed = static_cast<std::uint64_t>(parse_int(k, value));
  else if (k == "model")
    spec.model_path = value;
  else if (k == "label")
    spec.label = value;
  else
    throw ConfigurationError("unknown key '" + key + "'");
}

inline void apply_suite_key(SuiteOptions& opt, const std::string& key, const std::string& value)
{
  using namespace detail;
  const std::string k = lower(key);
  if (k == "wall_time")
    opt.wall_time = parse_bool(k, value);
  else if (k == "jobs")
    opt.jobs = static_cast<int>(parse_int(k, value));
  else if (k == "log_every")
    opt.log_every = static_cast<int>(parse_int(k, value));
  else
    throw ConfigurationError("unknown suite key '" + key + "'");
  if (opt.jobs < 1 || opt.log_every < 0)
    throw ConfigurationError("jobs must be >= 1 and log_every >= 0");
}

/// Sections: [suite] (options), [defaults] (keys applied to every later run), [run].
/// Lines are `key = value`; `#` and `;` start comments.
inline SuiteConfig parse_config(std::istream& in)
{
  SuiteConfig cfg;
  ExampleSpec defaults;
  enum class Section { None, Suite, Defaults, Run } section = Section::None;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) { return ConfigurationError("line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos)
      line.erase(hash);
    line = detail::trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw fail("unterminated section header");
      const std::string name = detail::lower(detail::trim(line.substr(1, line.size() - 2)));
      if (name == "suite")
        section = Section::Suite;
      else if (name == "defaults")
        section = Section::Defaults;
      else if (name == "run") {
        section = Section::Run;
        cfg.runs.push_back(defaults);
      } else
        throw fail("unknown section [" + name + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw fail("expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      switch (section) {
        case Section::None: throw ConfigurationError("key outside of a section");
        case Section::Suite: apply_suite_key(cfg.options, key, value); break;
        case Section::Defaults: apply_key(defaults, key, value); break;
        case Section::Run: apply_key(cfg.runs.back(), key, value); break;
      }
    } catch (const ConfigurationError& e) {
      throw fail(e.what());
    }
  }
  for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
    try {
      cfg.runs[i].validate();
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("run " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return cfg;
}

inline SuiteConfig parse_config_string(const std::string& text)
{
  std::istringstream in(text);
  return parse_config(in);
}

inline SuiteConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigurationError("cannot read config '" + path + "'");
  return parse_config(in);
}

} // namespace pdc::bench
