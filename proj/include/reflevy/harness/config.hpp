/*
   Copyright 2026 The reflevy Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/boundary_law.hpp"
#include "reflevy/model.hpp"
#include "reflevy/path.hpp"
#include "reflevy/rng.hpp"

namespace reflevy::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + raw + "'");
  }
  if (used != s.size() || !std::isfinite(d)) throw ConfigError(key + ": not a number: '" + raw + "'");
  return d;
}

inline std::int64_t parse_int(const std::string& key, const std::string& raw) {
  const double d = parse_double(key, raw);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ConfigError(key + ": not an integer: '" + raw + "'");
  return static_cast<std::int64_t>(d);
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an unsigned integer: '" + raw + "'");
  }
  if (used != s.size() || s.front() == '-') throw ConfigError(key + ": not an unsigned integer: '" + raw + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + raw + "'");
}

/// Comma or whitespace separated reals.
inline std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::string s = raw;
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_double(key, tok));
  return out;
}

inline std::string format_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace detail

/// Scenario-specific keys from the [params] section, with defaults filled in
/// by the scenario before it runs.
class Params {
 public:
  void set(const std::string& k, const std::string& v) { values_[k] = detail::trim(v); }
  void set_default(const std::string& k, const std::string& v) { values_.emplace(k, v); }
  bool has(const std::string& k) const { return values_.count(k) != 0; }

  const std::string& str(const std::string& k) const {
    auto it = values_.find(k);
    if (it == values_.end()) throw ConfigError("params." + k + ": missing");
    return it->second;
  }
  double num(const std::string& k) const { return detail::parse_double("params." + k, str(k)); }
  std::int64_t integer(const std::string& k) const {
    return detail::parse_int("params." + k, str(k));
  }
  bool flag(const std::string& k) const { return detail::parse_bool("params." + k, str(k)); }
  std::vector<double> list(const std::string& k) const {
    return detail::parse_list("params." + k, str(k));
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t master_seed = 1;
  std::int64_t n_paths = 1;
  std::string out_dir = "out";
  std::string cache_dir;  ///< empty: <out_dir>/ref-cache
  unsigned threads = 0;   ///< 0: hardware concurrency; not part of the echo
  std::int64_t export_paths = 0;

  double beta = 2.0;
  std::string theta = "builtin";  ///< builtin | table:FILE
  std::string mu = "dirac:1";
  SimGrid grid{1e-3, 1.0, 1};
  std::vector<double> epsilon_ladder{1e-4};
  Params params;

  ForceField force_field() const {
    if (theta == "builtin") return ForceField::builtin(beta);
    if (theta.rfind("table:", 0) == 0) return ForceField::from_table_file(beta, theta.substr(6));
    throw ConfigError("model.theta: expected 'builtin' or 'table:FILE', got '" + theta + "'");
  }

  BoundaryLaw boundary_law() const {
    try {
      return BoundaryLaw::parse(mu);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("mu.law: ") + e.what());
    }
  }

  std::string resolved_cache_dir() const {
    return cache_dir.empty() ? out_dir + "/ref-cache" : cache_dir;
  }

  /// Checks that do not depend on the scenario catalog.
  void validate_base() const {
    if (scenario.empty()) throw ConfigError("run.scenario: missing");
    if (n_paths < 1) throw ConfigError("run.paths: must be >= 1");
    if (export_paths < 0) throw ConfigError("run.export_paths: must be >= 0");
    if (out_dir.empty()) throw ConfigError("run.out_dir: empty");
    check_beta(beta);
    (void)boundary_law();
    try {
      grid.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (epsilon_ladder.empty()) throw ConfigError("grid.epsilons: empty ladder");
    for (std::size_t i = 0; i < epsilon_ladder.size(); ++i) {
      if (!(epsilon_ladder[i] > 0.0)) throw ConfigError("grid.epsilons: entries must be > 0");
      if (i > 0 && !(epsilon_ladder[i] < epsilon_ladder[i - 1]))
        throw ConfigError("grid.epsilons: ladder must be strictly decreasing");
    }
  }

  /// Sets one "section.key" entry. CLI overrides go through here too.
  void set(const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw ConfigError("config key must be section.key: " + key);
    const std::string sec = key.substr(0, dot), k = key.substr(dot + 1);
    const std::string v = detail::trim(value);
    if (sec == "params") {
      params.set(k, v);
      return;
    }
    if (sec == "run") {
      if (k == "scenario") scenario = v;
      else if (k == "seed") master_seed = detail::parse_seed(key, v);
      else if (k == "paths") n_paths = detail::parse_int(key, v);
      else if (k == "out_dir") out_dir = v;
      else if (k == "cache_dir") cache_dir = v;
      else if (k == "threads") {
        const auto n = detail::parse_int(key, v);
        if (n < 0) throw ConfigError(key + ": must be >= 0");
        threads = static_cast<unsigned>(n);
      } else if (k == "export_paths") export_paths = detail::parse_int(key, v);
      else throw ConfigError("unknown config key: " + key);
    } else if (sec == "model") {
      if (k == "beta") beta = detail::parse_double(key, v);
      else if (k == "theta") theta = v;
      else throw ConfigError("unknown config key: " + key);
    } else if (sec == "mu") {
      if (k == "law") mu = v;
      else throw ConfigError("unknown config key: " + key);
    } else if (sec == "grid") {
      if (k == "dt") grid.dt = detail::parse_double(key, v);
      else if (k == "horizon") grid.horizon = detail::parse_double(key, v);
      else if (k == "record_stride") {
        const auto n = detail::parse_int(key, v);
        if (n < 1) throw ConfigError(key + ": must be >= 1");
        grid.record_stride = static_cast<std::size_t>(n);
      } else if (k == "epsilons") epsilon_ladder = detail::parse_list(key, v);
      else throw ConfigError("unknown config key: " + key);
    } else {
      throw ConfigError("unknown config section: " + sec);
    }
  }

  /// Canonical form echoed into every report. Doubles are stored as JSON
  /// numbers, which nlohmann prints in shortest round-trip form.
  nlohmann::json echo() const {
    nlohmann::json j;
    j["run"] = {{"scenario", scenario},
                {"seed", master_seed},
                {"paths", n_paths},
                {"out_dir", out_dir},
                {"cache_dir", resolved_cache_dir()},
                {"export_paths", export_paths}};
    j["model"] = {{"beta", beta}, {"theta", theta}};
    j["mu"] = {{"law", boundary_law().describe()}};
    j["grid"] = {{"dt", grid.dt},
                 {"horizon", grid.horizon},
                 {"record_stride", grid.record_stride},
                 {"epsilons", epsilon_ladder}};
    j["params"] = params.values();
    j["prng_family"] = std::string(kPrngFamily);
    return j;
  }

  /// INI text that parses back to the same configuration.
  std::string to_ini() const {
    std::ostringstream os;
    os << "[run]\nscenario = " << scenario << "\nseed = " << master_seed
       << "\npaths = " << n_paths << "\nout_dir = " << out_dir << "\n";
    if (!cache_dir.empty()) os << "cache_dir = " << cache_dir << "\n";
    os << "export_paths = " << export_paths << "\n\n[model]\nbeta = "
       << detail::format_double(beta) << "\ntheta = " << theta << "\n\n[mu]\nlaw = " << mu
       << "\n\n[grid]\ndt = " << detail::format_double(grid.dt)
       << "\nhorizon = " << detail::format_double(grid.horizon)
       << "\nrecord_stride = " << grid.record_stride << "\nepsilons =";
    for (std::size_t i = 0; i < epsilon_ladder.size(); ++i)
      os << (i ? ", " : " ") << detail::format_double(epsilon_ladder[i]);
    os << "\n";
    if (!params.values().empty()) {
      os << "\n[params]\n";
      for (const auto& [k, v] : params.values()) os << k << " = " << v << "\n";
    }
    return os.str();
  }
};

inline ScenarioConfig parse_config(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ScenarioConfig c;
  for (const auto& [sec, body] : pt) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config key outside a section: " + sec);
    for (const auto& [k, v] : body) c.set(sec + "." + k, v.data());
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse_config(f);
}

}  // namespace reflevy::harness
