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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/path.hpp"
#include "reflevy/rng.hpp"

namespace reflevy::harness {

inline constexpr int kSchemaVersion = 1;

enum class Cmp { lt, le, gt, ge, within };

inline const char* to_string(Cmp c) {
  switch (c) {
    case Cmp::lt: return "<";
    case Cmp::le: return "<=";
    case Cmp::gt: return ">";
    case Cmp::ge: return ">=";
    case Cmp::within: return "within";
  }
  return "?";
}

/// One gated number. `criterion` groups metrics into pass flags.
struct Metric {
  std::string name;
  double value = 0.0;
  Cmp cmp = Cmp::lt;
  double threshold = 0.0;
  double tolerance = 0.0;  ///< only for Cmp::within: |value - threshold| <= tolerance
  std::string criterion;
  std::string provenance;

  bool pass() const {
    if (!std::isfinite(value)) return false;
    switch (cmp) {
      case Cmp::lt: return value < threshold;
      case Cmp::le: return value <= threshold;
      case Cmp::gt: return value > threshold;
      case Cmp::ge: return value >= threshold;
      case Cmp::within: return std::abs(value - threshold) <= tolerance;
    }
    return false;
  }

  nlohmann::json to_json() const {
    nlohmann::json t = {{"op", to_string(cmp)}, {"value", threshold}};
    if (cmp == Cmp::within) t["tolerance"] = tolerance;
    nlohmann::json j = {{"name", name},
                        {"threshold", t},
                        {"criterion", criterion},
                        {"provenance", provenance},
                        {"pass", pass()}};
    // NaN is not valid JSON
    if (std::isfinite(value)) j["value"] = value;
    else j["value"] = nullptr;
    return j;
  }
};

struct ExperimentReport {
  std::string scenario;
  nlohmann::json config;
  std::vector<Metric> metrics;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::optional<std::string> error;  ///< set when the run aborted
  double wall_time = 0.0;            ///< seconds; written to timing.json only

  Metric& add(Metric m) {
    metrics.push_back(std::move(m));
    return metrics.back();
  }

  Metric& check(std::string name, double value, Cmp cmp, double threshold, std::string criterion,
                std::string provenance) {
    return add({std::move(name), value, cmp, threshold, 0.0, std::move(criterion),
                std::move(provenance)});
  }

  Metric& check_within(std::string name, double value, double target, double tol,
                       std::string criterion, std::string provenance) {
    return add({std::move(name), value, Cmp::within, target, tol, std::move(criterion),
                std::move(provenance)});
  }

  const Metric* find(const std::string& name) const {
    for (const auto& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }

  /// Criterion -> all of its metrics pass.
  std::map<std::string, bool> pass_flags() const {
    std::map<std::string, bool> f;
    for (const auto& m : metrics) {
      auto [it, fresh] = f.emplace(m.criterion, true);
      it->second = it->second && m.pass();
    }
    return f;
  }

  bool all_pass() const {
    if (error || metrics.empty()) return false;
    for (const auto& m : metrics)
      if (!m.pass()) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = scenario;
    j["prng_family"] = std::string(kPrngFamily);
    j["config"] = config;
    j["metrics"] = nlohmann::json::array();
    for (const auto& m : metrics) j["metrics"].push_back(m.to_json());
    j["pass"] = pass_flags();
    j["all_pass"] = all_pass();
    j["diagnostics"] = diagnostics;
    j["warnings"] = warnings;
    j["status"] = error ? "aborted" : "complete";
    if (error) j["error"] = *error;
    return j;
  }
};

/// All files of one run live under out_dir. Only the coordinating thread
/// writes.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::string out_dir) : dir_(std::move(out_dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const { return dir_ + "/" + name; }

  void write_text(const std::string& name, const std::string& text) const {
    const std::string p = path(name), tmp = p + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + tmp);
      f << text;
      if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, p);
  }

  void write_json(const std::string& name, const nlohmann::json& j) const {
    write_text(name, j.dump(2) + "\n");
  }

  void write_report(const ExperimentReport& r) const {
    write_json("report.json", r.to_json());
    write_json("timing.json", {{"scenario", r.scenario}, {"wall_time", r.wall_time}});
  }

  /// samples_<name>.csv (one column, header "value") plus a JSON sidecar.
  void write_samples(const std::string& name, const std::vector<double>& xs,
                     const nlohmann::json& meta = nlohmann::json::object()) const {
    std::string s = "value\n";
    s.reserve(xs.size() * 24 + 8);
    char buf[40];
    for (double x : xs) {
      std::snprintf(buf, sizeof buf, "%.17g\n", x);
      s += buf;
    }
    write_text("samples_" + name + ".csv", s);
    nlohmann::json side = meta;
    side["name"] = name;
    side["n"] = xs.size();
    write_json("samples_" + name + ".json", side);
  }

  /// paths.csv and events.csv from the exported paths (possibly none).
  void write_paths(const std::vector<PathSample>& paths) const {
    std::ostringstream p, e;
    write_paths_header(p);
    write_events_header(e);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      write_path_rows(p, i, paths[i]);
      write_event_rows(e, i, paths[i]);
    }
    write_text("paths.csv", p.str());
    write_text("events.csv", e.str());
  }

 private:
  std::string dir_;
};

}  // namespace reflevy::harness
