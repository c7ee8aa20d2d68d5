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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "reflevy/analysis.hpp"
#include "reflevy/harness/config.hpp"
#include "reflevy/harness/reference.hpp"
#include "reflevy/harness/report.hpp"
#include "reflevy/model.hpp"
#include "reflevy/path.hpp"

namespace reflevy::harness {

/// Everything a scenario body needs. Scenario bodies run on the
/// coordinating thread and fan out through parallel_map.
struct RunContext {
  const ScenarioConfig& cfg;
  ForceField ff;
  StableParams sp;
  unsigned threads;
  ExperimentReport& report;
  const ArtifactWriter& out;
  std::vector<PathSample> exported;

  const Params& params() const { return cfg.params; }
  std::size_t n_paths() const { return static_cast<std::size_t>(cfg.n_paths); }
  bool exports(std::size_t i) const { return static_cast<std::int64_t>(i) < cfg.export_paths; }

  std::vector<double> reference(RefKind kind, double t, std::size_t n) {
    ReferenceKey k{kind, sp.alpha, sp.sigma_alpha, t, n,
                   static_cast<std::uint64_t>(params().integer("reference_seed"))};
    auto xs = reference_samples(k, cfg.resolved_cache_dir(), threads);
    report.diagnostics["reference"][to_string(kind)] = {{"key", k.to_json()},
                                                        {"file", k.file_stem()}};
    return xs;
  }

  /// Gated two-sample KS distance; the full KS summary goes to diagnostics.
  Metric& ks_metric(const std::string& name, const std::vector<double>& a,
                    const std::vector<double>& b, double tol, const std::string& criterion,
                    const std::string& provenance) {
    const KsReport r = ks_two_sample(a, b);
    report.diagnostics["ks"][name] = r;
    return report.check(name, r.statistic, Cmp::lt, tol, criterion, provenance);
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Standard error of the mean.
inline double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return std::nan("");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// Short decimal tag for file and metric names, e.g. 1e-04.
inline std::string eps_tag(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", e);
  return buf;
}

/// Number of dt steps covering macro time t at scale eps, i.e. t / (eps dt).
inline std::int64_t steps_for(double t, double eps, double dt) {
  const double k = t / (eps * dt);
  if (!(k >= 1.0) || k > 4e18) {
    std::ostringstream os;
    os << "t / (eps dt) = " << k << " is not a usable step count";
    throw ConfigError(os.str());
  }
  return std::llround(k);
}

}  // namespace reflevy::harness
