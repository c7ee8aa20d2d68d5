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

#include <chrono>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "reflevy/harness/config.hpp"
#include "reflevy/harness/context.hpp"
#include "reflevy/harness/pool.hpp"
#include "reflevy/harness/report.hpp"
#include "reflevy/harness/scenarios_check.hpp"
#include "reflevy/harness/scenarios_limit.hpp"
#include "reflevy/harness/scenarios_process.hpp"
#include "reflevy/model.hpp"

namespace reflevy::harness {

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::string horizon;  ///< what grid.horizon means here
  std::vector<std::pair<std::string, std::string>> params;  ///< keys with defaults
  void (*run)(RunContext&);
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> cat = {
      {"exp-stable-validate",
       "CMS draws vs characteristic function, increment additivity, Cauchy CDF, Biane-Yor",
       "time t of the stable marginal",
       {{"n_cf", "1000000"}, {"xis", "0.25, 0.5, 1, 2, 4"}, {"z_max", "3"},
        {"n_scaling", "100000"}, {"scaling_pieces", "10"}, {"p_min", "0.01"},
        {"n_by", "5000"}, {"by_dt", "1e-6"}, {"by_eta", "0.01"}, {"by_ks_tol", "0.05"}},
       run_stable_validate},
      {"exp-free-limit",
       "rescaled free process: marginal, past sup and inf, oscillation modulus",
       "macro time t",
       {{"v0", "1"}, {"n_ref", "100000"}, {"reference_seed", "7919"}, {"ks_tol", "0.08"},
        {"osc_deltas", "0.1, 0.001"}, {"osc_stride", "100"}, {"osc_ratio_min", "3"}},
       run_free_limit},
      {"exp-reflected-limit", "rescaled diffusive-reflected process vs reflected stable marginal",
       "macro time t",
       {{"v0", "1"}, {"n_ref", "100000"}, {"reference_seed", "7919"}, {"ks_tol", "0.08"}},
       run_reflected_limit},
      {"exp-inelastic-limit", "rescaled inelastic process vs reflected stable marginal",
       "macro time t",
       {{"v0", "1"}, {"n_ref", "100000"}, {"reference_seed", "7919"}, {"ks_tol", "0.08"},
        {"max_time_factor", "100"}},
       run_inelastic_limit},
      {"exp-specular-limit", "rescaled specular process vs |Z_t|", "macro time t",
       {{"v0", "1"}, {"n_ref", "100000"}, {"reference_seed", "7919"}, {"ks_tol", "0.08"}},
       run_specular_limit},
      {"exp-tau-tail", "survival slopes of the persistence times tau and sigma",
       "censoring time of an episode",
       {{"fit_lo", "10"}, {"fit_hi", "1000"}, {"n_points", "12"}, {"slope_target", "-0.5"},
        {"slope_tol", "0.07"}},
       run_tau_tail},
      {"exp-timechange", "A'_t / t of the second construction; A_t / t of the inelastic clock",
       "unused; see params.times",
       {{"times", "100, 1000, 10000"}, {"v0", "1"}, {"aprime_min", "0.9"}, {"clock_min", "0.9"}},
       run_timechange},
      {"exp-comparisons", "pathwise order of coupled reflected, inelastic and second-construction paths",
       "simulation horizon",
       {{"v0", "1"}, {"osc_deltas", "0.1, 0.03, 0.01"}},
       run_comparisons},
      {"exp-generator",
       "weak form of the reflected stable generator, kinetic weak form, density exponents",
       "time t of the reflected stable marginal",
       {{"alphas", "0.8, 1.5"}, {"sigma", "1"}, {"h", "0.05"}, {"n_weak", "100000"},
        {"z_max", "3"}, {"forms_tol", "1e-5"}, {"n_density", "100000"}, {"tail_tol", "0.15"},
        {"origin_tol", "0.1"}, {"kin_horizon", "3"}, {"kin_v0", "0.5"}, {"min_events", "1000"},
        {"p_min", "0.01"}},
       run_generator},
      {"exp-kac", "mean velocity hitting times vs Kac's moment formula",
       "censoring time of a hitting time",
       {{"v", "1"}, {"z_max", "3"}},
       run_kac},
  };
  return cat;
}

inline const ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : scenario_catalog())
    if (s.name == name) return &s;
  return nullptr;
}

/// Fills scenario defaults into cfg.params and checks the whole config.
inline const ScenarioInfo& validate_config(ScenarioConfig& cfg) {
  cfg.validate_base();
  const ScenarioInfo* info = find_scenario(cfg.scenario);
  if (!info) throw ConfigError("unknown scenario: " + cfg.scenario);
  for (const auto& [k, v] : cfg.params.values()) {
    bool known = false;
    for (const auto& [dk, dv] : info->params) known = known || dk == k;
    if (!known) throw ConfigError("params." + k + ": not a parameter of " + cfg.scenario);
  }
  for (const auto& [k, v] : info->params) cfg.params.set_default(k, v);
  (void)cfg.force_field();
  return *info;
}

/// Runs one scenario and writes its artifacts under cfg.out_dir. On an
/// exception the partial report (status "aborted") is written before the
/// exception propagates.
inline ExperimentReport run_scenario(ScenarioConfig cfg) {
  const ScenarioInfo& info = validate_config(cfg);
  ExperimentReport report;
  report.scenario = cfg.scenario;
  report.config = cfg.echo();
  ArtifactWriter out(cfg.out_dir);
  out.write_text("config.ini", cfg.to_ini());
  const auto t0 = std::chrono::steady_clock::now();
  const ForceField ff = cfg.force_field();
  RunContext ctx{cfg, ff, sigma_alpha(ff), cfg.threads, report, out, {}};
  auto stamp = [&] {
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    ctx.threads = resolve_threads(cfg.threads);
    report.diagnostics["model"] = {{"alpha", ctx.sp.alpha},
                                   {"sigma_alpha", ctx.sp.sigma_alpha},
                                   {"c_beta", ctx.sp.c_beta}};
    info.run(ctx);
    out.write_paths(ctx.exported);
  } catch (const std::exception& e) {
    report.error = e.what();
    stamp();
    out.write_report(report);
    throw;
  }
  stamp();
  out.write_report(report);
  return report;
}

}  // namespace reflevy::harness
