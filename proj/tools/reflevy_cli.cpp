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

// reflevy: run, list and validate scenario configurations.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reflevy/harness.hpp"

namespace {

using reflevy::harness::ScenarioConfig;

struct Overrides {
  std::optional<std::string> scenario, mu, out_dir;
  std::optional<unsigned long long> seed;
  std::optional<long long> paths;
  std::optional<double> dt, horizon, beta;
  std::optional<unsigned> threads;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--scenario", scenario, "run.scenario");
    app->add_option("--seed", seed, "run.seed");
    app->add_option("--paths", paths, "run.paths");
    app->add_option("--dt", dt, "grid.dt");
    app->add_option("--horizon", horizon, "grid.horizon");
    app->add_option("--beta", beta, "model.beta");
    app->add_option("--mu", mu, "mu.law, e.g. half_gaussian:1");
    app->add_option("--out-dir", out_dir, "run.out_dir");
    app->add_option("--threads", threads, "worker threads (0: all cores)");
    app->add_option("--set", sets, "any section.key=value override");
  }

  void apply(ScenarioConfig& c) const {
    auto fmt = [](double d) { return reflevy::harness::detail::format_double(d); };
    if (scenario) c.set("run.scenario", *scenario);
    if (seed) c.set("run.seed", std::to_string(*seed));
    if (paths) c.set("run.paths", std::to_string(*paths));
    if (dt) c.set("grid.dt", fmt(*dt));
    if (horizon) c.set("grid.horizon", fmt(*horizon));
    if (beta) c.set("model.beta", fmt(*beta));
    if (mu) c.set("mu.law", *mu);
    if (out_dir) c.set("run.out_dir", *out_dir);
    if (threads) c.set("run.threads", std::to_string(*threads));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw reflevy::harness::ConfigError("--set expects section.key=value, got " + s);
      c.set(s.substr(0, eq), s.substr(eq + 1));
    }
  }
};

ScenarioConfig load(const std::string& path, const Overrides& o) {
  ScenarioConfig c = path.empty() ? ScenarioConfig{} : reflevy::harness::load_config(path);
  o.apply(c);
  return c;
}

void print_summary(const reflevy::harness::ExperimentReport& r, const std::string& dir) {
  for (const auto& m : r.metrics) {
    std::printf("%-4s %-44s %-14.6g %s %.6g", m.pass() ? "ok" : "FAIL", m.name.c_str(), m.value,
                to_string(m.cmp), m.threshold);
    if (m.cmp == reflevy::harness::Cmp::within) std::printf(" +- %.6g", m.tolerance);
    std::printf("\n");
  }
  for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("%s: %s (%s/report.json)\n", r.scenario.c_str(),
              r.all_pass() ? "all criteria pass" : "criterion failure", dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflevy: kinetic boundary processes and their stable scaling limits"};
  app.require_subcommand(1);

  std::string run_cfg, val_cfg;
  Overrides run_o, val_o;
  auto* run = app.add_subcommand("run", "run the scenario named in the config");
  run->add_option("--config", run_cfg, "INI config file")->required()->check(CLI::ExistingFile);
  run_o.attach(run);

  auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");

  auto* val = app.add_subcommand("validate-config", "check a config and print its canonical form");
  val->add_option("--config", val_cfg, "INI config file")->required()->check(CLI::ExistingFile);
  val_o.attach(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (list->parsed()) {
      for (const auto& s : reflevy::harness::scenario_catalog()) {
        std::printf("%s\n  %s\n  grid.horizon: %s\n  params:", s.name.c_str(), s.summary.c_str(),
                    s.horizon.c_str());
        for (const auto& [k, v] : s.params) std::printf(" %s=%s", k.c_str(), v.c_str());
        std::printf("\n");
      }
      return 0;
    }
    if (val->parsed()) {
      ScenarioConfig c = load(val_cfg, val_o);
      reflevy::harness::validate_config(c);
      std::cout << c.to_ini();
      return 0;
    }
    ScenarioConfig c = load(run_cfg, run_o);
    const auto report = reflevy::harness::run_scenario(c);
    print_summary(report, c.out_dir);
    return report.all_pass() ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
