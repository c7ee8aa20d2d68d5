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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "reflevy/harness.hpp"

namespace {

using namespace reflevy;
using namespace reflevy::harness;

std::string tmpdir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("reflevy_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const char* kIni = R"(
[run]
scenario = exp-comparisons
seed = 42
paths = 10
out_dir = /tmp/x

[model]
beta = 2
theta = builtin

[mu]
law = half_gaussian:1

[grid]
dt = 0.01
horizon = 5
record_stride = 1
epsilons = 1e-2, 1e-3

[params]
v0 = 0.5
)";

ScenarioConfig parse(const std::string& s) {
  std::istringstream is(s);
  return parse_config(is);
}

TEST(Config, ParsesSections) {
  const auto c = parse(kIni);
  EXPECT_EQ(c.scenario, "exp-comparisons");
  EXPECT_EQ(c.master_seed, 42u);
  EXPECT_EQ(c.n_paths, 10);
  EXPECT_EQ(c.grid.dt, 0.01);
  EXPECT_EQ(c.epsilon_ladder, (std::vector<double>{1e-2, 1e-3}));
  EXPECT_EQ(c.params.num("v0"), 0.5);
  EXPECT_EQ(c.boundary_law().kind(), BoundaryLaw::Kind::half_gaussian);
}

TEST(Config, IniRoundTrip) {
  auto c = parse(kIni);
  validate_config(c);
  auto d = parse(c.to_ini());
  validate_config(d);
  EXPECT_EQ(c.echo(), d.echo());
}

TEST(Config, OverridesUseConfigKeys) {
  auto c = parse(kIni);
  c.set("grid.dt", "0.001");
  c.set("run.paths", "3");
  c.set("mu.law", "dirac:2");
  EXPECT_EQ(c.grid.dt, 0.001);
  EXPECT_EQ(c.n_paths, 3);
  EXPECT_EQ(c.boundary_law().describe(), "dirac:2");
}

TEST(Config, Rejections) {
  auto bad = [](const std::string& key, const std::string& v) {
    auto c = parse(kIni);
    c.set(key, v);
    validate_config(c);
  };
  EXPECT_THROW(bad("grid.epsilons", "1e-3, 1e-2"), ConfigError);
  EXPECT_THROW(bad("grid.epsilons", "1e-3, 1e-3"), ConfigError);
  EXPECT_THROW(bad("run.paths", "0"), ConfigError);
  EXPECT_THROW(bad("run.scenario", "exp-nothing"), ConfigError);
  EXPECT_THROW(bad("params.no_such_param", "1"), ConfigError);
  EXPECT_THROW(bad("grid.dt", "fast"), ConfigError);
  EXPECT_THROW(bad("mu.law", "cauchy:1"), ConfigError);
  EXPECT_THROW(bad("model.theta", "spline"), ConfigError);
  EXPECT_THROW(bad("model.beta", "0.5"), std::invalid_argument);
  EXPECT_THROW(parse("[run]\nfoo = 1\n"), ConfigError);
  EXPECT_THROW(parse("[warp]\nfoo = 1\n"), ConfigError);
}

TEST(Config, DefaultsFilledAndEchoed) {
  auto c = parse(kIni);
  validate_config(c);
  const auto j = c.echo();
  EXPECT_EQ(j["params"]["v0"], "0.5");
  EXPECT_EQ(j["params"]["osc_deltas"], "0.1, 0.03, 0.01");
  EXPECT_EQ(j["prng_family"], std::string(kPrngFamily));
  EXPECT_FALSE(j["run"].contains("threads"));
}

TEST(Catalog, NineScenarios) {
  const std::vector<std::string> want = {
      "exp-stable-validate", "exp-free-limit", "exp-reflected-limit",
      "exp-inelastic-limit", "exp-specular-limit", "exp-tau-tail",
      "exp-timechange",      "exp-comparisons", "exp-generator"};
  for (const auto& n : want) EXPECT_NE(find_scenario(n), nullptr) << n;
  EXPECT_EQ(find_scenario("exp-kac")->name, "exp-kac");
}

TEST(Pool, IndependentOfThreadCount) {
  auto f = [](std::size_t i) {
    RngStream r = derive_stream(9, i);
    double s = 0.0;
    for (int k = 0; k < 1000; ++k) s += r.noise.normal();
    return s;
  };
  const auto a = parallel_map(300, 1, f);
  const auto b = parallel_map(300, 4, f);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(parallel_map(0, 4, f).empty());
}

TEST(Pool, RethrowsLowestFailure) {
  auto f = [](std::size_t i) -> int {
    if (i == 5 || i == 50) throw std::runtime_error("bad " + std::to_string(i));
    return static_cast<int>(i);
  };
  try {
    parallel_map(100, 1, f);
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "bad 5");
  }
  EXPECT_THROW(parallel_map(100, 3, f), std::runtime_error);
}

TEST(Report, PassFlagsAndSchema) {
  ExperimentReport r;
  r.scenario = "x";
  r.check("a", 0.01, Cmp::lt, 0.08, "c1", "p");
  r.check_within("b", -0.52, -0.5, 0.07, "c1", "p");
  r.check("c", 5.0, Cmp::ge, 3.0, "c2", "p");
  EXPECT_TRUE(r.all_pass());
  r.check("d", std::nan(""), Cmp::lt, 1.0, "c2", "p");
  const auto j = r.to_json();
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_TRUE(j["pass"]["c1"].get<bool>());
  EXPECT_FALSE(j["pass"]["c2"].get<bool>());
  EXPECT_FALSE(j["all_pass"].get<bool>());
  EXPECT_TRUE(j["metrics"][3]["value"].is_null());
  EXPECT_EQ(j["prng_family"], std::string(kPrngFamily));
  for (const auto& m : j["metrics"]) {
    EXPECT_TRUE(m.contains("threshold"));
    EXPECT_FALSE(m["provenance"].get<std::string>().empty());
  }
  EXPECT_FALSE(j.contains("wall_time"));
}

TEST(Reference, CacheRoundTrip) {
  const std::string dir = tmpdir("cache");
  const ReferenceKey k{RefKind::supremum, 1.2, 0.7, 2.0, 500, 3};
  bool hit = true;
  const auto a = reference_samples(k, dir, 2, &hit);
  EXPECT_FALSE(hit);
  const auto b = reference_samples(k, dir, 1, &hit);
  EXPECT_TRUE(hit);
  EXPECT_EQ(a, b);
  ReferenceKey k2 = k;
  k2.seed = 4;
  EXPECT_NE(k.file_stem(), k2.file_stem());
  EXPECT_NE(reference_samples(k2, dir, 1, &hit), a);
  EXPECT_FALSE(hit);
  for (double x : a) EXPECT_GE(x, 0.0);
}

ScenarioConfig small_comparisons(const std::string& dir) {
  auto c = parse(kIni);
  c.out_dir = dir;
  c.export_paths = 2;
  return c;
}

TEST(Scenario, ComparisonsTinyRunPasses) {
  const std::string dir = tmpdir("cmp");
  const auto r = run_scenario(small_comparisons(dir));
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.find("violations_reflected_below_inelastic")->value, 0.0);
  EXPECT_EQ(r.find("violations_second_above_inelastic")->value, 0.0);
  for (const char* f : {"report.json", "timing.json", "paths.csv", "events.csv", "config.ini"})
    EXPECT_TRUE(std::filesystem::exists(dir + "/" + f)) << f;
  EXPECT_EQ(slurp(dir + "/paths.csv").substr(0, 16), "path_id,t,x,v\n0,");
}

TEST(Scenario, ByteIdenticalReruns) {
  const std::string dir = tmpdir("det");
  auto c = small_comparisons(dir);
  c.threads = 1;
  run_scenario(c);
  const std::string rep = slurp(dir + "/report.json"), paths = slurp(dir + "/paths.csv"),
                    ev = slurp(dir + "/events.csv");
  c.threads = 3;
  run_scenario(c);
  EXPECT_EQ(rep, slurp(dir + "/report.json"));
  EXPECT_EQ(paths, slurp(dir + "/paths.csv"));
  EXPECT_EQ(ev, slurp(dir + "/events.csv"));
}

TEST(Scenario, AbortWritesPartialReport) {
  const std::string dir = tmpdir("abort");
  auto c = parse(kIni);
  c.scenario = "exp-tau-tail";
  c.out_dir = dir;
  c.grid.horizon = 1050;
  c.grid.dt = 0.05;
  c.params = {};
  c.n_paths = 20;  // far too few episodes for the tail fit
  EXPECT_THROW(run_scenario(c), FitError);
  const auto j = nlohmann::json::parse(slurp(dir + "/report.json"));
  EXPECT_EQ(j["status"], "aborted");
  EXPECT_FALSE(j["error"].get<std::string>().empty());
  EXPECT_FALSE(j["all_pass"].get<bool>());
  EXPECT_TRUE(std::filesystem::exists(dir + "/samples_tau.csv"));
}

TEST(Scenario, ReflectedLimitSmoke) {
  const std::string dir = tmpdir("refl");
  auto c = parse(kIni);
  c.scenario = "exp-reflected-limit";
  c.out_dir = dir;
  c.cache_dir = dir + "/cache";
  c.grid.horizon = 1.0;
  c.epsilon_ladder = {1e-1, 1e-2};
  c.n_paths = 50;
  c.params = {};
  c.params.set("n_ref", "2000");
  c.params.set("ks_tol", "1");
  const auto r = run_scenario(c);
  EXPECT_TRUE(r.all_pass());
  EXPECT_NE(r.find("ks_eps_1e-02"), nullptr);
  EXPECT_TRUE(r.diagnostics["ladder"].contains("eps_1e-01"));
  EXPECT_TRUE(std::filesystem::exists(dir + "/samples_reflected_eps1e-02.csv"));
}

}  // namespace
