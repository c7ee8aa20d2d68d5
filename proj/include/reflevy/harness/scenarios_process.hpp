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
#include <string>
#include <vector>

#include "reflevy/analysis.hpp"
#include "reflevy/harness/context.hpp"
#include "reflevy/harness/pool.hpp"
#include "reflevy/model.hpp"
#include "reflevy/sde.hpp"

namespace reflevy::harness {

namespace provenance {
inline constexpr const char* kTauTail =
    "persistence: P(tau > t) and P(sigma > t) decay like t^{-1/2}";
inline constexpr const char* kTauSigmaAgree =
    "persistence: tau and sigma share the survival exponent";
inline constexpr const char* kTimeChange = "second construction: A'_t / t -> 1 as t -> infinity";
inline constexpr const char* kZeroSet =
    "inelastic construction: the zero set of the reflected free path has zero Lebesgue measure";
inline constexpr const char* kComparison =
    "coupled comparison under shared noise: reflected >= inelastic >= second construction";
inline constexpr const char* kKac = "Kac moment formula for the velocity hitting time";
}  // namespace provenance

/// Episodes of the restart cycle; tau and sigma survival slopes.
inline void run_tau_tail(RunContext& ctx) {
  const auto& P = ctx.params();
  const BoundaryLaw mu = ctx.cfg.boundary_law();
  const double dt = ctx.cfg.grid.dt, t_max = ctx.cfg.grid.horizon;
  const double lo = P.num("fit_lo"), hi = P.num("fit_hi");
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("params.fit_lo/fit_hi: need 0 < fit_lo < fit_hi");
  if (!(t_max > hi)) throw ConfigError("grid.horizon: episodes are censored there; must exceed fit_hi");
  if (lo < 100.0 * dt)
    ctx.report.warnings.push_back("fit_lo below 100 dt; the lower decade is dt-limited");
  const auto eps = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed, i);
    return sample_persistence_episode(ctx.ff, mu, dt, t_max, rng);
  });
  std::vector<double> tau, sigma;
  std::size_t ct = 0, cs = 0;
  for (const auto& e : eps) {
    tau.push_back(e.tau);
    sigma.push_back(e.sigma);
    ct += e.tau_censored;
    cs += e.sigma_censored;
  }
  const nlohmann::json meta = {{"censored_at", t_max}, {"mu", mu.describe()}};
  ctx.out.write_samples("tau", tau, meta);
  ctx.out.write_samples("sigma", sigma, meta);
  const int np = static_cast<int>(P.integer("n_points"));
  const TailFit ft = tail_exponent_fit(tau, lo, hi, np);
  const TailFit fs = tail_exponent_fit(sigma, lo, hi, np);
  ctx.report.diagnostics["tau_fit"] = ft;
  ctx.report.diagnostics["sigma_fit"] = fs;
  ctx.report.diagnostics["censored"] = {{"tau", ct}, {"sigma", cs}};
  const double target = P.num("slope_target"), tol = P.num("slope_tol");
  ctx.report.check_within("tau_slope", ft.slope, target, tol, "tau-tail", provenance::kTauTail);
  ctx.report.check_within("sigma_slope", fs.slope, target, tol, "sigma-tail",
                          provenance::kTauTail);
  const double comb = std::hypot(ft.std_error, fs.std_error);
  ctx.report.check("slope_difference", std::abs(ft.slope - fs.slope), Cmp::le, comb,
                   "tau-sigma-agree", provenance::kTauSigmaAgree);
}

/// A'_t / t for the second construction and A_t / t for the inelastic
/// clock, both driven by one free path per index.
inline void run_timechange(RunContext& ctx) {
  const auto& P = ctx.params();
  const BoundaryLaw mu = ctx.cfg.boundary_law();
  const double dt = ctx.cfg.grid.dt, v0 = P.num("v0");
  ctx.cfg.grid.validate(ctx.ff);
  auto times = P.list("times");
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end() || !(times.front() > 0.0))
    throw ConfigError("params.times: need increasing positive times");
  if (!(v0 > 0.0)) throw ConfigError("params.v0: must be > 0");
  std::vector<std::int64_t> ks;
  for (double t : times) ks.push_back(steps_for(t, 1.0, dt));
  struct Out {
    std::vector<double> aprime, clock;
    double cycles = 0.0;
  };
  auto res = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed, i);
    FreeStepper st(ctx.ff, 0.0, v0);
    SecondConstructionTracker tr(mu, rng.restart, 0.0);
    InfimumClock clk;
    clk.push(0.0, 0.0);
    Out r;
    const double sq = std::sqrt(dt);
    std::size_t next = 0;
    for (std::int64_t k = 1; k <= ks.back(); ++k) {
      const double x0 = st.x, v00 = st.v;
      st.step(dt, sq * rng.noise.normal());
      const double t0 = static_cast<double>(k - 1) * dt, t1 = static_cast<double>(k) * dt;
      tr.push(t0, x0, v00, t1, st.x, st.v);
      clk.push(t1, st.x);
      while (next < ks.size() && ks[next] == k) {
        r.aprime.push_back(tr.aprime() / t1);
        r.clock.push_back(clk.clock() / t1);
        ++next;
      }
    }
    reflevy::detail::check_finite(st.x, st.v, static_cast<double>(ks.back()) * dt);
    r.cycles = static_cast<double>(tr.sigmas.size());
    return r;
  });
  std::vector<double> med_a, med_c;
  for (std::size_t j = 0; j < times.size(); ++j) {
    std::vector<double> a, c;
    for (const auto& r : res) {
      a.push_back(r.aprime[j]);
      c.push_back(r.clock[j]);
    }
    med_a.push_back(median(a));
    med_c.push_back(median(c));
    ctx.out.write_samples("aprime_over_t_t" + eps_tag(times[j]), a, {{"t", times[j]}});
    ctx.out.write_samples("clock_over_t_t" + eps_tag(times[j]), c, {{"t", times[j]}});
  }
  std::vector<double> cycles;
  for (const auto& r : res) cycles.push_back(r.cycles);
  ctx.report.diagnostics["times"] = times;
  ctx.report.diagnostics["aprime_over_t_median"] = med_a;
  ctx.report.diagnostics["clock_over_t_median"] = med_c;
  ctx.report.diagnostics["restart_cycles_median"] = median(cycles);
  double min_step = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < med_a.size(); ++j)
    min_step = std::min(min_step, med_a[j + 1] - med_a[j]);
  if (med_a.size() > 1)
    ctx.report.check("aprime_median_min_increment", min_step, Cmp::gt, 0.0, "timechange-trend",
                     provenance::kTimeChange);
  ctx.report.check("aprime_median_at_t_max", med_a.back(), Cmp::gt, P.num("aprime_min"),
                   "timechange-level", provenance::kTimeChange);
  ctx.report.check("clock_median_at_t_max", med_c.back(), Cmp::gt, P.num("clock_min"),
                   "inelastic-clock", provenance::kZeroSet);
}

/// Reflected, inelastic and second-construction paths on shared noise.
inline void run_comparisons(RunContext& ctx) {
  const auto& P = ctx.params();
  const BoundaryLaw mu = ctx.cfg.boundary_law();
  const auto& grid = ctx.cfg.grid;
  grid.validate(ctx.ff);
  const double v0 = P.num("v0"), alpha = ctx.sp.alpha, H = grid.horizon;
  const auto deltas = P.list("osc_deltas");
  struct Out {
    double v_refl = 0.0, v_frak = 0.0, nodes = 0.0;
    std::vector<double> osc;
    PathSample recorded;
  };
  auto res = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
    RngStream ra = derive_stream(ctx.cfg.master_seed, i), rb = ra;
    PathSample refl = simulate_reflected(ctx.ff, mu, v0, grid, ra);
    const SecondConstruction sc = second_construction(ctx.ff, mu, v0, grid, rb);
    const PathSample xcal = reflect_on_infimum(sc.free);
    if (refl.size() != xcal.size()) throw SimulationError("comparison: grids differ");
    Out r;
    for (std::size_t k = 0; k < xcal.size(); ++k) {
      r.v_refl += refl.x[k] < xcal.x[k];
      r.v_frak += sc.frak.x[k] > xcal.x[k];
    }
    r.nodes = static_cast<double>(xcal.size());
    // free path rescaled so that [0, H] maps onto [0, 1]
    const double e = 1.0 / H, s = std::pow(e, 1.0 / alpha);
    CadlagPath fp{{}, {}, Interpretation::piecewise_linear};
    for (std::size_t k = 0; k < sc.free.size(); ++k) {
      fp.times.push_back(e * sc.free.t[k]);
      fp.values.push_back(s * sc.free.x[k]);
    }
    for (double d : deltas) r.osc.push_back(oscillation(fp, 1.0, d));
    if (ctx.exports(i)) r.recorded = std::move(refl);
    return r;
  });
  double v1 = 0.0, v2 = 0.0, nodes = 0.0;
  for (const auto& r : res) {
    v1 += r.v_refl;
    v2 += r.v_frak;
    nodes += r.nodes;
  }
  ctx.report.diagnostics["nodes_checked"] = nodes;
  ctx.report.check("violations_reflected_below_inelastic", v1, Cmp::le, 0.0,
                   "reflected-dominates", provenance::kComparison);
  ctx.report.check("violations_second_above_inelastic", v2, Cmp::le, 0.0, "inelastic-dominates",
                   provenance::kComparison);
  std::vector<double> med;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    std::vector<double> w;
    for (const auto& r : res) w.push_back(r.osc[d]);
    med.push_back(median(w));
  }
  ctx.report.diagnostics["oscillation"] = {{"deltas", deltas}, {"median", med}, {"eps", 1.0 / H}};
  for (auto& r : res)
    if (!r.recorded.t.empty()) ctx.exported.push_back(std::move(r.recorded));
}

/// Monte Carlo means of the velocity hitting times against Kac's formula.
inline void run_kac(RunContext& ctx) {
  const auto& P = ctx.params();
  const double v = P.num("v"), dt = ctx.cfg.grid.dt, t_max = ctx.cfg.grid.horizon;
  if (!(v > 0.0)) throw ConfigError("params.v: must be > 0");
  struct Out {
    double down = 0.0, up = 0.0;
    bool censored = false;
  };
  auto res = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed, i);
    Out r;
    const auto d = velocity_hitting_time(ctx.ff, v, 0.0, dt, t_max, rng);
    const auto u = velocity_hitting_time(ctx.ff, 0.0, v, dt, t_max, rng);
    r.censored = !d || !u;
    r.down = d.value_or(t_max);
    r.up = u.value_or(t_max);
    return r;
  });
  std::vector<double> down, up;
  std::size_t cens = 0;
  for (const auto& r : res) {
    down.push_back(r.down);
    up.push_back(r.up);
    cens += r.censored;
  }
  if (cens)
    ctx.report.warnings.push_back(std::to_string(cens) +
                                  " paths censored at the horizon; means are biased low");
  ctx.out.write_samples("hit_down", down, {{"from", v}, {"to", 0.0}, {"censored_at", t_max}});
  ctx.out.write_samples("hit_up", up, {{"from", 0.0}, {"to", v}, {"censored_at", t_max}});
  const double kd = kac_hitting_moment_down(ctx.ff, v), ku = kac_hitting_moment_up(ctx.ff, v);
  const double md = mean(down), mu_ = mean(up), sd = std_error(down), su = std_error(up);
  const double z = P.num("z_max");
  ctx.report.check_within("mean_hit_down", md, kd, z * sd, "kac-down", provenance::kKac);
  ctx.report.check_within("mean_hit_up", mu_, ku, z * su, "kac-up", provenance::kKac);
  ctx.report.diagnostics["kac"] = {
      {"down", {{"formula", kd}, {"mc_mean", md}, {"stderr", sd}, {"ratio", md / kd},
                {"z", (md - kd) / sd}}},
      {"up", {{"formula", ku}, {"mc_mean", mu_}, {"stderr", su}, {"ratio", mu_ / ku},
              {"z", (mu_ - ku) / su}}},
      {"censored", cens}};
}

}  // namespace reflevy::harness
