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
#include <cstdint>
#include <string>
#include <vector>

#include "reflevy/analysis.hpp"
#include "reflevy/harness/context.hpp"
#include "reflevy/harness/pool.hpp"
#include "reflevy/sde.hpp"

// Scaling-limit scenarios. Macro time t is grid.horizon; at scale eps a path
// runs t / (eps dt) steps and is read as eps^{1/alpha} X.

namespace reflevy::harness {

namespace provenance {
inline constexpr const char* kFreeMarginal =
    "free kinetic process: eps^{1/alpha} X_{t/eps} converges in law to the stable Z_t";
inline constexpr const char* kFreeExtrema =
    "free kinetic process: past supremum and infimum converge jointly with the stable limit";
inline constexpr const char* kOscillation =
    "M1 tightness: the oscillation modulus w(x, T, delta) vanishes as delta -> 0";
inline constexpr const char* kM1Examples = "M1 distance on completed graphs: reference examples";
inline constexpr const char* kReflected =
    "diffusive reflection: eps^{1/alpha} X_{t/eps} converges to the stable process reflected "
    "on its infimum";
inline constexpr const char* kInelastic =
    "inelastic boundary built by time change: same reflected-stable limit";
inline constexpr const char* kSpecular =
    "specular reflection: (|X|, sgn(X) V) solves the free equation, so the limit is |Z_t|";
}  // namespace provenance

/// The three reference examples for m1_distance_approx, gated exactly.
inline void m1_examples(RunContext& ctx, const std::string& criterion) {
  auto rng = derive_stream(ctx.cfg.master_seed, 0);
  CadlagPath walk{{0.0}, {0.0}, Interpretation::piecewise_constant};
  for (int i = 1; i <= 200; ++i) {
    walk.times.push_back(i / 200.0);
    walk.values.push_back(walk.values.back() + 0.1 * rng.noise.normal());
  }
  ctx.report.check("m1_identity", m1_distance_approx(walk, walk, 1.0, 200), Cmp::le, 0.0,
                   criterion, provenance::kM1Examples);
  const CadlagPath c1{{0, 2}, {0.5, 0.5}}, c2{{0, 2}, {-1.25, -1.25}};
  ctx.report.check_within("m1_constants", m1_distance_approx(c1, c2, 2.0, 300), 1.75, 0.0,
                          criterion, provenance::kM1Examples);
  const std::size_t g = 400;
  const double delta = 0.1;
  const CadlagPath step{{0, 1, 2}, {0, 1, 1}, Interpretation::piecewise_constant};
  const CadlagPath ramp{{0, 1 - delta, 1, 2}, {0, 0, 1, 1}};
  ctx.report.check("m1_step_vs_ramp", m1_distance_approx(step, ramp, 2.0, g), Cmp::le,
                   delta + 2.0 / static_cast<double>(g), criterion, provenance::kM1Examples);
}

namespace detail {

struct FreeLimitPath {
  std::vector<double> marginal, sup, inf;  // per eps
  std::vector<double> osc;                 // per delta, smallest eps
  PathSample recorded;
};

inline void write_ladder_samples(RunContext& ctx, const std::string& stem,
                                 const std::vector<double>& xs, double eps) {
  ctx.out.write_samples(stem + "_eps" + eps_tag(eps), xs,
                        {{"eps", eps}, {"t", ctx.cfg.grid.horizon}, {"alpha", ctx.sp.alpha}});
}

}  // namespace detail

inline void run_free_limit(RunContext& ctx) {
  const auto& P = ctx.params();
  const auto& grid = ctx.cfg.grid;
  grid.validate(ctx.ff);
  const double t = grid.horizon, dt = grid.dt, alpha = ctx.sp.alpha;
  const auto& eps = ctx.cfg.epsilon_ladder;
  const double v0 = P.num("v0"), tol = P.num("ks_tol");
  const auto deltas = P.list("osc_deltas");
  const auto stride = P.integer("osc_stride");
  if (deltas.size() < 2) throw ConfigError("params.osc_deltas: need at least two values");
  if (stride < 1) throw ConfigError("params.osc_stride: must be >= 1");
  std::vector<std::int64_t> ks;
  for (double e : eps) ks.push_back(steps_for(t, e, dt));
  const std::int64_t kmax = ks.back();
  const double emin = eps.back(), smin = std::pow(emin, 1.0 / alpha);
  const auto rec_stride = static_cast<std::int64_t>(grid.record_stride);

  auto paths = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed, i);
    FreeStepper st(ctx.ff, 0.0, v0);
    detail::FreeLimitPath r;
    r.marginal.resize(eps.size());
    r.sup.resize(eps.size());
    r.inf.resize(eps.size());
    CadlagPath osc{{0.0}, {0.0}, Interpretation::piecewise_linear};
    osc.times.reserve(static_cast<std::size_t>(kmax / stride) + 2);
    osc.values.reserve(osc.times.capacity());
    const bool rec = ctx.exports(i);
    if (rec) r.recorded.push(0.0, 0.0, v0);
    const double sq = std::sqrt(dt);
    double hi = 0.0, lo = 0.0;
    std::size_t next = 0;
    for (std::int64_t k = 1; k <= kmax; ++k) {
      st.step(dt, sq * rng.noise.normal());
      hi = std::max(hi, st.x);
      lo = std::min(lo, st.x);
      while (next < eps.size() && ks[next] == k) {
        const double s = std::pow(eps[next], 1.0 / alpha);
        r.marginal[next] = s * st.x;
        r.sup[next] = s * hi;
        r.inf[next] = s * lo;
        ++next;
      }
      if (k % stride == 0 || k == kmax) {
        osc.times.push_back(emin * dt * static_cast<double>(k));
        osc.values.push_back(smin * st.x);
      }
      if (rec && (k % rec_stride == 0 || k == kmax))
        r.recorded.push(static_cast<double>(k) * dt, st.x, st.v);
    }
    reflevy::detail::check_finite(st.x, st.v, static_cast<double>(kmax) * dt);
    for (double d : deltas) r.osc.push_back(oscillation(osc, t, d));
    return r;
  });

  const auto ref_sup = ctx.reference(RefKind::supremum, t, P.integer("n_ref"));
  const auto ref_marg = ctx.reference(RefKind::marginal, t, P.integer("n_ref"));
  for (std::size_t j = 0; j < eps.size(); ++j) {
    std::vector<double> m, s, ninf;
    for (const auto& r : paths) {
      m.push_back(r.marginal[j]);
      s.push_back(r.sup[j]);
      ninf.push_back(-r.inf[j]);
    }
    detail::write_ladder_samples(ctx, "free_marginal", m, eps[j]);
    detail::write_ladder_samples(ctx, "free_sup", s, eps[j]);
    detail::write_ladder_samples(ctx, "free_neg_inf", ninf, eps[j]);
    const std::string tag = "eps_" + eps_tag(eps[j]);
    if (j + 1 < eps.size()) {
      ctx.report.diagnostics["ladder"][tag] = {{"ks_marginal", ks_two_sample(m, ref_marg)},
                                              {"ks_sup", ks_two_sample(s, ref_sup)},
                                              {"ks_neg_inf", ks_two_sample(ninf, ref_sup)}};
      continue;
    }
    ctx.ks_metric("ks_marginal_" + tag, m, ref_marg, tol, "free-marginal",
                  provenance::kFreeMarginal);
    ctx.ks_metric("ks_sup_" + tag, s, ref_sup, tol, "free-sup", provenance::kFreeExtrema);
    ctx.ks_metric("ks_neg_inf_" + tag, ninf, ref_sup, tol, "free-inf", provenance::kFreeExtrema);
  }

  std::size_t i_big = 0, i_small = 0;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    if (deltas[d] > deltas[i_big]) i_big = d;
    if (deltas[d] < deltas[i_small]) i_small = d;
  }
  std::vector<double> med;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    std::vector<double> w;
    for (const auto& r : paths) w.push_back(r.osc[d]);
    med.push_back(median(w));
    ctx.out.write_samples("oscillation_delta" + eps_tag(deltas[d]), w,
                          {{"delta", deltas[d]}, {"T", t}, {"eps", emin}, {"stride", stride}});
    ctx.report.diagnostics["oscillation_median"][eps_tag(deltas[d])] = med.back();
  }
  ctx.report.check("oscillation_median_ratio", med[i_big] / med[i_small], Cmp::ge,
                   P.num("osc_ratio_min"), "oscillation", provenance::kOscillation);
  m1_examples(ctx, "m1-examples");

  for (auto& r : paths)
    if (!r.recorded.t.empty()) ctx.exported.push_back(std::move(r.recorded));
}

namespace detail {

struct BoundaryLimitPath {
  double value = 0.0;
  double hits = 0.0;
  PathSample recorded;
};

inline void run_boundary_limit(RunContext& ctx, const BoundaryLaw* mu, RefKind ref_kind,
                               const std::string& stem, const std::string& criterion,
                               const char* prov) {
  const auto& P = ctx.params();
  const auto& grid = ctx.cfg.grid;
  grid.validate(ctx.ff);
  const double t = grid.horizon, dt = grid.dt, alpha = ctx.sp.alpha;
  const double v0 = P.num("v0"), tol = P.num("ks_tol");
  if (!(v0 > 0.0)) throw ConfigError("params.v0: must be > 0");
  const auto& eps = ctx.cfg.epsilon_ladder;
  const auto ref = ctx.reference(ref_kind, t, P.integer("n_ref"));
  const auto rec_stride = static_cast<std::int64_t>(grid.record_stride);

  for (std::size_t j = 0; j < eps.size(); ++j) {
    const bool last = j + 1 == eps.size();
    const std::int64_t n = steps_for(t, eps[j], dt);
    const double s = std::pow(eps[j], 1.0 / alpha);
    auto res = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
      RngStream rng = derive_stream(ctx.cfg.master_seed, i);
      BoundaryLimitPath r;
      const bool rec = last && ctx.exports(i);
      ReflectedStepper st(ctx.ff, mu, v0, rng, rec ? &r.recorded.events : nullptr);
      if (rec) r.recorded.push(0.0, 0.0, v0);
      const double sq = std::sqrt(dt);
      for (std::int64_t k = 0; k < n; ++k) {
        st.step(static_cast<double>(k) * dt, dt, sq * rng.noise.normal());
        if (rec && ((k + 1) % rec_stride == 0 || k + 1 == n))
          r.recorded.push(static_cast<double>(k + 1) * dt, st.x, st.v);
      }
      reflevy::detail::check_finite(st.x, st.v, static_cast<double>(n) * dt);
      r.value = s * st.x;
      r.hits = static_cast<double>(st.hits());
      return r;
    });
    std::vector<double> xs, hits;
    for (const auto& r : res) {
      xs.push_back(r.value);
      hits.push_back(r.hits);
    }
    write_ladder_samples(ctx, stem, xs, eps[j]);
    const std::string tag = "eps_" + eps_tag(eps[j]);
    ctx.report.diagnostics["boundary_hits_mean"][tag] = mean(hits);
    if (last) {
      ctx.ks_metric("ks_" + tag, xs, ref, tol, criterion, prov);
      for (auto& r : res)
        if (!r.recorded.t.empty()) ctx.exported.push_back(std::move(r.recorded));
    } else {
      ctx.report.diagnostics["ladder"][tag] = {{"ks", ks_two_sample(xs, ref)}};
    }
  }
}

}  // namespace detail

inline void run_reflected_limit(RunContext& ctx) {
  const BoundaryLaw mu = ctx.cfg.boundary_law();
  detail::run_boundary_limit(ctx, &mu, RefKind::supremum, "reflected", "reflected-limit",
                             provenance::kReflected);
}

inline void run_specular_limit(RunContext& ctx) {
  detail::run_boundary_limit(ctx, nullptr, RefKind::abs_marginal, "specular", "specular-limit",
                             provenance::kSpecular);
}

/// Free path from (0, v0) reflected on its infimum; the inelastic process at
/// time T is the reflected value where the occupation clock first reaches T.
inline void run_inelastic_limit(RunContext& ctx) {
  const auto& P = ctx.params();
  const auto& grid = ctx.cfg.grid;
  grid.validate(ctx.ff);
  const double t = grid.horizon, dt = grid.dt, alpha = ctx.sp.alpha;
  const double v0 = P.num("v0"), tol = P.num("ks_tol"), budget = P.num("max_time_factor");
  if (!(budget > 1.0)) throw ConfigError("params.max_time_factor: must be > 1");
  const auto& eps = ctx.cfg.epsilon_ladder;
  const auto ref = ctx.reference(RefKind::supremum, t, P.integer("n_ref"));
  const auto rec_stride = static_cast<std::int64_t>(grid.record_stride);

  for (std::size_t j = 0; j < eps.size(); ++j) {
    const bool last = j + 1 == eps.size();
    const double T = static_cast<double>(steps_for(t, eps[j], dt)) * dt;
    const double s = std::pow(eps[j], 1.0 / alpha);
    const auto max_steps = static_cast<std::int64_t>(std::ceil(budget * T / dt));
    struct Out {
      double value = 0.0, free_time = 0.0;
      PathSample recorded;
    };
    auto res = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
      RngStream rng = derive_stream(ctx.cfg.master_seed, i);
      Out r;
      const bool rec = last && ctx.exports(i);
      FreeStepper st(ctx.ff, 0.0, v0);
      InfimumClock clk;
      clk.push(0.0, 0.0);
      if (rec) r.recorded.push(0.0, 0.0, v0);
      const double sq = std::sqrt(dt);
      std::int64_t k = 0;
      while (clk.clock() < T - 0.5 * dt) {
        if (++k > max_steps) {
          std::ostringstream os;
          os << "inelastic clock reached only " << clk.clock() << " of " << T << " after "
             << max_steps << " free steps (path " << i << ")";
          throw SimulationError(os.str());
        }
        st.step(dt, sq * rng.noise.normal());
        const double xr = clk.push(static_cast<double>(k) * dt, st.x);
        if (rec && k % rec_stride == 0) r.recorded.push(static_cast<double>(k) * dt, xr, st.v);
      }
      reflevy::detail::check_finite(st.x, st.v, static_cast<double>(k) * dt);
      r.value = s * clk.last();
      r.free_time = static_cast<double>(k) * dt;
      return r;
    });
    std::vector<double> xs, ratio;
    for (const auto& r : res) {
      xs.push_back(r.value);
      ratio.push_back(T / r.free_time);
    }
    detail::write_ladder_samples(ctx, "inelastic", xs, eps[j]);
    const std::string tag = "eps_" + eps_tag(eps[j]);
    ctx.report.diagnostics["clock_over_free_time_median"][tag] = median(ratio);
    if (last) {
      ctx.ks_metric("ks_" + tag, xs, ref, tol, "inelastic-limit", provenance::kInelastic);
      for (auto& r : res)
        if (!r.recorded.t.empty()) ctx.exported.push_back(std::move(r.recorded));
    } else {
      ctx.report.diagnostics["ladder"][tag] = {{"ks", ks_two_sample(xs, ref)}};
    }
  }
  if (ctx.cfg.export_paths > 0)
    ctx.report.diagnostics["paths_csv"] =
        "free path reflected on its infimum, before the time change";
}

}  // namespace reflevy::harness
