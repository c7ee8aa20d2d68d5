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
#include <numbers>
#include <string>
#include <vector>

#include "reflevy/analysis.hpp"
#include "reflevy/generator.hpp"
#include "reflevy/harness/context.hpp"
#include "reflevy/harness/pool.hpp"
#include "reflevy/sde.hpp"
#include "reflevy/stable.hpp"

namespace reflevy::harness {

namespace provenance {
inline constexpr const char* kEcf =
    "stable reference: E exp(i xi Z_t) = exp(-t sigma_alpha |xi|^alpha)";
inline constexpr const char* kScaling = "stable reference: independent stationary increments";
inline constexpr const char* kCauchy = "stable reference at alpha = 1: Cauchy law of scale t sigma";
inline constexpr const char* kBianeYor =
    "Biane-Yor: principal-value functional of Brownian motion at the inverse local time is "
    "symmetric stable";
inline constexpr const char* kWeakForm =
    "reflected stable process: d/dt E f(R_t) = E L^alpha f(R_t) for f vanishing near 0";
inline constexpr const char* kTwoForms = "L^alpha: direct and integrated-by-parts forms agree";
inline constexpr const char* kKinetic =
    "kinetic weak form with boundary terms; restart velocities independent of the past";
inline constexpr const char* kDensity =
    "reflected stable marginal: survival ~ x^{-alpha} at infinity, density ~ x^{alpha/2 - 1} at 0";
}  // namespace provenance

/// CMS draws against the characteristic function, increment additivity,
/// the Cauchy CDF when alpha = 1, and Biane-Yor draws.
inline void run_stable_validate(RunContext& ctx) {
  const auto& P = ctx.params();
  const StableParams& sp = ctx.sp;
  const double t = ctx.cfg.grid.horizon, z = P.num("z_max");
  const auto n_cf = static_cast<std::size_t>(P.integer("n_cf"));
  const auto xs = parallel_map(n_cf, ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed, i);
    return sample_stable_increment(sp, t, rng.noise);
  });
  ctx.out.write_samples("cms", xs, {{"alpha", sp.alpha}, {"sigma_alpha", sp.sigma_alpha}, {"t", t}});
  const double n = static_cast<double>(xs.size());
  for (double xi : P.list("xis")) {
    double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
    for (double x : xs) {
      const double c = std::cos(xi * x), s = std::sin(xi * x);
      re += c;
      im += s;
      re2 += c * c;
      im2 += s * s;
    }
    re /= n;
    im /= n;
    const double se_re = std::sqrt(std::max(re2 / n - re * re, 0.0) / (n - 1.0));
    const double se_im = std::sqrt(std::max(im2 / n - im * im, 0.0) / (n - 1.0));
    const double exact = std::exp(-t * sp.sigma_alpha * std::pow(std::abs(xi), sp.alpha));
    char tag[32];
    std::snprintf(tag, sizeof tag, "%g", xi);
    ctx.report.diagnostics["ecf"][tag] = {
        {"re", re}, {"im", im}, {"exact", exact}, {"se_re", se_re}, {"se_im", se_im}};
    ctx.report.check_within(std::string("ecf_re_xi_") + tag, re, exact, z * se_re, "ecf",
                            provenance::kEcf);
    ctx.report.check_within(std::string("ecf_im_xi_") + tag, im, 0.0, z * se_im, "ecf",
                            provenance::kEcf);
  }

  const auto n_sc = static_cast<std::size_t>(P.integer("n_scaling"));
  const auto pieces = P.integer("scaling_pieces");
  if (pieces < 2) throw ConfigError("params.scaling_pieces: must be >= 2");
  const auto sums = parallel_map(n_sc, ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed ^ 0x5CA1E5CA1E5CA1E5ULL, i);
    double s = 0.0;
    for (std::int64_t k = 0; k < pieces; ++k)
      s += sample_stable_increment(sp, t / static_cast<double>(pieces), rng.noise);
    return s;
  });
  const std::vector<double> head(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(std::min(n_sc, xs.size())));
  const KsReport sc = ks_two_sample(sums, head);
  ctx.report.diagnostics["ks"]["scaling"] = sc;
  ctx.report.check("scaling_ks_pvalue", sc.p_value, Cmp::gt, P.num("p_min"), "scaling",
                   provenance::kScaling);

  if (sp.alpha == 1.0) {
    const double scale = t * sp.sigma_alpha;
    const KsReport c = ks_one_sample(
        xs, [&](double x) { return 0.5 + std::atan(x / scale) / std::numbers::pi; });
    ctx.report.diagnostics["ks"]["cauchy_cdf"] = c;
    ctx.report.check("ks_cauchy_cdf", c.statistic, Cmp::lt, c.critical_1pct, "cauchy-cdf",
                     provenance::kCauchy);
  } else {
    ctx.report.diagnostics["cauchy_cdf"] = "skipped: alpha != 1";
  }

  const double alpha = sp.alpha;
  if (alpha > 2.0 / 3.0 && alpha < 2.0) {
    BianeYorConfig by;
    by.dt = P.num("by_dt");
    const double eta = P.num("by_eta");
    const auto n_by = static_cast<std::size_t>(P.integer("n_by"));
    // Biane-Yor draws live at unit inverse local time; scale to time t
    const double k = biane_yor_rescale(alpha, sp.sigma_alpha) * std::pow(t, 1.0 / alpha);
    const auto b = parallel_map(n_by, ctx.threads, [&](std::size_t i) {
      RngStream rng = derive_stream(ctx.cfg.master_seed ^ 0xB1A4E10B1A4E10B1ULL, i);
      return k * biane_yor_stable_sample(alpha, by, eta, rng);
    });
    ctx.out.write_samples("biane_yor", b, {{"alpha", alpha}, {"dt", by.dt}, {"eta", eta}, {"t", t}});
    const std::vector<double> cms(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(std::min(n_by, xs.size())));
    ctx.ks_metric("ks_biane_yor_vs_cms", b, cms, P.num("by_ks_tol"), "biane-yor",
                  provenance::kBianeYor);
  } else {
    ctx.report.diagnostics["biane_yor"] = "skipped: alpha outside (2/3, 2)";
  }
}

/// Generator identities at the alphas listed in params (sigma fixed by
/// params.sigma), the kinetic weak form on the configured model, and
/// density exponents of the reflected marginal.
inline void run_generator(RunContext& ctx) {
  const auto& P = ctx.params();
  const double sigma = P.num("sigma"), h = P.num("h"), t = ctx.cfg.grid.horizon;
  const double z = P.num("z_max");
  const auto n = static_cast<std::size_t>(P.integer("n_weak"));
  const auto n_dens = static_cast<std::size_t>(P.integer("n_density"));
  const std::vector<std::pair<std::string, TestFunction>> bumps = {
      {"bump_1_3", TestFunction::bump(1.0, 3.0)},
      {"bump_0.5_1.5", TestFunction::bump(0.5, 1.5)},
      {"bump_2_5", TestFunction::bump(2.0, 5.0, 0.5)}};
  const std::vector<double> probes = {0.0, 0.3, 0.75, 1.2, 2.0, 2.7, 4.0, 10.0};

  int ia = 0;
  for (double alpha : P.list("alphas")) {
    const StableParams sp{alpha, sigma, 0.0};
    char atag[32];
    std::snprintf(atag, sizeof atag, "alpha_%g", alpha);
    // R_s = s^{1/alpha} R_1 in law, so one draw serves three times
    const auto r1 = parallel_map(n, ctx.threads, [&](std::size_t i) {
      RngStream rng = derive_stream(ctx.cfg.master_seed + 1000003ULL * static_cast<std::uint64_t>(ia), i);
      return sample_stable_supremum(sp, 1.0, rng);
    });
    std::vector<double> a0(n), a1(n), am(n), a1h(n), amh(n);
    for (std::size_t i = 0; i < n; ++i) {
      a0[i] = std::pow(t, 1.0 / alpha) * r1[i];
      a1[i] = std::pow(t + h, 1.0 / alpha) * r1[i];
      am[i] = std::pow(t + h / 2, 1.0 / alpha) * r1[i];
      a1h[i] = std::pow(t + h / 2, 1.0 / alpha) * r1[i];
      amh[i] = std::pow(t + h / 4, 1.0 / alpha) * r1[i];
    }
    for (const auto& [name, f] : bumps) {
      const GeneratorTable L(sp, f);
      const WeakFormResult w = weak_form_residual(L, f, h, a0, a1, am);
      const WeakFormResult wh = weak_form_residual(L, f, h / 2, a0, a1h, amh);
      const std::string key = std::string(atag) + "_" + name;
      ctx.report.diagnostics["weak_form"][key] = {
          {"h", w}, {"h_half", wh}, {"richardson_fd", (4.0 * wh.finite_difference - w.finite_difference) / 3.0}};
      ctx.report.check("weak_form_residual_over_se_" + key, w.residual / w.std_error, Cmp::lt, z,
                       "weak-form", provenance::kWeakForm);
    }
    if (alpha < 1.0) {
      const TestFunction& f = bumps.front().second;
      double worst = 0.0;
      for (double x : probes) {
        const double a = fractional_generator(sp, f, x), b = fractional_generator_second_form(sp, f, x);
        worst = std::max(worst, std::abs(a - b));
      }
      ctx.report.check(std::string("two_forms_max_abs_diff_") + atag, worst, Cmp::le,
                       P.num("forms_tol"), "two-forms", provenance::kTwoForms);
    } else {
      ctx.report.diagnostics["two_forms"][atag] = "second form requires alpha < 1";
    }

    const auto d = parallel_map(n_dens, ctx.threads, [&](std::size_t i) {
      RngStream rng = derive_stream(ctx.cfg.master_seed + 7777777ULL + 1000003ULL * static_cast<std::uint64_t>(ia), i);
      return sample_stable_supremum(sp, t, rng);
    });
    const DensityAsymptotics da = density_asymptotics_check(d);
    ctx.report.diagnostics["density"][atag] = da;
    ctx.report.check_within(std::string("tail_exponent_") + atag, da.tail.value, -alpha,
                            P.num("tail_tol"), "density-tail", provenance::kDensity);
    ctx.report.check_within(std::string("origin_exponent_") + atag,
                            da.origin ? da.origin->value : std::nan(""), alpha / 2.0 - 1.0,
                            P.num("origin_tol"), "density-origin", provenance::kDensity);
    ++ia;
  }

  // kinetic weak form on the configured model and boundary law
  const BoundaryLaw mu = ctx.cfg.boundary_law();
  const SimGrid kg{ctx.cfg.grid.dt, P.num("kin_horizon"), 1};
  const double kv0 = P.num("kin_v0");
  const KineticTestFunction phi{TestFunction::bump(-1.0, P.num("kin_horizon")),
                                TestFunction::bump(-1.0, 2.0), TestFunction::bump(-3.0, 3.0)};
  struct KOut {
    KineticPathTerms terms;
    std::vector<BoundaryEvent> events;
  };
  const auto kin = parallel_map(ctx.n_paths(), ctx.threads, [&](std::size_t i) {
    RngStream rng = derive_stream(ctx.cfg.master_seed, i);
    const PathSample p = simulate_reflected(ctx.ff, mu, kv0, kg, rng);
    return KOut{kinetic_path_terms(phi, ctx.ff, p), p.events};
  });
  std::vector<KineticPathTerms> terms;
  std::vector<BoundaryEvent> events;
  for (const auto& k : kin) {
    terms.push_back(k.terms);
    events.insert(events.end(), k.events.begin(), k.events.end());
  }
  const KineticReport kr = kinetic_weak_form_check(terms, events);
  ctx.report.diagnostics["kinetic"] = kr;
  ctx.report.check("kinetic_residual_over_se", kr.residual / kr.std_error, Cmp::lt, z,
                   "kinetic-weak-form", provenance::kKinetic);
  ctx.report.check("restart_events", static_cast<double>(kr.n_events), Cmp::ge,
                   P.num("min_events"), "factorization", provenance::kKinetic);
  ctx.report.check("factorization_ks_pvalue",
                   kr.factorization ? kr.factorization->p_value : std::nan(""), Cmp::gt,
                   P.num("p_min"), "factorization", provenance::kKinetic);
}

}  // namespace reflevy::harness
