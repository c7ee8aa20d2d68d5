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
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "reflevy/model.hpp"
#include "reflevy/path.hpp"
#include "reflevy/rng.hpp"

namespace reflevy {

/// Symmetric stable draw with E exp(i xi X) = exp(-|xi|^alpha)
/// (Chambers-Mallows-Stuck). alpha = 1 goes through the Cauchy branch.
inline double standard_symmetric_stable(double alpha, Variates& g) {
  const double u = std::numbers::pi * (g.uniform() - 0.5);
  if (alpha == 1.0) return std::tan(u);
  const double w = g.exponential();
  return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
}

/// Increment over dt: characteristic function exp(-dt sigma |xi|^alpha).
inline double sample_stable_increment(const StableParams& p, double dt, Variates& g) {
  if (!(p.alpha > 0.0 && p.alpha <= 2.0)) throw std::invalid_argument("alpha must be in (0,2]");
  return std::pow(dt * p.sigma_alpha, 1.0 / p.alpha) * standard_symmetric_stable(p.alpha, g);
}

struct StablePath {
  std::vector<double> t;
  std::vector<double> z;
  std::vector<double> r;  ///< z minus its running infimum (with 0)
};

inline StablePath simulate_stable_path(const StableParams& p, const SimGrid& grid,
                                       RngStream& rng) {
  grid.validate();
  const std::int64_t n = grid.steps();
  const double scale = std::pow(grid.dt * p.sigma_alpha, 1.0 / p.alpha);
  StablePath s;
  s.t.push_back(0.0);
  s.z.push_back(0.0);
  s.r.push_back(0.0);
  double z = 0.0, m = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    z += scale * standard_symmetric_stable(p.alpha, rng.noise);
    m = std::min(m, z);
    if ((k + 1) % static_cast<std::int64_t>(grid.record_stride) == 0 || k + 1 == n) {
      s.t.push_back(static_cast<double>(k + 1) * grid.dt);
      s.z.push_back(z);
      s.r.push_back(z - m);
    }
  }
  return s;
}

/// Running supremum at t of a stable path on n_steps equal steps. Equal in
/// law to the process reflected on its infimum at time t.
inline double sample_reflected_marginal(const StableParams& p, double t, std::int64_t n_steps,
                                        RngStream& rng) {
  if (!(t > 0.0) || n_steps < 1) throw std::invalid_argument("sample_reflected_marginal: bad grid");
  const double scale = std::pow(t / static_cast<double>(n_steps) * p.sigma_alpha, 1.0 / p.alpha);
  double z = 0.0, s = 0.0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    z += scale * standard_symmetric_stable(p.alpha, rng.noise);
    s = std::max(s, z);
  }
  return s;
}

/// Supremum over [0, t] through the stick-breaking form of the concave
/// majorant: sup = sum_k max(Z over stick k, 0) with sticks cut from [0, t]
/// by successive uniforms. Exact in law; sticks stop once the remaining
/// length falls below t * rel_tol.
inline double sample_stable_supremum(const StableParams& p, double t, RngStream& rng,
                                     double rel_tol = 1e-15) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_stable_supremum: t must be > 0");
  double rest = t, s = 0.0;
  while (rest > t * rel_tol) {
    const double len = rest * rng.noise.uniform();
    rest -= len;
    s += std::max(0.0, sample_stable_increment(p, len, rng.noise));
  }
  return s;
}

/// Same grid, reflection map instead of the supremum.
inline double sample_reflected_by_infimum(const StableParams& p, double t, std::int64_t n_steps,
                                          RngStream& rng) {
  const double scale = std::pow(t / static_cast<double>(n_steps) * p.sigma_alpha, 1.0 / p.alpha);
  double z = 0.0, m = 0.0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    z += scale * standard_symmetric_stable(p.alpha, rng.noise);
    m = std::min(m, z);
  }
  return z - m;
}

/// 2^a pi a^{2a} / (2 a Gamma(a)^2 sin(pi a / 2)).
inline double kappa_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("kappa_alpha: alpha in (0,2)");
  const double g = std::tgamma(alpha);
  return std::pow(2.0, alpha) * std::numbers::pi * std::pow(alpha, 2.0 * alpha) /
         (2.0 * alpha * g * g * std::sin(std::numbers::pi * alpha / 2.0));
}

struct BianeYorConfig {
  double dt = 1e-6;          ///< finest Brownian step
  double eta_local = 0.0;    ///< occupation bandwidth; 0 selects dt^{1/4}
  double step_factor = 0.1;  ///< away from 0 the step is (step_factor |W|)^2
  double max_time = 1e7;     ///< Brownian time budget before extension
};

class BianeYorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// K^eta at the first time the occupation estimate of the local time at 0
/// reaches 1, for every truncation level in `etas`, from one Brownian path.
inline std::vector<double> biane_yor_ladder(double alpha, const BianeYorConfig& cfg,
                                            const std::vector<double>& etas, RngStream& rng) {
  if (!(alpha > 2.0 / 3.0 && alpha < 2.0))
    throw std::invalid_argument("biane_yor: alpha must be in (2/3, 2)");
  for (double e : etas)
    if (!(e > 0.0)) throw std::invalid_argument("biane_yor: eta must be > 0");
  const double etaL = cfg.eta_local > 0.0 ? cfg.eta_local : std::pow(cfg.dt, 0.25);
  const double p = 1.0 / alpha - 2.0;
  std::vector<double> k(etas.size(), 0.0);
  double w = 0.0, t = 0.0, occ = 0.0;
  const double need = 2.0 * etaL;  // Leb{|W| <= etaL} at which L reaches 1
  double budget = cfg.max_time;
  for (int extension = 0; extension < 2; ++extension) {
    while (t < budget) {
      const double a = std::abs(w);
      const double h = std::max(cfg.dt, cfg.step_factor * cfg.step_factor * a * a);
      if (a <= etaL) {
        if (occ + h >= need) {
          const double part = need - occ;
          const double f = a > 0 ? std::copysign(std::pow(a, p), w) : 0.0;
          for (std::size_t i = 0; i < etas.size(); ++i)
            if (a > etas[i]) k[i] += f * part;
          return k;
        }
        occ += h;
      }
      if (a > 0.0) {
        const double f = std::copysign(std::pow(a, p), w) * h;
        for (std::size_t i = 0; i < etas.size(); ++i)
          if (a > etas[i]) k[i] += f;
      }
      w += std::sqrt(h) * rng.noise.normal();
      t += h;
    }
    budget *= 10.0;
  }
  std::ostringstream os;
  os << "biane_yor: local time did not reach 1 within Brownian time " << budget / 10.0;
  throw BianeYorError(os.str());
}

/// One approximately stable draw with scale constant kappa_alpha.
inline double biane_yor_stable_sample(double alpha, const BianeYorConfig& cfg, double eta,
                                      RngStream& rng) {
  return biane_yor_ladder(alpha, cfg, {eta}, rng).front();
}

/// Multiplier taking kappa-normalized draws to sigma-normalized ones.
inline double biane_yor_rescale(double alpha, double sigma) {
  return std::pow(sigma / kappa_alpha(alpha), 1.0 / alpha);
}

}  // namespace reflevy
