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
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/boundary_law.hpp"
#include "reflevy/model.hpp"
#include "reflevy/path.hpp"
#include "reflevy/rng.hpp"

namespace reflevy {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimOptions {
  bool zero_noise = false;  ///< all Brownian increments set to 0
  bool zero_force = false;  ///< F replaced by 0
  int max_events_per_step = 16;
  int max_halvings = 20;  ///< smallest sub-step is dt * 2^-max_halvings
};

namespace detail {

inline double velocity_step(const ForceField& ff, double v, double h, double db,
                            const SimOptions& o) {
  const double f = o.zero_force ? 0.0 : ff.force(v);
  return v + f * h + db;
}

/// First s in [0, h] where x + v0 s + (v1 - v0) s^2 / (2h) reaches 0, or -1.
/// x >= 0. The path is the exact integral of the linearly interpolated
/// velocity, so its trapezoid value at s = h is x + h (v0 + v1) / 2.
inline double first_root(double x, double v0, double v1, double h) {
  const double x1 = x + 0.5 * h * (v0 + v1);
  const bool dips = v0 < 0.0 && v1 > 0.0 && x - v0 * v0 * h / (2.0 * (v1 - v0)) <= 0.0;
  if (x1 > 0.0 && !dips) return -1.0;
  if (x <= 0.0) {
    if (v0 < 0.0 || (v0 == 0.0 && v1 < 0.0)) return 0.0;
    if (v0 == 0.0) return -1.0;
  }
  const double A = 0.5 * (v1 - v0) / h;
  double best = std::numeric_limits<double>::infinity();
  auto take = [&](double r) {
    if (r > 0.0 && r < best) best = r;
  };
  if (A == 0.0) {
    if (v0 < 0.0) take(-x / v0);
  } else if (x <= 0.0) {
    take(-v0 / A);
  } else {
    const double D = v0 * v0 - 4.0 * A * x;
    if (D >= 0.0) {
      const double q = -0.5 * (v0 + std::copysign(std::sqrt(D), v0 == 0.0 ? 1.0 : v0));
      if (q != 0.0) {
        take(q / A);
        take(x / q);
      }
    } else if (x1 <= 0.0) {
      take(h);  // rounding: the node value says the path is at or below 0
    }
  }
  if (!(best <= h)) return x1 <= 0.0 ? h : -1.0;
  return best;
}

}  // namespace detail

/// One step of the free recursion.
class FreeStepper {
 public:
  FreeStepper(const ForceField& ff, double x0, double v0, SimOptions opt = {})
      : ff_(&ff), opt_(opt), x(x0), v(v0) {}

  void step(double h, double db) {
    const double v1 = detail::velocity_step(*ff_, v, h, db, opt_);
    x += 0.5 * h * (v + v1);
    v = v1;
  }

 private:
  const ForceField* ff_;
  SimOptions opt_;

 public:
  double x;
  double v;
};

/// One step of the reflected recursion. A null law selects specular
/// reflection, in which case the noise after each reflection is mirrored so
/// that, under shared increments, the path tracks (|X|, sgn(X) V).
class ReflectedStepper {
 public:
  ReflectedStepper(const ForceField& ff, const BoundaryLaw* mu, double v0, RngStream& rng,
                   std::vector<BoundaryEvent>* events, SimOptions opt = {})
      : ff_(&ff), mu_(mu), rng_(&rng), events_(events), opt_(opt), x(0.0), v(v0) {}

  void step(double t0, double h, double db) { advance(t0, h, db, 0); }

  std::size_t hits() const noexcept { return hits_; }
  double noise_sign() const noexcept { return sign_; }

 private:
  void advance(double t0, double h, double db, int depth) {
    const double xs = x, vs = v, ss = sign_;
    const std::size_t es = events_ ? events_->size() : 0;
    const std::size_t hs = hits_;
    double t = t0, rem = h, b = db;
    int count = 0;
    while (true) {
      const double v1 = detail::velocity_step(*ff_, v, rem, sign_ * b, opt_);
      const double s = detail::first_root(x, v, v1, rem);
      if (s < 0.0) {
        x += 0.5 * rem * (v + v1);
        v = v1;
        return;
      }
      const double frac = s / rem;
      const double v_in = std::min(0.0, v + (v1 - v) * frac);
      const double v_out = mu_ ? mu_->sample(rng_->restart) : -v_in;
      ++hits_;
      if (events_) {
        events_->push_back({t + s, mu_ ? EventKind::restart_diffusive : EventKind::restart_specular,
                            v_in, v_out});
      }
      if (++count > opt_.max_events_per_step) {
        x = xs;
        v = vs;
        sign_ = ss;
        hits_ = hs;
        if (events_) events_->resize(es);
        if (depth >= opt_.max_halvings) {
          std::ostringstream os;
          os << "boundary guard: more than " << opt_.max_events_per_step
             << " hits in a sub-step of length " << h << " at t = " << t0;
          throw SimulationError(os.str());
        }
        const double z = opt_.zero_noise ? 0.0 : rng_->restart.normal();
        const double b1 = 0.5 * db + 0.5 * std::sqrt(h) * z;
        advance(t0, 0.5 * h, b1, depth + 1);
        advance(t0 + 0.5 * h, 0.5 * h, db - b1, depth + 1);
        return;
      }
      x = 0.0;
      v = v_out;
      if (!mu_) sign_ = -sign_;
      t += s;
      b *= (rem - s) / rem;
      rem -= s;
      if (!(rem > 0.0)) return;
    }
  }

  const ForceField* ff_;
  const BoundaryLaw* mu_;
  RngStream* rng_;
  std::vector<BoundaryEvent>* events_;
  SimOptions opt_;
  double sign_ = 1.0;
  std::size_t hits_ = 0;

 public:
  double x;
  double v;
};

namespace detail {

inline double increment(RngStream& rng, double sqdt, const SimOptions& o) {
  return o.zero_noise ? 0.0 : sqdt * rng.noise.normal();
}

inline void check_finite(double x, double v, double t) {
  if (!std::isfinite(x) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite state at t = " << t;
    throw SimulationError(os.str());
  }
}

template <class Stepper, class Advance>
PathSample run_recorded(const SimGrid& grid, Stepper& st, Advance&& adv) {
  const std::int64_t n = grid.steps();
  PathSample p;
  p.reserve(static_cast<std::size_t>(n / static_cast<std::int64_t>(grid.record_stride)) + 2);
  p.push(0.0, st.x, st.v);
  const auto stride = static_cast<std::int64_t>(grid.record_stride);
  std::int64_t countdown = stride;
  for (std::int64_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) * grid.dt;
    adv(t0);
    const std::int64_t k1 = k + 1;
    if (--countdown == 0 || k1 == n) {
      countdown = stride;
      const double t1 = static_cast<double>(k1) * grid.dt;
      check_finite(st.x, st.v, t1);
      p.push(t1, st.x, st.v);
    }
  }
  return p;
}

}  // namespace detail

/// Free kinetic pair: Euler-Maruyama velocity, trapezoid position.
inline PathSample simulate_free(const ForceField& ff, double x0, double v0, const SimGrid& grid,
                                RngStream& rng, const SimOptions& opt = {}) {
  grid.validate(ff);
  FreeStepper st(ff, x0, v0, opt);
  const double sq = std::sqrt(grid.dt);
  return detail::run_recorded(grid, st, [&](double) {
    st.step(grid.dt, detail::increment(rng, sq, opt));
  });
}

namespace detail {
inline PathSample simulate_boundary(const ForceField& ff, const BoundaryLaw* mu, double v0,
                                    const SimGrid& grid, RngStream& rng, const SimOptions& opt) {
  grid.validate(ff);
  if (!(v0 > 0.0)) throw std::invalid_argument("reflected start velocity must be > 0");
  std::vector<BoundaryEvent> events;
  ReflectedStepper st(ff, mu, v0, rng, &events, opt);
  const double sq = std::sqrt(grid.dt);
  PathSample p = run_recorded(grid, st, [&](double t0) {
    st.step(t0, grid.dt, increment(rng, sq, opt));
  });
  p.events = std::move(events);
  return p;
}
}  // namespace detail

/// Diffusive reflection at x = 0 with restart law mu.
inline PathSample simulate_reflected(const ForceField& ff, const BoundaryLaw& mu, double v0,
                                     const SimGrid& grid, RngStream& rng,
                                     const SimOptions& opt = {}) {
  return detail::simulate_boundary(ff, &mu, v0, grid, rng, opt);
}

/// Specular reflection at x = 0.
inline PathSample simulate_specular(const ForceField& ff, double v0, const SimGrid& grid,
                                    RngStream& rng, const SimOptions& opt = {}) {
  return detail::simulate_boundary(ff, nullptr, v0, grid, rng, opt);
}

/// x_n - min(0, min_{k<=n} x_k), velocities copied.
inline PathSample reflect_on_infimum(const PathSample& p) {
  PathSample out;
  out.t = p.t;
  out.v = p.v;
  out.x.resize(p.x.size());
  double m = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    m = std::min(m, p.x[i]);
    out.x[i] = p.x[i] - m;
  }
  return out;
}

/// Streaming form of reflect_on_infimum plus the occupation clock
/// A = int 1{Xcal > 0}. An interval counts when either endpoint is positive.
class InfimumClock {
 public:
  explicit InfimumClock(double tol_zero = 1e-12) : tol_(tol_zero) {}

  /// Feeds the next node; returns the reflected value there.
  double push(double t, double x) {
    m_ = std::min(m_, x);
    const double r = x - m_;
    if (started_) {
      if (r > tol_ || prev_ > tol_) a_ += t - prev_t_;
    }
    started_ = true;
    prev_ = r;
    prev_t_ = t;
    return r;
  }

  double clock() const noexcept { return a_; }
  double last() const noexcept { return prev_; }
  double infimum() const noexcept { return m_; }

 private:
  double tol_;
  double m_ = 0.0;
  double a_ = 0.0;
  double prev_ = 0.0;
  double prev_t_ = 0.0;
  bool started_ = false;
};

/// Time-change construction of the inelastic solution from a free path
/// started at (0, v0). The output uses the input's first spacing as its grid.
inline PathSample inelastic_from_free(const PathSample& p, bool* compressed_warning = nullptr) {
  if (p.size() < 2) throw std::invalid_argument("inelastic_from_free: path too short");
  if (p.x.front() != 0.0) throw std::invalid_argument("inelastic_from_free: path must start at 0");
  const PathSample r = reflect_on_infimum(p);
  double scale = 1.0;
  for (double xv : r.x) scale = std::max(scale, std::abs(xv));
  const double tol = 1e-12 * scale;
  const std::size_t n = r.size();
  std::vector<double> a(n, 0.0);
  std::vector<char> counted(n, 0);  // counted[k]: interval [k, k+1]
  for (std::size_t k = 0; k + 1 < n; ++k) {
    counted[k] = r.x[k] > tol || r.x[k + 1] > tol;
    a[k + 1] = a[k] + (counted[k] ? r.t[k + 1] - r.t[k] : 0.0);
  }
  const double dt = r.t[1] - r.t[0];
  const double a_end = a[n - 1];
  if (compressed_warning) *compressed_warning = a_end < 0.5 * r.t.back();
  PathSample out;
  const auto m = static_cast<std::size_t>(std::floor(a_end / dt + 1e-9));
  out.reserve(m + 1);
  std::size_t k = 0;
  for (std::size_t j = 0; j <= m; ++j) {
    const double s = static_cast<double>(j) * dt;
    const double slack = 1e-9 * dt;
    // right-continuous inverse: first counted interval with a[k+1] > s
    while (k + 1 < n && !(counted[k] && a[k + 1] > s + slack)) ++k;
    double xv, vv;
    if (k + 1 >= n) {
      xv = r.x[n - 1];
      vv = r.v[n - 1];
    } else {
      const double len = a[k + 1] - a[k];
      double f = std::clamp((s - a[k]) / len, 0.0, 1.0);
      if (f < 1e-9) f = 0.0;
      xv = r.x[k] + f * (r.x[k + 1] - r.x[k]);
      vv = r.v[k] + f * (r.v[k + 1] - r.v[k]);
      if (f == 0.0) {
        xv = r.x[k];
        vv = r.v[k];
      }
    }
    out.push(s, std::max(0.0, xv), vv);
  }
  return out;
}

/// Occupation clock of reflect_on_infimum(p) at each node.
inline std::vector<double> inelastic_clock(const PathSample& p) {
  std::vector<double> a;
  a.reserve(p.size());
  double scale = 1.0;
  {
    double m = 0.0;
    for (double xv : p.x) {
      m = std::min(m, xv);
      scale = std::max(scale, xv - m);
    }
  }
  InfimumClock c(1e-12 * scale);
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.push(p.t[i], p.x[i]);
    a.push_back(c.clock());
  }
  return a;
}

/// Streaming form of the second construction. Feeds consecutive free nodes;
/// tau_n is the first downcrossing of the level X(sigma_{n-1}) and sigma_n
/// the first time V reaches the fresh level M_n ~ mu, both located by linear
/// interpolation between nodes.
class SecondConstructionTracker {
 public:
  SecondConstructionTracker(const BoundaryLaw& mu, Variates& restart, double x0)
      : mu_(&mu), restart_(&restart), level_(x0) {}

  void push(double t0, double x0, double v0, double t1, double x1, double v1) {
    double f = 0.0;
    const double h = t1 - t0;
    for (int guard = 0; guard < 64; ++guard) {
      if (f >= 1.0) break;
      if (!zero_) {
        const double xf = x0 + f * (x1 - x0);
        if (!(xf > level_ ? x1 <= level_ : x1 < level_)) break;
        double g = xf <= level_ ? f : (x0 - level_) / (x0 - x1);
        g = std::clamp(g, f, 1.0);
        const double tau = t0 + g * h;
        taus.push_back(tau);
        zero_ = true;
        zero_start_ = tau;
        m_ = mu_->sample(*restart_);
        f = g;
      } else {
        const double gs = v0 + f * (v1 - v0) - m_;
        const double ge = v1 - m_;
        if (gs != 0.0 && (gs > 0.0) == (ge > 0.0) && ge != 0.0) break;
        double g = gs == 0.0 ? f : (m_ - v0) / (v1 - v0);
        g = std::clamp(g, f, 1.0);
        const double sigma = t0 + g * h;
        sigmas.push_back(sigma);
        levels.push_back(m_);
        zero_time_ += sigma - zero_start_;
        zero_ = false;
        double lv = x0 + g * (x1 - x0);
        lv = std::max(lv, std::min(x0, x1));
        level_ = std::min(lv, std::max(x0, x1));
        f = g;
      }
    }
    t_ = t1;
    x_ = x1;
    v_ = v1;
  }

  /// Xfrak at the last fed node.
  double frak_x() const noexcept { return zero_ ? 0.0 : std::max(0.0, x_ - level_); }
  double frak_v() const noexcept { return zero_ ? 0.0 : v_; }
  /// A'(t) at the last fed node.
  double aprime() const noexcept {
    return t_ - zero_time_ - (zero_ ? t_ - zero_start_ : 0.0);
  }
  bool in_zero_phase() const noexcept { return zero_; }
  double level() const noexcept { return level_; }

  std::vector<double> taus;
  std::vector<double> sigmas;
  std::vector<double> levels;  ///< M_n

 private:
  const BoundaryLaw* mu_;
  Variates* restart_;
  double level_;
  bool zero_ = false;
  double m_ = 0.0;
  double zero_start_ = 0.0;
  double zero_time_ = 0.0;
  double t_ = 0.0, x_ = 0.0, v_ = 0.0;
};

struct SecondConstruction {
  PathSample frak;             ///< (Xfrak, Vfrak) on the recorded grid
  std::vector<double> aprime;  ///< A' on the recorded grid
  std::vector<double> taus;
  std::vector<double> sigmas;
  std::vector<double> levels;
  PathSample free;  ///< the underlying free path on the recorded grid
  bool few_cycles = false;
};

/// Builds Xfrak from one free path started at (0, v0).
inline SecondConstruction second_construction(const ForceField& ff, const BoundaryLaw& mu,
                                              double v0, const SimGrid& grid, RngStream& rng,
                                              const SimOptions& opt = {}) {
  grid.validate(ff);
  if (!(v0 > 0.0)) throw std::invalid_argument("second_construction: v0 must be > 0");
  SecondConstruction out;
  FreeStepper st(ff, 0.0, v0, opt);
  SecondConstructionTracker tr(mu, rng.restart, 0.0);
  const std::int64_t n = grid.steps();
  const double sq = std::sqrt(grid.dt);
  auto record = [&](double t) {
    out.frak.push(t, tr.frak_x(), tr.frak_v());
    out.aprime.push_back(tr.aprime());
    out.free.push(t, st.x, st.v);
  };
  out.frak.push(0.0, 0.0, v0);
  out.aprime.push_back(0.0);
  out.free.push(0.0, 0.0, v0);
  for (std::int64_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) * grid.dt;
    const double t1 = static_cast<double>(k + 1) * grid.dt;
    const double x0 = st.x, vv0 = st.v;
    st.step(grid.dt, detail::increment(rng, sq, opt));
    detail::check_finite(st.x, st.v, t1);
    tr.push(t0, x0, vv0, t1, st.x, st.v);
    if ((k + 1) % static_cast<std::int64_t>(grid.record_stride) == 0 || k + 1 == n) record(t1);
  }
  out.taus = std::move(tr.taus);
  out.sigmas = std::move(tr.sigmas);
  out.levels = std::move(tr.levels);
  out.few_cycles = out.sigmas.size() < 2;
  for (std::size_t i = 0; i < out.taus.size(); ++i) {
    out.frak.events.push_back({out.taus[i], EventKind::tau_time, 0.0, 0.0});
    if (i < out.sigmas.size())
      out.frak.events.push_back({out.sigmas[i], EventKind::sigma_time, 0.0, out.levels[i]});
  }
  return out;
}

/// Xfrak read through the inverse of A' on a uniform grid of spacing dt.
/// Between nodes the underlying free path is linear, so on each positive
/// stretch Xfrak is interpolated from the recorded free path.
inline PathSample time_changed_frak(const SecondConstruction& sc, double dt) {
  const PathSample& fr = sc.free;
  PathSample out;
  const double a_end = sc.aprime.back();
  const auto m = static_cast<std::size_t>(std::floor(a_end / dt + 1e-9));
  // positive stretches [sigma_{n-1}, tau_n) with levels X(sigma_{n-1})
  std::vector<double> starts{0.0}, ends, lv{fr.x.front()};
  for (std::size_t i = 0; i < sc.sigmas.size(); ++i) starts.push_back(sc.sigmas[i]);
  for (double tt : sc.taus) ends.push_back(tt);
  ends.push_back(std::numeric_limits<double>::infinity());
  auto interp = [&](const std::vector<double>& y, double tt) {
    auto it = std::upper_bound(fr.t.begin(), fr.t.end(), tt);
    if (it == fr.t.end()) return y.back();
    const std::size_t i = static_cast<std::size_t>(it - fr.t.begin());
    if (i == 0) return y.front();
    const double f = (tt - fr.t[i - 1]) / (fr.t[i] - fr.t[i - 1]);
    return y[i - 1] + f * (y[i] - y[i - 1]);
  };
  for (std::size_t i = 1; i < starts.size(); ++i) lv.push_back(interp(fr.x, starts[i]));
  double acc = 0.0;
  std::size_t seg = 0;
  for (std::size_t j = 0; j <= m; ++j) {
    const double s = static_cast<double>(j) * dt;
    while (seg + 1 < starts.size() &&
           acc + (std::min(ends[seg], fr.t.back()) - starts[seg]) <= s) {
      acc += std::min(ends[seg], fr.t.back()) - starts[seg];
      ++seg;
    }
    const double u = std::min(starts[seg] + (s - acc), fr.t.back());
    out.push(s, std::max(0.0, interp(fr.x, u) - lv[seg]), interp(fr.v, u));
  }
  return out;
}

/// Persistence episode: start at (0, V0 ~ mu); tau = first return of X to 0;
/// sigma = first time after tau that V reaches a fresh draw M ~ mu.
struct Episode {
  double tau = 0.0;
  double sigma = 0.0;
  bool tau_censored = false;
  bool sigma_censored = false;
};

inline Episode sample_persistence_episode(const ForceField& ff, const BoundaryLaw& mu,
                                          double dt, double t_max, RngStream& rng,
                                          const SimOptions& opt = {}) {
  Episode e;
  double x = 0.0, v = mu.sample(rng.restart);
  const double sq = std::sqrt(dt);
  const auto n = static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9));
  std::int64_t k = 0;
  for (; k < n; ++k) {
    const double v1 = detail::velocity_step(ff, v, dt, detail::increment(rng, sq, opt), opt);
    const double s = detail::first_root(x, v, v1, dt);
    if (s >= 0.0) {
      e.tau = static_cast<double>(k) * dt + s;
      const double vt = v + (v1 - v) * (s / dt);
      const double m = mu.sample(rng.restart);
      if (v1 >= m) {
        const double f = std::clamp((m - vt) / (v1 - vt), 0.0, 1.0);
        e.sigma = e.tau + f * (dt - s);
        return e;
      }
      v = v1;
      for (++k; k < n; ++k) {
        const double w = detail::velocity_step(ff, v, dt, detail::increment(rng, sq, opt), opt);
        if (w >= m) {
          e.sigma = static_cast<double>(k) * dt + dt * (m - v) / (w - v);
          return e;
        }
        v = w;
      }
      e.sigma = t_max;
      e.sigma_censored = true;
      return e;
    }
    x += 0.5 * dt * (v + v1);
    v = v1;
  }
  e.tau = e.sigma = t_max;
  e.tau_censored = e.sigma_censored = true;
  return e;
}

/// First time the velocity, started at v0, crosses `target` (linear
/// interpolation between nodes). Returns nullopt if not reached by t_max.
inline std::optional<double> velocity_hitting_time(const ForceField& ff, double v0,
                                                   double target, double dt, double t_max,
                                                   RngStream& rng, const SimOptions& opt = {}) {
  const bool up = target > v0;
  const double sq = std::sqrt(dt);
  const auto n = static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9));
  double v = v0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double w = detail::velocity_step(ff, v, dt, detail::increment(rng, sq, opt), opt);
    if (up ? w >= target : w <= target) {
      return static_cast<double>(k) * dt + dt * (target - v) / (w - v);
    }
    v = w;
  }
  return std::nullopt;
}

/// sup_{s <= T} |V_s| of the free velocity started at v0.
inline double sup_abs_velocity(const ForceField& ff, double v0, double dt, double t_max,
                               RngStream& rng) {
  const double sq = std::sqrt(dt);
  const auto n = static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9));
  double v = v0, s = std::abs(v0);
  for (std::int64_t k = 0; k < n; ++k) {
    v += ff.force(v) * dt + sq * rng.noise.normal();
    s = std::max(s, std::abs(v));
  }
  return s;
}

}  // namespace reflevy
