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
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/analysis.hpp"
#include "reflevy/model.hpp"
#include "reflevy/path.hpp"
#include "reflevy/quadrature.hpp"

namespace reflevy {

/// Finite sum of smooth bumps c exp(-1/(1-s^2)), s mapping (a, b) onto (-1, 1).
class TestFunction {
 public:
  struct Term {
    double a, b, c;
  };

  TestFunction() = default;

  static TestFunction bump(double a, double b, double height = 1.0) {
    if (!(b > a)) throw std::invalid_argument("TestFunction::bump: need a < b");
    TestFunction f;
    f.terms_.push_back({a, b, height});
    return f;
  }

  TestFunction operator+(const TestFunction& o) const {
    TestFunction f = *this;
    f.terms_.insert(f.terms_.end(), o.terms_.begin(), o.terms_.end());
    return f;
  }
  TestFunction operator*(double k) const {
    TestFunction f = *this;
    for (auto& t : f.terms_) t.c *= k;
    return f;
  }

  double operator()(double x) const { return eval(x, 0); }
  /// Bound on |f|: each bump peaks at |c| / e.
  double sup_abs() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.c);
    return s * std::exp(-1.0);
  }
  double d1(double x) const { return eval(x, 1); }
  double d2(double x) const { return eval(x, 2); }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  double lo() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) v = std::min(v, t.a);
    return v;
  }
  double hi() const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) v = std::max(v, t.b);
    return v;
  }
  /// Narrowest bump width; sets the inner cut of the generator quadrature.
  double width() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) w = std::min(w, t.b - t.a);
    return w;
  }
  bool zero_derivative_at_origin() const { return d1(0.0) == 0.0; }

  /// Points where some bump starts or ends.
  std::vector<double> breakpoints() const {
    std::vector<double> p;
    for (const auto& t : terms_) {
      p.push_back(t.a);
      p.push_back(t.b);
    }
    return p;
  }

 private:
  double eval(double x, int order) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      if (!(x > t.a && x < t.b)) continue;
      const double k = 2.0 / (t.b - t.a);
      const double u = (2.0 * x - t.a - t.b) / (t.b - t.a);
      const double q = 1.0 - u * u;
      const double g = std::exp(-1.0 / q);
      if (order == 0) {
        s += t.c * g;
      } else if (order == 1) {
        s += t.c * g * (-2.0 * u / (q * q)) * k;
      } else {
        const double h1 = -2.0 * u / (q * q);
        const double h2 = -2.0 / (q * q) - 8.0 * u * u / (q * q * q);
        s += t.c * g * (h1 * h1 + h2) * k * k;
      }
    }
    return s;
  }

  std::vector<Term> terms_;
};

/// Density constant C of the Levy measure C |z|^{-1-alpha} dz whose exponent
/// is sigma |xi|^alpha: sigma Gamma(1+alpha) sin(pi alpha / 2) / pi.
inline double generator_prefactor(const StableParams& p) {
  return p.sigma_alpha * std::tgamma(1.0 + p.alpha) *
         std::sin(std::numbers::pi * p.alpha / 2.0) / std::numbers::pi;
}

struct GeneratorSpec {
  QuadratureSpec quad{1e-10, 30};
  double inner_cut_rel = 1e-4;  ///< inner cut as a fraction of the bump width
  double inner_cut_abs = 0.0;   ///< fixed inner cut; overrides the relative one when > 0

  double inner_cut(const TestFunction& f) const {
    return inner_cut_abs > 0.0 ? inner_cut_abs : inner_cut_rel * f.width();
  }
};

class GeneratorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void check_generator_args(const StableParams& p, const TestFunction& f, double x) {
  if (!(p.alpha > 0.0 && p.alpha < 2.0)) throw GeneratorError("generator: alpha must be in (0,2)");
  if (!(x >= 0.0)) throw GeneratorError("generator: x must be >= 0");
  if (p.alpha >= 1.0 && !f.zero_derivative_at_origin())
    throw GeneratorError("generator: alpha >= 1 needs phi'(0) = 0");
}

/// Integral of g over [a, b] split at the given interior points.
template <class G>
double integrate_split(G&& g, double a, double b, std::vector<double> cuts, const QuadratureSpec& q) {
  if (!(b > a)) return 0.0;
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double l = std::max(a, cuts[i]), r = std::min(b, cuts[i + 1]);
    if (r > l) s += integrate(g, l, r, q);
  }
  return s;
}

/// int_lo^hi (f(x + z) + f(x - z) - 2 f(x)) z^{-1-alpha} dz. The second
/// difference loses digits for small z, so the error floor is set at the
/// roundoff level of the first decade.
inline double symmetric_part(const TestFunction& f, double x, double alpha, double lo, double hi,
                             QuadratureSpec q) {
  const double fx = f(x);
  // no cancellation when x sits outside the support hull
  const double scale = (x >= f.lo() && x <= f.hi()) ? f.sup_abs() : 0.0;
  q.abs_tol = std::max(q.abs_tol, 64.0 * std::numeric_limits<double>::epsilon() * scale *
                                      std::pow(lo, -alpha) / alpha);
  std::vector<double> cuts;
  for (double b : f.breakpoints()) cuts.push_back(std::abs(b - x));
  for (double c = 10.0 * lo; c < hi; c *= 10.0) cuts.push_back(c);
  return integrate_split(
      [&](double z) { return (f(x + z) + f(x - z) - 2.0 * fx) * std::pow(z, -1.0 - alpha); }, lo,
      hi, cuts, q);
}

}  // namespace detail

/// Generator of the stable process reflected on its infimum applied to f at
/// x >= 0: C int [f((x+z)_+) - f(x) - z f'(x) 1{|z|<x}] |z|^{-1-alpha} dz.
inline double fractional_generator(const StableParams& p, const TestFunction& f, double x,
                                   const GeneratorSpec& spec = {}) {
  detail::check_generator_args(p, f, x);
  if (f.empty()) return 0.0;
  const double a = p.alpha;
  const double C = generator_prefactor(p);
  const double f0 = f(0.0);
  const double hi = f.hi();
  if (x == 0.0) {
    // int_0^inf (f(z) - f(0)) z^{-1-a} dz; beyond the support only -f(0) remains
    if (hi <= 0.0) return 0.0;
    std::vector<double> cuts = f.breakpoints();
    auto g = [&](double z) { return (f(z) - f0) * std::pow(z, -1.0 - a); };
    double body;
    if (f0 == 0.0 && f.lo() > 0.0) {
      body = detail::integrate_split(g, f.lo(), hi, cuts, spec.quad);
    } else {
      body = integrate_singular(g, 0.0, hi, spec.quad);
    }
    return C * (body - f0 * std::pow(hi, -a) / a);
  }
  if (x <= f.lo() || x >= hi) {
    // f and f' vanish at x: only the mass landing on the support (or on 0) counts
    const double lo = std::max(0.0, f.lo());
    const double body = detail::integrate_split(
        [&](double y) { return f(y) * std::pow(std::abs(y - x), -1.0 - a); }, lo, hi,
        f.breakpoints(), spec.quad);
    return C * (body + f0 * std::pow(x, -a) / a);
  }
  const double fx = f(x);
  const double delta = std::min(spec.inner_cut(f), x);
  // |z| < delta: second-order Taylor, odd terms cancel
  const double inner = f.d2(x) * std::pow(delta, 2.0 - a) / (2.0 - a);
  const double middle = detail::symmetric_part(f, x, a, delta, x, spec.quad);
  // z >= x: the f(x) part is analytic, f(x + z) only lives on the support
  std::vector<double> cuts;
  for (double b : f.breakpoints()) cuts.push_back(b - x);
  const double upper = detail::integrate_split(
      [&](double z) { return f(x + z) * std::pow(z, -1.0 - a); }, x, std::max(x, hi - x), cuts,
      spec.quad);
  const double tails = (f0 - 2.0 * fx) * std::pow(x, -a) / a;  // z <= -x lands on f(0)
  return C * (inner + middle + upper + tails);
}

/// Integration-by-parts form, alpha < 1 only:
/// (C / alpha) int_0^inf f'(y) (y - x) |y - x|^{-1-alpha} dy.
inline double fractional_generator_second_form(const StableParams& p, const TestFunction& f,
                                               double x, const GeneratorSpec& spec = {}) {
  detail::check_generator_args(p, f, x);
  if (!(p.alpha < 1.0)) throw GeneratorError("second form needs alpha < 1");
  if (f.empty()) return 0.0;
  const double a = p.alpha;
  const double lo = std::max(0.0, f.lo()), hi = f.hi();
  if (!(hi > lo)) return 0.0;
  // u = |y - x|^{1-alpha} absorbs the singularity at y = x
  const double e = 1.0 - a, inv = 1.0 / e;
  auto side = [&](double d_near, double d_far, double sign) {
    if (!(d_far > d_near)) return 0.0;
    std::vector<double> cuts;
    for (double b : f.breakpoints()) {
      const double d = sign * (b - x);
      if (d > d_near && d < d_far) cuts.push_back(std::pow(d, e));
    }
    return detail::integrate_split(
        [&](double u) { return f.d1(x + sign * std::pow(u, inv)); }, std::pow(d_near, e),
        std::pow(d_far, e), cuts, spec.quad) * inv;
  };
  const double right = side(std::max(0.0, lo - x), std::max(0.0, hi - x), 1.0);
  const double left = side(std::max(0.0, x - hi), std::max(0.0, x - lo), -1.0);
  const double s = right - left;
  return generator_prefactor(p) / a * s;
}

/// Symmetric fractional Laplacian of the extension of f by zero, without the
/// boundary clamp: C P.V. int (f(x + z) - f(x)) |z|^{-1-alpha} dz.
inline double fractional_laplacian_unclamped(const StableParams& p, const TestFunction& f,
                                             double x, const GeneratorSpec& spec = {}) {
  if (!(p.alpha > 0.0 && p.alpha < 2.0)) throw GeneratorError("generator: alpha must be in (0,2)");
  if (f.empty()) return 0.0;
  const double a = p.alpha;
  auto ext = [&](double y) { return y > 0.0 ? f(y) : 0.0; };
  const double fx = ext(x);
  const double delta = spec.inner_cut(f);
  const double inner = (x > 0.0 ? f.d2(x) : 0.0) * std::pow(delta, 2.0 - a) / (2.0 - a);
  // beyond R both x + z and x - z have left the support
  double R = delta;
  for (double b : f.breakpoints()) R = std::max(R, std::abs(b - x));
  std::vector<double> cuts;
  for (double b : f.breakpoints()) cuts.push_back(std::abs(b - x));
  for (double c = 10.0 * delta; c < R; c *= 10.0) cuts.push_back(c);
  cuts.push_back(x);
  QuadratureSpec q = spec.quad;
  const double scale = (x >= f.lo() && x <= f.hi()) ? f.sup_abs() : 0.0;
  q.abs_tol = std::max(q.abs_tol, 64.0 * std::numeric_limits<double>::epsilon() * scale *
                                      std::pow(delta, -a) / a);
  const double body = detail::integrate_split(
      [&](double z) { return (ext(x + z) + ext(x - z) - 2.0 * fx) * std::pow(z, -1.0 - a); },
      delta, R, cuts, q);
  const double tail = -2.0 * fx * std::pow(R, -a) / a;
  return generator_prefactor(p) * (inner + body + tail);
}

/// Generator values on a uniform grid over [0, x_max] with a cubic B-spline
/// in between; points past x_max fall back to direct quadrature.
class GeneratorTable {
 public:
  GeneratorTable(const StableParams& p, const TestFunction& f, std::size_t n = 4001,
                 double x_max = 0.0, const GeneratorSpec& spec = {})
      : p_(p), f_(f), spec_(spec) {
    x_max_ = x_max > 0.0 ? x_max : 2.0 * std::max(f.hi(), 1.0);
    if (n < 8) throw std::invalid_argument("GeneratorTable: need at least 8 nodes");
    h_ = x_max_ / static_cast<double>(n - 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = fractional_generator(p, f, h_ * static_cast<double>(i), spec);
    spline_ = std::make_shared<Spline>(y.begin(), y.end(), 0.0, h_);
  }

  double operator()(double x) const {
    if (x <= x_max_) return (*spline_)(std::max(x, 0.0));
    return fractional_generator(p_, f_, x, spec_);
  }
  double x_max() const { return x_max_; }

 private:
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  StableParams p_;
  TestFunction f_;
  GeneratorSpec spec_;
  double x_max_ = 0.0, h_ = 0.0;
  std::shared_ptr<Spline> spline_;
};

struct WeakFormResult {
  double finite_difference = 0.0;  ///< (E f(R_{t+h}) - E f(R_t)) / h
  double generator_mean = 0.0;     ///< E Lf(R_{t+h/2})
  double residual = 0.0;           ///< |finite_difference - generator_mean|
  double std_error = 0.0;
  std::size_t n = 0;
};

inline void to_json(nlohmann::json& j, const WeakFormResult& r) {
  j = {{"term_estimates",
        {{"finite_difference", r.finite_difference}, {"generator_mean", r.generator_mean}}},
       {"residual", r.residual},
       {"stderr", r.std_error},
       {"n", r.n}};
}

/// Monte Carlo check of d/dt E f(R_t) = E Lf(R_t) by a centred difference.
/// With equal-size sample sets the standard error comes from the per-index
/// differences, which is exact for independent sets and for sets read off
/// the same paths.
inline WeakFormResult weak_form_residual(const GeneratorTable& L, const TestFunction& f, double h,
                                         const std::vector<double>& at_t,
                                         const std::vector<double>& at_t_plus_h,
                                         const std::vector<double>& at_mid) {
  if (!(h > 0.0)) throw std::invalid_argument("weak_form_residual: h must be > 0");
  if (at_t.empty() || at_t_plus_h.empty() || at_mid.empty())
    throw std::invalid_argument("weak_form_residual: empty sample set");
  auto mean_var = [](const std::vector<double>& v) {
    double m = 0.0, s = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, v.size() > 1 ? s / static_cast<double>(v.size() - 1) : 0.0};
  };
  std::vector<double> f0, f1, g;
  for (double x : at_t) f0.push_back(f(x));
  for (double x : at_t_plus_h) f1.push_back(f(x));
  for (double x : at_mid) g.push_back(L(x));
  const auto [m0, v0] = mean_var(f0);
  const auto [m1, v1] = mean_var(f1);
  const auto [mg, vg] = mean_var(g);
  WeakFormResult r;
  r.finite_difference = (m1 - m0) / h;
  r.generator_mean = mg;
  r.residual = std::abs(r.finite_difference - r.generator_mean);
  r.n = at_mid.size();
  if (f0.size() == f1.size() && f0.size() == g.size()) {
    std::vector<double> d(f0.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (f1[i] - f0[i]) / h - g[i];
    r.std_error = std::sqrt(mean_var(d).second / static_cast<double>(d.size()));
  } else {
    r.std_error = std::sqrt((v0 / f0.size() + v1 / f1.size()) / (h * h) + vg / g.size());
  }
  return r;
}

/// Product test function phi(t, x, v) = a(t) b(x) c(v).
struct KineticTestFunction {
  TestFunction ft, fx, fv;

  double operator()(double t, double x, double v) const { return ft(t) * fx(x) * fv(v); }
  /// (d_t + v d_x + F d_v + 1/2 d_vv) phi
  double transport(double t, double x, double v, double force) const {
    const double a = ft(t), b = fx(x), c = fv(v);
    if (a == 0.0 && ft.d1(t) == 0.0) return 0.0;
    return ft.d1(t) * b * c + v * a * fx.d1(x) * c + a * b * (force * fv.d1(v) + 0.5 * fv.d2(v));
  }
};

/// Per-path terms of the kinetic weak form:
/// phi(0, x0, v0) + int (d_t + v d_x + L) phi ds + sum phi(tau_n, 0, v_out)
/// - sum phi(tau_n, 0, v_in), which has mean zero.
struct KineticPathTerms {
  double initial = 0.0;
  double volume = 0.0;
  double boundary_plus = 0.0;
  double boundary_minus = 0.0;
  double total() const { return initial + volume + boundary_plus - boundary_minus; }
};

/// Trapezoid rule over the recorded nodes; record every step.
inline KineticPathTerms kinetic_path_terms(const KineticTestFunction& phi, const ForceField& ff,
                                           const PathSample& p) {
  KineticPathTerms k;
  if (p.size() == 0) return k;
  k.initial = phi(p.t[0], p.x[0], p.v[0]);
  double prev = phi.transport(p.t[0], p.x[0], p.v[0], ff.force(p.v[0]));
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double cur = phi.transport(p.t[i], p.x[i], p.v[i], ff.force(p.v[i]));
    k.volume += 0.5 * (prev + cur) * (p.t[i] - p.t[i - 1]);
    prev = cur;
  }
  for (const auto& e : p.events) {
    if (e.kind != EventKind::restart_diffusive) continue;
    k.boundary_plus += phi(e.time, 0.0, e.v_out);
    k.boundary_minus += phi(e.time, 0.0, e.v_in);
  }
  return k;
}

struct KineticReport {
  KineticPathTerms mean;
  double residual = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_events = 0;
  std::optional<KsReport> factorization;
  std::string warning;
};

inline void to_json(nlohmann::json& j, const KineticReport& r) {
  j = {{"term_estimates",
        {{"initial", r.mean.initial},
         {"volume", r.mean.volume},
         {"boundary_plus", r.mean.boundary_plus},
         {"boundary_minus", r.mean.boundary_minus}}},
       {"residual", r.residual},
       {"stderr", r.std_error},
       {"n_paths", r.n_paths},
       {"n_events", r.n_events}};
  if (r.factorization) j["factorization"] = *r.factorization;
  if (!r.warning.empty()) j["warning"] = r.warning;
}

/// Averages per-path terms; the factorization check splits restart
/// velocities at the median event time and compares the two halves.
inline KineticReport kinetic_weak_form_check(const std::vector<KineticPathTerms>& paths,
                                             const std::vector<BoundaryEvent>& events) {
  if (paths.empty()) throw std::invalid_argument("kinetic_weak_form_check: no paths");
  KineticReport r;
  r.n_paths = paths.size();
  const double n = static_cast<double>(paths.size());
  double m = 0.0, s = 0.0;
  for (const auto& p : paths) {
    r.mean.initial += p.initial / n;
    r.mean.volume += p.volume / n;
    r.mean.boundary_plus += p.boundary_plus / n;
    r.mean.boundary_minus += p.boundary_minus / n;
    m += p.total() / n;
  }
  for (const auto& p : paths) s += (p.total() - m) * (p.total() - m);
  r.residual = std::abs(m);
  r.std_error = paths.size() > 1 ? std::sqrt(s / (n - 1.0) / n) : 0.0;

  std::vector<const BoundaryEvent*> ev;
  for (const auto& e : events)
    if (e.kind == EventKind::restart_diffusive) ev.push_back(&e);
  r.n_events = ev.size();
  if (ev.size() < 100) {
    r.warning = "fewer than 100 restart events; factorization check skipped";
    return r;
  }
  std::vector<double> times;
  for (const auto* e : ev) times.push_back(e->time);
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2), times.end());
  const double med = times[times.size() / 2];
  std::vector<double> early, late;
  for (const auto* e : ev) (e->time < med ? early : late).push_back(e->v_out);
  if (early.empty() || late.empty()) {
    r.warning = "restart times do not split; factorization check skipped";
    return r;
  }
  r.factorization = ks_two_sample(early, late);
  return r;
}

struct ExponentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double x_lo = 0.0, x_hi = 0.0;
};

struct DensityAsymptotics {
  ExponentEstimate tail;                   ///< survival exponent at infinity, expect -alpha
  std::optional<ExponentEstimate> origin;  ///< density exponent at 0, expect alpha/2 - 1
  std::string warning;
};

inline void to_json(nlohmann::json& j, const ExponentEstimate& e) {
  j = {{"value", e.value}, {"stderr", e.std_error}, {"range", {e.x_lo, e.x_hi}}};
}

inline void to_json(nlohmann::json& j, const DensityAsymptotics& d) {
  j = {{"tail_survival_exponent", d.tail}};
  if (d.origin) j["origin_density_exponent"] = *d.origin;
  if (!d.warning.empty()) j["warning"] = d.warning;
}

/// Power-law exponents of a positive sample near infinity and near 0. The
/// tail uses the survival on the top percent; the origin uses the CDF on the
/// bottom decile, read as the survival of 1/x.
inline DensityAsymptotics density_asymptotics_check(const std::vector<double>& samples,
                                                    int n_points = 12) {
  if (samples.size() < 1000) throw FitError("density_asymptotics_check: need >= 1000 samples");
  std::vector<double> q = samples;
  std::sort(q.begin(), q.end());
  const double n = static_cast<double>(q.size());
  auto quant = [&](double u) {
    return q[std::min(q.size() - 1, static_cast<std::size_t>(u * n))];
  };
  DensityAsymptotics d;
  const double top_lo = quant(0.99), top_hi = quant(1.0 - 60.0 / n);
  const auto tf = tail_exponent_fit(samples, top_lo, top_hi, n_points);
  d.tail = {tf.slope, tf.std_error, top_lo, top_hi};

  const double lo = quant(0.003), hi = quant(0.1);
  if (!(lo > 0.0) || !(hi > lo)) {
    d.warning = "insufficient small-x mass; origin fit skipped";
    return d;
  }
  std::vector<double> inv;
  inv.reserve(samples.size());
  for (double x : samples) inv.push_back(x > 0.0 ? 1.0 / x : std::numeric_limits<double>::max());
  try {
    const auto of = tail_exponent_fit(inv, 1.0 / hi, 1.0 / lo, n_points);
    d.origin = ExponentEstimate{-of.slope - 1.0, of.std_error, lo, hi};
  } catch (const FitError& e) {
    d.warning = std::string("origin fit skipped: ") + e.what();
  }
  return d;
}

/// Ratio of survival functions S_b / S_a averaged (geometrically) over
/// log-spaced thresholds in [x_lo, x_hi].
inline double tail_amplitude_ratio(const std::vector<double>& a, const std::vector<double>& b,
                                   double x_lo, double x_hi, int n_points = 12) {
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double acc = 0.0;
  int used = 0;
  for (int k = 0; k < n_points; ++k) {
    const double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(k) / (n_points - 1));
    const auto ca = static_cast<double>(sa.end() - std::upper_bound(sa.begin(), sa.end(), x));
    const auto cb = static_cast<double>(sb.end() - std::upper_bound(sb.begin(), sb.end(), x));
    if (ca < 50.0 || cb < 50.0) continue;
    acc += std::log((cb / static_cast<double>(sb.size())) / (ca / static_cast<double>(sa.size())));
    ++used;
  }
  if (used == 0) throw FitError("tail_amplitude_ratio: no usable thresholds");
  return std::exp(acc / used);
}

}  // namespace reflevy
