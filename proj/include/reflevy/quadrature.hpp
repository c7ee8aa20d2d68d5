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
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace reflevy {

struct QuadratureSpec {
  double rel_tol = 1e-12;
  unsigned max_depth = 25;
  double abs_tol = 0.0;  ///< error floor, for integrands limited by roundoff
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

namespace detail {

inline std::string quad_message(const char* who, double a, double b,
                                double value, double err) {
  std::ostringstream os;
  os << who << ": no convergence on [" << a << ", " << b << "], value "
     << value << ", achieved error " << err;
  return os.str();
}

}  // namespace detail

namespace detail {

struct Panel {
  double value;
  double error;
  double l1;
};

template <class F>
Panel gk31(F& f, double a, double b) {
  Panel p{};
  p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0,
                                                                         &p.error, &p.l1);
  // the rule reports its error on the [-1,1]-mapped integral
  p.error *= 0.5 * std::abs(b - a);
  return p;
}

template <class F>
Panel adapt(F& f, double a, double b, const Panel& whole, double tol, double abs_tol,
            unsigned depth) {
  if (whole.error <= tol * whole.l1 || whole.error <= std::max(abs_tol, 1e-250) || depth == 0)
    return whole;
  const double m = 0.5 * (a + b);
  const Panel l = gk31(f, a, m), r = gk31(f, m, b);
  const Panel L = adapt(f, a, m, l, tol, 0.5 * abs_tol, depth - 1);
  const Panel R = adapt(f, m, b, r, tol, 0.5 * abs_tol, depth - 1);
  return Panel{L.value + R.value, L.error + R.error, L.l1 + R.l1};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod 31 on a finite interval (bisection driver over the
/// Boost rule). Throws when the error estimate stays above the budget.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& q = {}) {
  if (a == b) return 0.0;
  const detail::Panel whole = detail::gk31(f, a, b);
  const detail::Panel r = detail::adapt(f, a, b, whole, q.rel_tol, q.abs_tol, q.max_depth);
  if (!std::isfinite(r.value) ||
      r.error > std::max({1e3 * q.rel_tol * r.l1, 2.0 * q.abs_tol, 1e-250})) {
    throw QuadratureError(detail::quad_message("integrate", a, b, r.value, r.error), r.error);
  }
  return r.value;
}

/// Integrals with integrable endpoint singularities.
template <class F>
double integrate_singular(F&& f, double a, double b,
                          const QuadratureSpec& q = {}) {
  if (a == b) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts(15);
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  const double v = ts.integrate(f, a, b, q.rel_tol, &err, &l1, &levels);
  if (!std::isfinite(v) || err > 1e4 * std::max(q.rel_tol * l1, 1e-300)) {
    throw QuadratureError(
        detail::quad_message("integrate_singular", a, b, v, err), err);
  }
  return v;
}

/// Integral over [a, inf) of f whose tail is asymptotically a power law
/// C v^{-p}, p > 1. The range [a, vmax] is integrated in log variable; the
/// remainder past vmax uses vmax f(vmax) / (p - 1).
template <class F>
double integrate_power_tail(F&& f, double a, double p,
                            const QuadratureSpec& q = {}, double vmax = 1e12) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_power_tail: a <= 0");
  if (!(p > 1.0)) throw std::invalid_argument("integrate_power_tail: p <= 1");
  if (vmax <= a) vmax = 1e6 * a;
  const double la = std::log(a), lb = std::log(vmax);
  double body = 0.0;
  // decade panels keep each panel smooth in the log variable
  const int panels = std::max(1, static_cast<int>(std::ceil((lb - la) / std::log(10.0))));
  const double w = (lb - la) / panels;
  for (int i = 0; i < panels; ++i) {
    body += integrate([&](double s) { const double v = std::exp(s); return f(v) * v; },
                      la + i * w, la + (i + 1) * w, q);
  }
  const double rem = vmax * f(vmax) / (p - 1.0);
  return body + rem;
}

}  // namespace reflevy
