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
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/quadrature.hpp"

namespace reflevy {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void check_beta(double beta) {
  if (!(beta > 1.0 && beta < 5.0)) {
    std::ostringstream os;
    os << "beta must lie in the open interval (1,5), got " << beta;
    throw ModelError(os.str());
  }
}

inline double alpha_of_beta(double beta) {
  check_beta(beta);
  return (beta + 1.0) / 3.0;
}

/// One row of a tabulated profile: Theta and Theta' at v >= 0.
struct ThetaRow {
  double v;
  double theta;
  double theta_prime;
};

/// Force-field model (beta, Theta, Theta'). Theta is even, positive and
/// |v| Theta(v) -> 1. The drift is F = (beta/2) Theta'/Theta.
class ForceField {
 public:
  using Fn = std::function<double(double)>;

  /// Theta(v) = (1 + v^2)^{-1/2}.
  static ForceField builtin(double beta) {
    check_beta(beta);
    ForceField ff;
    ff.beta_ = beta;
    ff.builtin_ = true;
    ff.name_ = "builtin";
    ff.theta_ = [](double v) { return 1.0 / std::sqrt(1.0 + v * v); };
    ff.theta_prime_ = [](double v) {
      const double s = 1.0 + v * v;
      return -v / (s * std::sqrt(s));
    };
    ff.finish();
    return ff;
  }

  /// User-supplied profile; self-checks run here and throw ModelError.
  static ForceField custom(double beta, Fn theta, Fn theta_prime,
                           std::string name = "custom") {
    check_beta(beta);
    ForceField ff;
    ff.beta_ = beta;
    ff.name_ = std::move(name);
    ff.theta_ = std::move(theta);
    ff.theta_prime_ = std::move(theta_prime);
    ff.self_check();
    ff.finish();
    return ff;
  }

  /// Cubic Hermite interpolation of tabulated rows on v >= 0, extended evenly
  /// to v < 0 and past the last row by 1/sqrt(v^2 + c) matched in value.
  static ForceField tabulated(double beta, std::vector<ThetaRow> rows,
                              std::string name = "table") {
    check_beta(beta);
    if (rows.size() < 2) throw ModelError("theta table needs at least two rows");
    if (rows.front().v != 0.0) throw ModelError("theta table must start at v = 0");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!(rows[i].theta > 0.0)) throw ModelError("theta table: nonpositive theta");
      if (i > 0 && !(rows[i].v > rows[i - 1].v))
        throw ModelError("theta table: abscissae not strictly increasing");
    }
    auto tab = std::make_shared<const std::vector<ThetaRow>>(std::move(rows));
    const ThetaRow last = tab->back();
    const double c = 1.0 / (last.theta * last.theta) - last.v * last.v;
    if (!(c > -last.v * last.v)) throw ModelError("theta table: bad tail match");
    auto eval = [tab, last, c](double v, bool deriv) {
      const double a = std::abs(v);
      const double sgn = v < 0 ? -1.0 : 1.0;
      if (a >= last.v) {
        const double q = a * a + c;
        return deriv ? -sgn * a / (q * std::sqrt(q)) : 1.0 / std::sqrt(q);
      }
      const auto& r = *tab;
      auto it = std::upper_bound(r.begin(), r.end(), a,
                                 [](double x, const ThetaRow& row) { return x < row.v; });
      const ThetaRow& hi = *it;
      const ThetaRow& lo = *(it - 1);
      const double h = hi.v - lo.v;
      const double s = (a - lo.v) / h;
      const double s2 = s * s, s3 = s2 * s;
      if (!deriv) {
        return (2 * s3 - 3 * s2 + 1) * lo.theta + (s3 - 2 * s2 + s) * h * lo.theta_prime +
               (-2 * s3 + 3 * s2) * hi.theta + (s3 - s2) * h * hi.theta_prime;
      }
      const double d = ((6 * s2 - 6 * s) * lo.theta + (3 * s2 - 4 * s + 1) * h * lo.theta_prime +
                        (-6 * s2 + 6 * s) * hi.theta + (3 * s2 - 2 * s) * h * hi.theta_prime) /
                       h;
      return sgn * d;
    };
    return custom(
        beta, [eval](double v) { return eval(v, false); },
        [eval](double v) { return eval(v, true); }, std::move(name));
  }

  /// CSV with header-free rows "v,theta,theta_prime"; '#' starts a comment.
  static ForceField from_table_file(double beta, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open theta table " + path);
    std::vector<ThetaRow> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      ThetaRow r{};
      if (!(ls >> r.v >> r.theta >> r.theta_prime)) continue;
      rows.push_back(r);
    }
    return tabulated(beta, std::move(rows), "table:" + path);
  }

  double beta() const noexcept { return beta_; }
  const std::string& name() const noexcept { return name_; }
  bool is_builtin() const noexcept { return builtin_; }
  double theta(double v) const { return theta_(v); }
  double theta_prime(double v) const { return theta_prime_(v); }

  /// F(v) = (beta/2) Theta'(v)/Theta(v).
  double force(double v) const {
    if (builtin_) return -0.5 * beta_ * v / (1.0 + v * v);
    return 0.5 * beta_ * theta_prime_(v) / theta_(v);
  }

  /// Numerical Lipschitz constant of F on the probe grid.
  double lipschitz_bound() const noexcept { return lipschitz_; }
  /// max |F| on the probe grid.
  double force_bound() const noexcept { return force_bound_; }

 private:
  ForceField() = default;

  static std::vector<double> probe_grid() {
    std::vector<double> g;
    for (int i = -20000; i <= 20000; ++i) g.push_back(i * 1e-3);
    for (double v = 20.0; v < 1e6; v *= 1.02) {
      g.push_back(v);
      g.push_back(-v);
    }
    std::sort(g.begin(), g.end());
    return g;
  }

  void self_check() const {
    for (double v : probe_grid()) {
      const double a = theta_(v), b = theta_(-v);
      if (!(a > 0.0) || !std::isfinite(a))
        throw ModelError(name_ + ": theta not positive at v = " + std::to_string(v));
      if (std::abs(a - b) > 1e-12 * std::max(a, b))
        throw ModelError(name_ + ": theta not even at v = " + std::to_string(v));
    }
    const double tail = 1e5 * theta_(1e5);
    if (std::abs(tail - 1.0) > 1e-2)
      throw ModelError(name_ + ": |v| theta(v) does not approach 1");
  }

  void finish() {
    double lip = 0.0, fb = 0.0;
    for (double v : probe_grid()) {
      const double h = 1e-5 * std::max(1.0, std::abs(v));
      const double f = force(v);
      const double d = (force(v + h) - force(v - h)) / (2.0 * h);
      if (!std::isfinite(f) || !std::isfinite(d))
        throw ModelError(name_ + ": force not finite at v = " + std::to_string(v));
      lip = std::max(lip, std::abs(d));
      fb = std::max(fb, std::abs(f));
    }
    lipschitz_ = lip;
    force_bound_ = fb;
  }

  double beta_ = 2.0;
  bool builtin_ = false;
  std::string name_;
  Fn theta_;
  Fn theta_prime_;
  double lipschitz_ = 0.0;
  double force_bound_ = 0.0;
};

inline double force(const ForceField& ff, double v) { return ff.force(v); }

/// Limit-law parameters: exp(-t sigma_alpha |xi|^alpha).
struct StableParams {
  double alpha = 1.0;
  double sigma_alpha = 1.0;
  double c_beta = 1.0;
};

/// m(v) = Theta(v)^beta.
inline double speed_density(const ForceField& ff, double v) {
  return std::pow(ff.theta(v), ff.beta());
}

namespace detail {
inline constexpr double kVStar = 10.0;

/// int_v^inf m for v >= 0.
inline double speed_upper_tail(const ForceField& ff, double v, const QuadratureSpec& q) {
  auto m = [&](double u) { return speed_density(ff, u); };
  if (v < kVStar) {
    return integrate(m, v, kVStar, q) + integrate_power_tail(m, kVStar, ff.beta(), q);
  }
  return integrate_power_tail(m, v, ff.beta(), q);
}
}  // namespace detail

/// 1 / int_R Theta^beta.
inline double c_beta(const ForceField& ff, const QuadratureSpec& q = {}) {
  return 1.0 / (2.0 * detail::speed_upper_tail(ff, 0.0, q));
}

inline StableParams sigma_alpha(const ForceField& ff, const QuadratureSpec& q = {}) {
  StableParams p;
  p.alpha = alpha_of_beta(ff.beta());
  p.c_beta = c_beta(ff, q);
  const double a = p.alpha;
  const double g = std::tgamma(a);
  p.sigma_alpha = std::pow(3.0, 1.0 - 2.0 * a) * std::pow(2.0, a - 1.0) * std::numbers::pi *
                  p.c_beta / (g * g * std::sin(std::numbers::pi * a / 2.0));
  return p;
}

/// s(v) = int_0^v Theta^{-beta}; odd.
inline double scale_function(const ForceField& ff, double v, const QuadratureSpec& q = {}) {
  if (v == 0.0) return 0.0;
  const double a = std::abs(v);
  const double b = ff.beta();
  double s = 0.0;
  // panels of geometric width keep the growing integrand well resolved
  double lo = 0.0, hi = std::min(a, 1.0);
  while (true) {
    s += integrate([&](double u) { return std::pow(ff.theta(u), -b); }, lo, hi, q);
    if (hi >= a) break;
    lo = hi;
    hi = std::min(a, hi * 8.0);
  }
  return v < 0 ? -s : s;
}

/// Solves s(x) = w.
inline double inverse_scale(const ForceField& ff, double w, const QuadratureSpec& q = {}) {
  if (w == 0.0) return 0.0;
  const double a = std::abs(w);
  const double b = ff.beta();
  auto g = [&](double x) { return scale_function(ff, x, q) - a; };
  double hi = std::max(std::pow((b + 1.0) * a, 1.0 / (b + 1.0)),
                       a * std::pow(ff.theta(0.0), b));
  int guard = 0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("inverse_scale: bracket expansion failed");
  }
  double lo = hi / 2.0;
  guard = 0;
  while (lo > 0.0 && g(lo) > 0.0) {
    lo /= 2.0;
    if (++guard > 2000) { lo = 0.0; break; }
  }
  std::uintmax_t iters = 200;
  auto tol = [](double l, double h) { return std::abs(h - l) <= 1e-13 * std::abs(h); };
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
  if (iters >= 200) throw std::runtime_error("inverse_scale: root finder did not converge");
  const double x = 0.5 * (r.first + r.second);
  return w < 0 ? -x : x;
}

/// psi = s' o s^{-1}.
inline double psi(const ForceField& ff, double w, const QuadratureSpec& q = {}) {
  return std::pow(ff.theta(inverse_scale(ff, w, q)), -ff.beta());
}

/// phi = s^{-1} / psi^2.
inline double phi_coeff(const ForceField& ff, double w, const QuadratureSpec& q = {}) {
  const double x = inverse_scale(ff, w, q);
  return x * std::pow(ff.theta(x), 2.0 * ff.beta());
}

namespace detail {
inline double kac_inner(const ForceField& ff, double v, const QuadratureSpec& q) {
  QuadratureSpec qi = q;
  qi.rel_tol = std::max(q.rel_tol, 1e-12);
  return integrate(
      [&](double u) { return scale_function(ff, u, qi) * speed_density(ff, u); }, 0.0, v, qi);
}
}  // namespace detail

/// s(v) int_v^inf m + int_0^v s m.
inline double kac_hitting_moment_down(const ForceField& ff, double v,
                                      const QuadratureSpec& q = {}) {
  if (!(v > 0.0)) throw std::invalid_argument("kac_hitting_moment_down: v must be > 0");
  return scale_function(ff, v, q) * detail::speed_upper_tail(ff, v, q) +
         detail::kac_inner(ff, v, q);
}

/// s(v) int_R m - s(v) int_v^inf m - int_0^v s m.
inline double kac_hitting_moment_up(const ForceField& ff, double v,
                                    const QuadratureSpec& q = {}) {
  if (!(v > 0.0)) throw std::invalid_argument("kac_hitting_moment_up: v must be > 0");
  const double s = scale_function(ff, v, q);
  const double total = 2.0 * detail::speed_upper_tail(ff, 0.0, q);
  return s * total - s * detail::speed_upper_tail(ff, v, q) - detail::kac_inner(ff, v, q);
}

}  // namespace reflevy
