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
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/rng.hpp"

namespace reflevy {

/// Which moments of mu are finite, measured against the two orders the
/// limit theorem asks for.
struct MomentDiagnostic {
  double order_i = 0.0;   ///< (beta + 1) / 2
  double order_ii = 0.0;  ///< (beta + 1)(beta + 2) / 6
  bool finite_i = false;  ///< some moment of order > order_i is finite
  bool finite_ii = false;
};

/// Restart-velocity law on (0, inf).
class BoundaryLaw {
 public:
  enum class Kind { dirac, half_gaussian, exponential, pareto };

  static BoundaryLaw dirac(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("dirac: location must be > 0");
    return BoundaryLaw(Kind::dirac, a, 0.0);
  }
  static BoundaryLaw half_gaussian(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("half_gaussian: scale must be > 0");
    return BoundaryLaw(Kind::half_gaussian, scale, 0.0);
  }
  static BoundaryLaw exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return BoundaryLaw(Kind::exponential, rate, 0.0);
  }
  static BoundaryLaw pareto(double index, double xmin) {
    if (!(index > 0.0) || !(xmin > 0.0))
      throw std::invalid_argument("pareto: index and xmin must be > 0");
    return BoundaryLaw(Kind::pareto, index, xmin);
  }

  /// "dirac:1", "half_gaussian:1", "exponential:2", "pareto:3:0.5".
  static BoundaryLaw parse(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    auto num = [&](std::size_t i, double dflt) {
      if (i >= parts.size()) return dflt;
      std::size_t used = 0;
      const double d = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("bad number in mu spec: " + spec);
      return d;
    };
    if (parts.empty()) throw std::invalid_argument("empty mu spec");
    const std::string& k = parts[0];
    if (k == "dirac") return dirac(num(1, 1.0));
    if (k == "half_gaussian") return half_gaussian(num(1, 1.0));
    if (k == "exponential") return exponential(num(1, 1.0));
    if (k == "pareto") return pareto(num(1, 3.0), num(2, 1.0));
    throw std::invalid_argument("unknown mu kind: " + k);
  }

  Kind kind() const noexcept { return kind_; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case Kind::dirac: os << "dirac:" << p1_; break;
      case Kind::half_gaussian: os << "half_gaussian:" << p1_; break;
      case Kind::exponential: os << "exponential:" << p1_; break;
      case Kind::pareto: os << "pareto:" << p1_ << ":" << p2_; break;
    }
    return os.str();
  }

  /// Draw from mu; always strictly positive.
  double sample(Variates& g) const {
    switch (kind_) {
      case Kind::dirac: return p1_;
      case Kind::half_gaussian: return p1_ * std::abs(g.normal());
      case Kind::exponential: return g.exponential() / p1_;
      case Kind::pareto: return p2_ * std::pow(g.uniform(), -1.0 / p1_);
    }
    return p1_;
  }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::dirac: return x >= p1_ ? 1.0 : 0.0;
      case Kind::half_gaussian: return std::erf(x / (p1_ * std::numbers::sqrt2));
      case Kind::exponential: return -std::expm1(-p1_ * x);
      case Kind::pareto: return x < p2_ ? 0.0 : 1.0 - std::pow(p2_ / x, p1_);
    }
    return 0.0;
  }

  double mean() const {
    switch (kind_) {
      case Kind::dirac: return p1_;
      case Kind::half_gaussian: return p1_ * std::sqrt(2.0 / std::numbers::pi);
      case Kind::exponential: return 1.0 / p1_;
      case Kind::pareto:
        return p1_ > 1.0 ? p1_ * p2_ / (p1_ - 1.0) : std::numeric_limits<double>::infinity();
    }
    return p1_;
  }

  /// Supremum of finite moment orders; moments of order strictly below it
  /// are finite (all orders for light tails).
  double moment_order_limit() const noexcept {
    return kind_ == Kind::pareto ? p1_ : std::numeric_limits<double>::infinity();
  }

  bool has_moment(double order) const noexcept { return order < moment_order_limit(); }

  MomentDiagnostic diagnose(double beta) const noexcept {
    MomentDiagnostic d;
    d.order_i = (beta + 1.0) / 2.0;
    d.order_ii = (beta + 1.0) * (beta + 2.0) / 6.0;
    d.finite_i = moment_order_limit() > d.order_i;
    d.finite_ii = moment_order_limit() > d.order_ii;
    return d;
  }

 private:
  BoundaryLaw(Kind k, double p1, double p2) : kind_(k), p1_(p1), p2_(p2) {}
  Kind kind_;
  double p1_;
  double p2_;
};

}  // namespace reflevy
