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
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace reflevy {

enum class Interpretation { piecewise_constant, piecewise_linear };

/// Path on an increasing time grid, read either as a step function or as the
/// linear interpolant of its nodes.
struct CadlagPath {
  std::vector<double> times;
  std::vector<double> values;
  Interpretation interpretation = Interpretation::piecewise_linear;

  void validate() const {
    if (times.empty() || times.size() != values.size())
      throw std::invalid_argument("CadlagPath: empty or mismatched");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(values[i]) || !std::isfinite(times[i]))
        throw std::invalid_argument("CadlagPath: non-finite entry");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw std::invalid_argument("CadlagPath: times not strictly increasing");
    }
  }
};

struct Extrema {
  std::vector<double> inf;
  std::vector<double> sup;
};

inline Extrema running_extrema(const CadlagPath& p) {
  if (p.values.empty()) throw std::invalid_argument("running_extrema: empty path");
  Extrema e;
  e.inf.resize(p.values.size());
  e.sup.resize(p.values.size());
  double lo = p.values[0], hi = p.values[0];
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    lo = std::min(lo, p.values[i]);
    hi = std::max(hi, p.values[i]);
    e.inf[i] = lo;
    e.sup[i] = hi;
  }
  return e;
}

enum class Direction { down, up };

/// Crossing times of `level` by the linear interpolant.
inline std::vector<double> extract_hitting_times(const CadlagPath& p, double level,
                                                 Direction dir) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < p.values.size(); ++i) {
    const double a = p.values[i] - level, b = p.values[i + 1] - level;
    const bool hit = dir == Direction::down ? (a > 0.0 && b <= 0.0) : (a < 0.0 && b >= 0.0);
    if (!hit) continue;
    const double f = a / (a - b);
    const double t = p.times[i] + f * (p.times[i + 1] - p.times[i]);
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

namespace detail {

/// Static range minimum / maximum.
class SparseTable {
 public:
  explicit SparseTable(const std::vector<double>& v) : n_(v.size()) {
    std::size_t levels = 1;
    while ((std::size_t{1} << levels) <= n_) ++levels;
    mn_.assign(levels, {});
    mx_.assign(levels, {});
    mn_[0] = v;
    mx_[0] = v;
    for (std::size_t k = 1; k < levels; ++k) {
      const std::size_t len = std::size_t{1} << k;
      if (len > n_) break;
      mn_[k].resize(n_ - len + 1);
      mx_[k].resize(n_ - len + 1);
      for (std::size_t i = 0; i + len <= n_; ++i) {
        mn_[k][i] = std::min(mn_[k - 1][i], mn_[k - 1][i + len / 2]);
        mx_[k][i] = std::max(mx_[k - 1][i], mx_[k - 1][i + len / 2]);
      }
    }
  }
  /// inclusive range [l, r]
  double min(std::size_t l, std::size_t r) const {
    const std::size_t k = log2(r - l + 1);
    return std::min(mn_[k][l], mn_[k][r + 1 - (std::size_t{1} << k)]);
  }
  double max(std::size_t l, std::size_t r) const {
    const std::size_t k = log2(r - l + 1);
    return std::max(mx_[k][l], mx_[k][r + 1 - (std::size_t{1} << k)]);
  }

 private:
  static std::size_t log2(std::size_t x) {
    return static_cast<std::size_t>(63 - __builtin_clzll(static_cast<unsigned long long>(x)));
  }
  std::size_t n_;
  std::vector<std::vector<double>> mn_, mx_;
};

}  // namespace detail

/// M1 oscillation w(x, T, delta): the largest distance from a middle value
/// to the segment spanned by the outer values, over ordered grid triples
/// that fit in a window of width 2 delta inside [0, T].
inline double oscillation(const CadlagPath& p, double T, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("oscillation: delta must be > 0");
  p.validate();
  std::size_t n = 0;
  while (n < p.times.size() && p.times[n] <= T + 1e-12) ++n;
  if (n < 3) return 0.0;
  const auto& x = p.values;
  const bool step = p.interpretation == Interpretation::piecewise_constant;
  // a triple (i1, i2, i3) is admissible when t[i3] - start(i1) <= 2 delta;
  // a step path holds x[i1] until t[i1 + 1]
  const double width = 2.0 * delta;
  const double eps = 1e-12 * std::max(1.0, T);
  std::vector<double> vals(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::size_t> reach(n);  // largest i3 admissible with i1
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double start = step ? (i + 1 < n ? p.times[i + 1] : p.times[i]) : p.times[i];
      j = std::max(j, i);
      while (j + 1 < n && p.times[j + 1] - start <= width + eps) ++j;
      reach[i] = j;
    }
  }
  const detail::SparseTable st(vals);
  double best = 0.0;
  for (std::size_t i2 = 1; i2 + 1 < n; ++i2) {
    if (reach[i2 - 1] < i2 + 1) continue;
    // feasible i1 = i2 - a for a in [1, amax]
    std::size_t lo = 1, hi = i2;
    while (lo < hi) {  // largest a with reach[i2 - a] >= i2 + 1
      const std::size_t mid = (lo + hi + 1) / 2;
      if (reach[i2 - mid] >= i2 + 1) lo = mid; else hi = mid - 1;
    }
    const std::size_t amax = lo;
    const double x2 = vals[i2];
    // peak: minimize max(minL(a), minR(a)); minL falls and minR rises in a
    auto minL = [&](std::size_t a) { return st.min(i2 - a, i2 - 1); };
    auto minR = [&](std::size_t a) { return st.min(i2 + 1, reach[i2 - a]); };
    auto maxL = [&](std::size_t a) { return st.max(i2 - a, i2 - 1); };
    auto maxR = [&](std::size_t a) { return st.max(i2 + 1, reach[i2 - a]); };
    {
      std::size_t l = 1, h = amax;
      while (l < h) {
        const std::size_t m = (l + h) / 2;
        if (minL(m) <= minR(m)) h = m; else l = m + 1;
      }
      for (std::size_t a : {l, l > 1 ? l - 1 : l}) {
        best = std::max(best, x2 - std::max(minL(a), minR(a)));
      }
    }
    {
      std::size_t l = 1, h = amax;
      while (l < h) {
        const std::size_t m = (l + h) / 2;
        if (maxL(m) >= maxR(m)) h = m; else l = m + 1;
      }
      for (std::size_t a : {l, l > 1 ? l - 1 : l}) {
        best = std::max(best, std::min(maxL(a), maxR(a)) - x2);
      }
    }
  }
  return best;
}

namespace detail {

struct GraphPoint {
  double u;  // time
  double r;  // space
};

/// Vertices of the completed graph on [0, T].
inline std::vector<GraphPoint> completed_graph(const CadlagPath& p, double T) {
  p.validate();
  if (p.times.front() > 1e-12 || p.times.back() < T - 1e-12)
    throw std::invalid_argument("m1_distance_approx: path does not cover [0, T]");
  std::vector<GraphPoint> g;
  const bool step = p.interpretation == Interpretation::piecewise_constant;
  g.push_back({0.0, p.values.front()});
  for (std::size_t i = 1; i < p.times.size() && p.times[i] <= T + 1e-12; ++i) {
    if (step) {
      g.push_back({p.times[i], p.values[i - 1]});
      if (p.values[i] != p.values[i - 1]) g.push_back({p.times[i], p.values[i]});
    } else {
      g.push_back({p.times[i], p.values[i]});
    }
  }
  if (g.back().u < T) {
    const double last = g.back().r;
    if (step) {
      g.push_back({T, last});
    } else {
      auto it = std::upper_bound(p.times.begin(), p.times.end(), T);
      const std::size_t i = static_cast<std::size_t>(it - p.times.begin());
      const double f = (T - p.times[i - 1]) / (p.times[i] - p.times[i - 1]);
      g.push_back({T, p.values[i - 1] + f * (p.values[i] - p.values[i - 1])});
    }
  }
  return g;
}

inline std::vector<GraphPoint> resample_by_arclength(const std::vector<GraphPoint>& g,
                                                     std::size_t n) {
  std::vector<double> s(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i)
    s[i] = s[i - 1] + std::hypot(g[i].u - g[i - 1].u, g[i].r - g[i - 1].r);
  std::vector<GraphPoint> out;
  out.reserve(n);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double target = n == 1 ? 0.0 : s.back() * static_cast<double>(j) / static_cast<double>(n - 1);
    while (k + 2 < g.size() && s[k + 1] < target) ++k;
    const double len = s[k + 1] - s[k];
    const double f = len > 0 ? std::clamp((target - s[k]) / len, 0.0, 1.0) : 0.0;
    out.push_back({g[k].u + f * (g[k + 1].u - g[k].u), g[k].r + f * (g[k + 1].r - g[k].r)});
  }
  return out;
}

}  // namespace detail

/// Approximate M1 distance: discrete Frechet distance (max-norm) between the
/// completed graphs sampled at grid_n points each by arc length.
inline double m1_distance_approx(const CadlagPath& p, const CadlagPath& q, double T,
                                 std::size_t grid_n) {
  if (grid_n < 2) throw std::invalid_argument("m1_distance_approx: grid_n < 2");
  const auto a = detail::resample_by_arclength(detail::completed_graph(p, T), grid_n);
  const auto b = detail::resample_by_arclength(detail::completed_graph(q, T), grid_n);
  auto d = [&](std::size_t i, std::size_t j) {
    return std::max(std::abs(a[i].u - b[j].u), std::abs(a[i].r - b[j].r));
  };
  std::vector<double> prev(grid_n), cur(grid_n);
  for (std::size_t j = 0; j < grid_n; ++j)
    prev[j] = std::max(j ? prev[j - 1] : 0.0, d(0, j));
  for (std::size_t i = 1; i < grid_n; ++i) {
    cur[0] = std::max(prev[0], d(i, 0));
    for (std::size_t j = 1; j < grid_n; ++j)
      cur[j] = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d(i, j));
    std::swap(prev, cur);
  }
  return prev[grid_n - 1];
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// One-sample statistic against a continuous CDF.
inline double ks_to_cdf(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_to_cdf: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Asymptotic Kolmogorov tail probability with Stephens' finite-n correction.
inline double ks_pvalue(double d, double n_eff) {
  const double sq = std::sqrt(n_eff);
  const double lam = (sq + 0.12 + 0.11 / sq) * d;
  if (lam < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lam * lam);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

struct KsReport {
  double statistic = 0.0;
  double n_eff = 0.0;
  double p_value = 1.0;
  double critical_1pct = 0.0;
  double critical_5pct = 0.0;

  bool passes(double level = 0.01) const { return p_value > level; }
};

inline KsReport ks_report(double d, double n_eff) {
  return {d, n_eff, ks_pvalue(d, n_eff), 1.63 / std::sqrt(n_eff), 1.36 / std::sqrt(n_eff)};
}

inline KsReport ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return ks_report(ks_statistic(a, b), na * nb / (na + nb));
}

inline KsReport ks_one_sample(const std::vector<double>& a,
                              const std::function<double(double)>& cdf) {
  return ks_report(ks_to_cdf(a, cdf), static_cast<double>(a.size()));
}

inline void to_json(nlohmann::json& j, const KsReport& r) {
  j = {{"statistic", r.statistic},       {"n_eff", r.n_eff},
       {"p_value", r.p_value},           {"critical_1pct", r.critical_1pct},
       {"critical_5pct", r.critical_5pct}};
}

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;   ///< delete-group jackknife (20 groups)
  double ols_stderr = 0.0;  ///< regression standard error
  double t_min = 0.0;
  double t_max = 0.0;
  int n_points = 0;
  std::size_t n_samples = 0;
};

inline void to_json(nlohmann::json& j, const TailFit& f) {
  j = {{"slope", f.slope},
       {"stderr", f.std_error},
       {"ols_stderr", f.ols_stderr},
       {"intercept", f.intercept},
       {"range", {f.t_min, f.t_max}},
       {"n_points", f.n_points},
       {"n_samples", f.n_samples}};
}

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Line {
  double slope, intercept, se;
  int n;
};

/// log survival vs log t on the log-spaced abscissae; points with survival
/// below 50/N are dropped.
inline Line survival_line(const std::vector<double>& sorted, double t_min, double t_max,
                          int n_points) {
  const double n = static_cast<double>(sorted.size());
  std::vector<double> lx, ly;
  for (int k = 0; k < n_points; ++k) {
    const double t = t_min * std::pow(t_max / t_min, n_points == 1 ? 0.0 : double(k) / (n_points - 1));
    const auto above = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    if (above < 50.0) continue;
    lx.push_back(std::log(t));
    ly.push_back(std::log(above / n));
  }
  if (lx.size() < 5) throw FitError("tail fit: fewer than 5 usable abscissae");
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double b = sxy / sxx;
  const double a = my - b * mx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) rss += std::pow(ly[i] - a - b * lx[i], 2);
  const double se = lx.size() > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
  return {b, a, se, static_cast<int>(lx.size())};
}

}  // namespace detail

inline TailFit tail_exponent_fit(const std::vector<double>& samples, double t_min, double t_max,
                                 int n_points) {
  if (!(t_min > 0.0 && t_max > t_min)) throw FitError("tail fit: need 0 < t_min < t_max");
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  const auto full = detail::survival_line(s, t_min, t_max, n_points);
  TailFit f;
  f.slope = full.slope;
  f.intercept = full.intercept;
  f.ols_stderr = full.se;
  f.std_error = full.se;
  f.t_min = t_min;
  f.t_max = t_max;
  f.n_points = full.n;
  f.n_samples = samples.size();
  constexpr std::size_t G = 20;
  if (samples.size() >= 50 * G) {
    std::vector<double> est;
    for (std::size_t g = 0; g < G; ++g) {
      std::vector<double> part;
      part.reserve(samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i)
        if (i % G != g) part.push_back(samples[i]);
      std::sort(part.begin(), part.end());
      try {
        est.push_back(detail::survival_line(part, t_min, t_max, n_points).slope);
      } catch (const FitError&) {
        est.clear();
        break;
      }
    }
    if (est.size() == G) {
      const double mean = std::accumulate(est.begin(), est.end(), 0.0) / G;
      double v = 0.0;
      for (double e : est) v += (e - mean) * (e - mean);
      f.std_error = std::sqrt(v * (G - 1.0) / G);
    }
  }
  return f;
}

/// Hill estimate of the tail index from the top k order statistics.
inline double hill_estimator(const std::vector<double>& samples, std::size_t k) {
  if (k < 2 || k >= samples.size()) throw FitError("hill: need 2 <= k < N");
  std::vector<double> s = samples;
  std::nth_element(s.begin(), s.end() - static_cast<std::ptrdiff_t>(k) - 1, s.end());
  const double xk = *(s.end() - static_cast<std::ptrdiff_t>(k) - 1);
  if (!(xk > 0.0)) throw FitError("hill: threshold order statistic must be positive");
  double acc = 0.0;
  for (auto it = s.end() - static_cast<std::ptrdiff_t>(k); it != s.end(); ++it)
    acc += std::log(*it / xk);
  return static_cast<double>(k) / acc;
}

struct EcfPoint {
  double xi;
  std::complex<double> value;
  double std_error;  ///< 1 / sqrt(N)
};

inline std::vector<EcfPoint> empirical_char_function(const std::vector<double>& samples,
                                                     const std::vector<double>& xis) {
  if (samples.empty()) throw std::invalid_argument("empirical_char_function: empty sample");
  std::vector<EcfPoint> out;
  const double n = static_cast<double>(samples.size());
  for (double xi : xis) {
    double re = 0.0, im = 0.0;
    for (double x : samples) {
      re += std::cos(xi * x);
      im += std::sin(xi * x);
    }
    out.push_back({xi, {re / n, im / n}, 1.0 / std::sqrt(n)});
  }
  return out;
}

}  // namespace reflevy
