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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "reflevy/analysis.hpp"
#include "reflevy/sde.hpp"

namespace {

using namespace reflevy;

SimOptions quiet(bool no_force = false) {
  SimOptions o;
  o.zero_noise = true;
  o.zero_force = no_force;
  return o;
}

TEST(FirstRoot, Cases) {
  // linear descent from x = 1 at speed -2 over h = 1: root at 0.5
  EXPECT_NEAR(detail::first_root(1.0, -2.0, -2.0, 1.0), 0.5, 1e-15);
  EXPECT_LT(detail::first_root(1.0, 1.0, 1.0, 1.0), 0.0);
  // starting on the boundary moving inward: no root unless the path turns
  EXPECT_LT(detail::first_root(0.0, 1.0, 0.5, 1.0), 0.0);
  // x(s) = s (1 - s) for v0 = 1, v1 = -1, h = 1: returns at s = 1
  EXPECT_NEAR(detail::first_root(0.0, 1.0, -1.0, 1.0), 1.0, 1e-15);
  // dip inside the step: v from -1 to +1 over h = 1, x = 0.2
  // x(s) = 0.2 - s + s^2 -> first root (1 - sqrt(0.2)) / 2
  EXPECT_NEAR(detail::first_root(0.2, -1.0, 1.0, 1.0), (1.0 - std::sqrt(0.2)) / 2.0, 1e-14);
  EXPECT_EQ(detail::first_root(0.0, -1.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(detail::first_root(0.0, 0.0, -1.0, 1.0), 0.0);
}

TEST(Free, ZeroNoiseFixedPoint) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(1, 0);
  const auto p = simulate_free(ff, 0.0, 0.0, SimGrid{1e-2, 5.0, 1}, rng, quiet());
  for (std::size_t i = 0; i < p.size(); ++i) {
    ASSERT_EQ(p.x[i], 0.0);
    ASSERT_EQ(p.v[i], 0.0);
  }
}

TEST(Free, FreeFlight) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(1, 0);
  const double dt = 1.0 / 1024.0;
  const auto p = simulate_free(ff, 0.0, 1.0, SimGrid{dt, 4.0, 1}, rng, quiet(true));
  ASSERT_EQ(p.size(), 4097u);
  for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p.x[i], p.t[i]);
}

TEST(Free, RecordStrideAndDeterminism) {
  const auto ff = ForceField::builtin(2.0);
  auto r1 = derive_stream(3, 4), r2 = derive_stream(3, 4);
  const auto a = simulate_free(ff, 0.0, 1.0, SimGrid{1e-3, 1.0, 1}, r1);
  const auto b = simulate_free(ff, 0.0, 1.0, SimGrid{1e-3, 1.0, 10}, r2);
  ASSERT_EQ(b.size(), 101u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    ASSERT_EQ(b.x[i], a.x[10 * i]);
    ASSERT_EQ(b.t[i], a.t[10 * i]);
  }
}

TEST(Free, TrapezoidRecursion) {
  const auto ff = ForceField::builtin(3.0);
  auto rng = derive_stream(8, 1);
  const auto p = simulate_free(ff, 0.5, -0.2, SimGrid{1e-2, 1.0, 1}, rng);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    ASSERT_NEAR(p.x[i + 1], p.x[i] + 0.005 * (p.v[i] + p.v[i + 1]), 1e-15);
  }
}

TEST(Grid, RejectsStepAboveInverseLipschitz) {
  const auto ff = ForceField::builtin(4.0);  // Lip F = 2
  auto rng = derive_stream(1, 0);
  EXPECT_THROW(simulate_free(ff, 0, 0, SimGrid{0.6, 1.0, 1}, rng), std::invalid_argument);
  EXPECT_NO_THROW(simulate_free(ff, 0, 0, SimGrid{0.5, 1.0, 1}, rng));
  EXPECT_THROW((SimGrid{1e-3, -1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((SimGrid{1e-3, 1.0, 0}.validate()), std::invalid_argument);
}

TEST(Reflected, FreeFlightNeverHits) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(1, 0);
  const double dt = 1.0 / 512.0;
  const auto p = simulate_reflected(ff, BoundaryLaw::dirac(1.0), 1.0, SimGrid{dt, 3.0, 1}, rng,
                                    quiet(true));
  EXPECT_TRUE(p.events.empty());
  for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p.x[i], p.t[i]);
  const auto q = simulate_specular(ff, 1.0, SimGrid{dt, 3.0, 1}, rng, quiet(true));
  EXPECT_TRUE(q.events.empty());
  for (std::size_t i = 0; i < q.size(); ++i) ASSERT_EQ(q.x[i], q.t[i]);
}

TEST(Reflected, PathAndEventInvariants) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(5, 0);
  const auto p = simulate_reflected(ff, BoundaryLaw::half_gaussian(1.0), 1.0,
                                    SimGrid{1e-3, 200.0, 1}, rng);
  ASSERT_FALSE(p.events.empty());
  for (double x : p.x) ASSERT_GE(x, 0.0);
  double prev = -1.0;
  for (const auto& e : p.events) {
    ASSERT_EQ(e.kind, EventKind::restart_diffusive);
    ASSERT_LE(e.v_in, 0.0);
    ASSERT_GT(e.v_out, 0.0);
    ASSERT_GT(e.time, prev);
    prev = e.time;
  }
}

TEST(Reflected, PostEventVelocityFollowsDraw) {
  const auto ff = ForceField::builtin(2.0);
  const double dt = 1e-3;
  int checked = 0;
  for (std::uint64_t id = 0; id < 40; ++id) {
    auto rng = derive_stream(6, id);
    const auto p = simulate_reflected(ff, BoundaryLaw::exponential(1.0), 1.0,
                                      SimGrid{dt, 200.0, 1}, rng);
    for (std::size_t i = 0; i < p.events.size(); ++i) {
      const auto& e = p.events[i];
      const auto k = static_cast<std::size_t>(std::ceil(e.time / dt));
      if (k >= p.size()) continue;
      if (i + 1 < p.events.size() && p.events[i + 1].time <= p.t[k]) continue;
      const double resid = p.t[k] - e.time;
      // residual noise over less than one step is a few sqrt(dt) at most
      ASSERT_NEAR(p.v[k], e.v_out + ff.force(e.v_out) * resid, 6.0 * std::sqrt(dt));
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Reflected, StartsAtOriginAndRejectsBadStart) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(1, 1);
  EXPECT_THROW(simulate_reflected(ff, BoundaryLaw::dirac(1), 0.0, SimGrid{1e-3, 1, 1}, rng),
               std::invalid_argument);
  const auto p = simulate_reflected(ff, BoundaryLaw::dirac(1), 2.0, SimGrid{1e-3, 1, 1}, rng);
  EXPECT_EQ(p.x.front(), 0.0);
  EXPECT_EQ(p.t.front(), 0.0);
}

TEST(Specular, EventsFlipVelocity) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(7, 0);
  const auto p = simulate_specular(ff, 0.5, SimGrid{1e-3, 100.0, 1}, rng);
  ASSERT_FALSE(p.events.empty());
  for (const auto& e : p.events) {
    ASSERT_EQ(e.kind, EventKind::restart_specular);
    ASSERT_EQ(e.v_out, -e.v_in);
  }
  for (double x : p.x) ASSERT_GE(x, 0.0);
}

TEST(Specular, TracksAbsoluteFreePath) {
  const auto ff = ForceField::builtin(2.0);
  const double dt = 1e-3, T = 50.0;
  for (std::uint64_t id = 0; id < 10; ++id) {
    auto r1 = derive_stream(99, id), r2 = derive_stream(99, id);
    const auto f = simulate_free(ff, 0.0, 0.7, SimGrid{dt, T, 1}, r1);
    const auto s = simulate_specular(ff, 0.7, SimGrid{dt, T, 1}, r2);
    ASSERT_EQ(f.size(), s.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double tol = 5.0 * dt * std::max(1.0, f.t[i]);
      ASSERT_NEAR(s.x[i], std::abs(f.x[i]), tol) << "path " << id << " t " << f.t[i];
      const double sg = f.x[i] > 0 ? 1.0 : -1.0;
      if (std::abs(f.x[i]) > 1e-6) {
        ASSERT_NEAR(s.v[i], sg * f.v[i], tol + 1e-9);
      }
    }
  }
}

TEST(Guard, HalvingThenAbort) {
  // a law concentrated near 0 with a strong inward push forces many hits
  const auto ff = ForceField::builtin(2.0);
  SimOptions o;
  o.max_events_per_step = 2;
  o.max_halvings = 3;
  auto rng = derive_stream(1, 0);
  EXPECT_THROW(simulate_reflected(ff, BoundaryLaw::dirac(1e-9), 1e-9, SimGrid{0.5, 50.0, 1}, rng, o),
               SimulationError);
}

TEST(ReflectOnInfimum, Examples) {
  PathSample p;
  p.t = {0, 1, 2, 3};
  p.x = {0, 1, -1, 2};
  p.v = {1, 2, 3, 4};
  const auto r = reflect_on_infimum(p);
  EXPECT_EQ(r.x, (std::vector<double>{0, 1, 0, 3}));
  EXPECT_EQ(r.v, p.v);
  EXPECT_EQ(reflect_on_infimum(r).x, r.x);
  PathSample q;
  q.t = {0, 1, 2};
  q.x = {0, 0.5, 0.25};
  q.v = {0, 0, 0};
  EXPECT_EQ(reflect_on_infimum(q).x, q.x);
}

TEST(Inelastic, PositivePathUnchanged) {
  PathSample p;
  const double dt = 0.01;
  for (int i = 0; i <= 500; ++i) {
    const double t = i * dt;
    p.push(t, t == 0 ? 0.0 : t * (2.0 + std::sin(7 * t)), std::cos(t));
  }
  const auto q = inelastic_from_free(p);
  ASSERT_EQ(q.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    ASSERT_EQ(q.x[i], p.x[i]);
    ASSERT_EQ(q.v[i], p.v[i]);
    ASSERT_NEAR(q.t[i], p.t[i], 1e-12);
  }
}

TEST(Inelastic, RemovesZeroStretches) {
  // X goes up, comes back below its start and sits at the running minimum
  PathSample p;
  const std::vector<double> xs = {0, 1, 2, 1, 0, -1, -2, -1, 0};
  for (std::size_t i = 0; i < xs.size(); ++i) p.push(double(i), xs[i], 0.0);
  const auto r = reflect_on_infimum(p);
  EXPECT_EQ(r.x, (std::vector<double>{0, 1, 2, 1, 0, 0, 0, 1, 2}));
  const auto q = inelastic_from_free(p);
  // counted intervals: [0,1],[1,2],[2,3],[3,4],[6,7],[7,8] -> A_end = 6
  ASSERT_EQ(q.size(), 7u);
  EXPECT_EQ(q.x, (std::vector<double>{0, 1, 2, 1, 0, 1, 2}));
  EXPECT_EQ(inelastic_clock(p).back(), 6.0);
}

TEST(Inelastic, NonnegativeFromZero) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(17, 0);
  const auto p = simulate_free(ff, 0.0, 1.0, SimGrid{1e-2, 500.0, 1}, rng);
  bool warn = true;
  const auto q = inelastic_from_free(p, &warn);
  EXPECT_EQ(q.x.front(), 0.0);
  for (double x : q.x) ASSERT_GE(x, 0.0);
  EXPECT_LE(q.t.back(), p.t.back() + 1e-9);
  EXPECT_FALSE(warn);
}

TEST(SecondConstruction, ZeroSetMatchesIntervals) {
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(21, 0);
  const double dt = 1e-2;
  const auto sc = second_construction(ff, BoundaryLaw::dirac(1.0), 1.0, SimGrid{dt, 2000.0, 1}, rng);
  ASSERT_GE(sc.sigmas.size(), 2u);
  EXPECT_FALSE(sc.few_cycles);
  ASSERT_TRUE(sc.taus.size() == sc.sigmas.size() || sc.taus.size() == sc.sigmas.size() + 1);
  for (std::size_t i = 0; i < sc.sigmas.size(); ++i) {
    ASSERT_LE(sc.taus[i], sc.sigmas[i]);
    if (i + 1 < sc.taus.size()) {
      ASSERT_LE(sc.sigmas[i], sc.taus[i + 1]);
    }
  }
  std::size_t j = 0;
  for (std::size_t i = 0; i < sc.frak.size(); ++i) {
    const double t = sc.frak.t[i];
    while (j < sc.taus.size() && j < sc.sigmas.size() && sc.sigmas[j] < t) ++j;
    const bool in_zero = j < sc.taus.size() && sc.taus[j] <= t &&
                         (j >= sc.sigmas.size() || t <= sc.sigmas[j]);
    if (in_zero) {
      ASSERT_EQ(sc.frak.x[i], 0.0) << t;
    } else if (t > 0) {
      ASSERT_GT(sc.frak.x[i], 0.0) << t;
    }
  }
  // A' is a clock: nondecreasing, slope at most 1
  for (std::size_t i = 1; i < sc.aprime.size(); ++i) {
    ASSERT_GE(sc.aprime[i], sc.aprime[i - 1] - 1e-12);
    ASSERT_LE(sc.aprime[i] - sc.aprime[i - 1], dt + 1e-12);
  }
}

TEST(Comparisons, ExactUnderSharedNoise) {
  const auto ff = ForceField::builtin(2.0);
  const auto mu = BoundaryLaw::half_gaussian(1.0);
  const SimGrid g{1e-2, 200.0, 1};
  std::size_t v1 = 0, v2 = 0, nodes = 0;
  for (std::uint64_t id = 0; id < 30; ++id) {
    auto ra = derive_stream(5, id), rb = derive_stream(5, id);
    const auto refl = simulate_reflected(ff, mu, 1.0, g, ra);
    const auto sc = second_construction(ff, mu, 1.0, g, rb);
    const auto xcal = reflect_on_infimum(sc.free);
    ASSERT_EQ(refl.size(), xcal.size());
    for (std::size_t i = 0; i < xcal.size(); ++i) {
      v1 += refl.x[i] < xcal.x[i];
      v2 += sc.frak.x[i] > xcal.x[i];
      ++nodes;
    }
  }
  EXPECT_EQ(v1, 0u);
  EXPECT_EQ(v2, 0u);
  EXPECT_GT(nodes, 500000u);
}

TEST(Episode, CensoringAndOrder) {
  const auto ff = ForceField::builtin(2.0);
  const auto mu = BoundaryLaw::dirac(1.0);
  int cens = 0;
  for (std::uint64_t id = 0; id < 200; ++id) {
    auto rng = derive_stream(2, id);
    const auto e = sample_persistence_episode(ff, mu, 1e-2, 50.0, rng);
    ASSERT_GT(e.tau, 0.0);
    ASSERT_GE(e.sigma, e.tau);
    ASSERT_LE(e.sigma, 50.0 + 1e-9);
    cens += e.sigma_censored;
    if (e.tau_censored) {
      ASSERT_TRUE(e.sigma_censored);
    }
  }
  EXPECT_GT(cens, 0);
  EXPECT_LT(cens, 200);
}

TEST(VelocityHit, ZeroNoiseDeterministic) {
  // F = 0, no noise: never reaches another level
  const auto ff = ForceField::builtin(2.0);
  auto rng = derive_stream(1, 0);
  EXPECT_FALSE(velocity_hitting_time(ff, 1.0, 0.0, 1e-2, 10.0, rng, quiet(true)).has_value());
  // builtin drift without noise decays toward 0 but never crosses it
  EXPECT_FALSE(velocity_hitting_time(ff, 1.0, 0.0, 1e-2, 10.0, rng, quiet()).has_value());
  // reaches 0.5 from 1: v' = -v/(1+v^2) -> t = ln 2 + (1 - 0.25)/2
  const auto t = velocity_hitting_time(ff, 1.0, 0.5, 1e-4, 10.0, rng, quiet());
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, std::log(2.0) + 0.375, 1e-3);
}

TEST(Reflected, InterHitDurationsOddEvenSameLaw) {
  const auto ff = ForceField::builtin(2.0);
  const auto mu = BoundaryLaw::half_gaussian(0.5);
  std::vector<double> odd, even;
  for (std::uint64_t id = 0; id < 300; ++id) {
    auto rng = derive_stream(91, id);
    const auto p = simulate_reflected(ff, mu, 0.5, SimGrid{1e-2, 2000.0, 200000}, rng);
    for (std::size_t n = 1; n + 1 < p.events.size(); ++n)
      (n % 2 ? odd : even).push_back(p.events[n + 1].time - p.events[n].time);
  }
  ASSERT_GT(odd.size(), 500u);
  ASSERT_GT(even.size(), 500u);
  EXPECT_GT(ks_two_sample(odd, even).p_value, 0.01);
}

TEST(Free, SupVelocityGrowsLikeRootT) {
  const auto ff = ForceField::builtin(2.0);
  std::vector<double> m;
  for (double T : {10.0, 100.0, 1000.0}) {
    double acc = 0.0;
    for (std::uint64_t id = 0; id < 400; ++id) {
      auto rng = derive_stream(93, id);
      acc += sup_abs_velocity(ff, 0.0, 1e-2, T, rng);
    }
    m.push_back(acc / 400.0);
  }
  const double s1 = (m[1] - m[0]) / (std::sqrt(100.0) - std::sqrt(10.0));
  const double s2 = (m[2] - m[1]) / (std::sqrt(1000.0) - std::sqrt(100.0));
  EXPECT_GT(s1, 0.0);
  // growth no faster than sqrt(T): the slope must not pick up
  EXPECT_LE(s2, 1.2 * s1) << m[0] << " " << m[1] << " " << m[2];
}

}  // namespace
