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

#include <cmath>
#include <numbers>
#include <vector>

#include "reflevy/generator.hpp"
#include "reflevy/sde.hpp"
#include "reflevy/stable.hpp"

namespace {

using namespace reflevy;

StableParams params(double alpha, double sigma = 1.0) { return {alpha, sigma, 0.0}; }

const TestFunction kBump = TestFunction::bump(1.0, 3.0);

TEST(Prefactor, MatchesLevyKhintchine) {
  // 2 C int_0^inf (1 - cos z) z^{-1-alpha} dz = sigma, integral by mpmath
  EXPECT_NEAR(2.0 * generator_prefactor(params(0.8)) * 1.77331090690874609, 1.0, 1e-14);
  EXPECT_NEAR(2.0 * generator_prefactor(params(1.5)) * 1.67108551589543, 1.0, 1e-9);
  EXPECT_NEAR(2.0 * generator_prefactor(params(1.0, 1.0 / 3.0)) * std::numbers::pi / 2.0,
              1.0 / 3.0, 1e-15);
}

TEST(TestFunction, DerivativesMatchDifferences) {
  const auto f = kBump + TestFunction::bump(0.5, 1.5, -0.7);
  for (double x : {0.6, 1.1, 1.7, 2.3, 2.9}) {
    const double h = 1e-5;
    EXPECT_NEAR(f.d1(x), (f(x + h) - f(x - h)) / (2 * h), 1e-7) << x;
    EXPECT_NEAR(f.d2(x), (f.d1(x + h) - f.d1(x - h)) / (2 * h), 1e-6) << x;
  }
  EXPECT_EQ(f(0.4), 0.0);
  EXPECT_EQ(f(3.0), 0.0);
  EXPECT_NEAR(kBump(2.0), std::exp(-1.0), 1e-16);
  EXPECT_TRUE(kBump.zero_derivative_at_origin());
  EXPECT_FALSE(TestFunction::bump(-0.5, 1.0).zero_derivative_at_origin());
}

struct OracleCase {
  double alpha, x, value;
};

TEST(Generator, MatchesOracle) {
  // compensated integral evaluated in 50-digit arithmetic
  const OracleCase cases[] = {
      {0.8, 0.0, 0.0400650754207929886},  {0.8, 0.5, 0.0742954160423664221},
      {0.8, 2.0, -0.456518077277548407},  {0.8, 2.7, -0.0689183536278990477},
      {0.8, 10.0, 0.00298343827446589551}, {0.8, 100.0, 0.0000326116762804684078},
      {1.5, 0.0, 0.0283986372302703881},  {1.5, 0.5, 0.0696997724610084529},
      {1.5, 2.0, -0.622467689139465471},  {1.5, 2.7, -0.242435395306877759},
      {1.5, 10.0, 0.000741895770780351956}, {1.5, 100.0, 1.39737942186123513e-6},
  };
  for (const auto& c : cases) {
    const double v = fractional_generator(params(c.alpha), kBump, c.x);
    EXPECT_NEAR(v, c.value, 1e-8 * std::abs(c.value)) << c.alpha << " " << c.x;
  }
}

TEST(Generator, FarFieldIsPlainIntegral) {
  for (double alpha : {0.8, 1.5}) {
    const auto p = params(alpha);
    const double x = 100.0;
    const double direct = generator_prefactor(p) *
        integrate([&](double y) { return kBump(y) * std::pow(x - y, -1.0 - alpha); }, 1.0, 3.0);
    EXPECT_GT(direct, 0.0);
    EXPECT_NEAR(fractional_generator(p, kBump, x), direct, 1e-6 * direct);
  }
}

TEST(Generator, AtOriginNoCompensator) {
  const auto p = params(0.8);
  const double direct = generator_prefactor(p) *
      integrate([](double z) { return kBump(z) * std::pow(z, -1.8); }, 1.0, 3.0);
  EXPECT_NEAR(fractional_generator(p, kBump, 0.0), direct, 1e-10 * direct);
}

TEST(Generator, SecondFormAgrees) {
  const auto p = params(0.8);
  for (double x : {0.0, 0.5, 1.3, 2.0, 10.0}) {
    const double a = fractional_generator(p, kBump, x);
    const double b = fractional_generator_second_form(p, kBump, x);
    EXPECT_NEAR(a, b, 1e-5 * std::max(std::abs(a), 1e-3)) << x;
  }
  EXPECT_THROW(fractional_generator_second_form(params(1.2), kBump, 1.0), GeneratorError);
}

TEST(Generator, Rejections) {
  const auto kink = TestFunction::bump(-0.5, 1.0);
  EXPECT_THROW(fractional_generator(params(1.2), kink, 0.3), GeneratorError);
  EXPECT_NO_THROW(fractional_generator(params(0.8), kink, 0.3));
  EXPECT_THROW(fractional_generator(params(1.2), kBump, -1.0), GeneratorError);
  EXPECT_EQ(fractional_generator(params(1.2), TestFunction{}, 2.0), 0.0);
}

TEST(Generator, Linear) {
  const auto g = TestFunction::bump(0.5, 1.5);
  const double a = 1.7, b = -0.7;
  GeneratorSpec spec;
  spec.inner_cut_abs = 1e-4;
  spec.quad.rel_tol = 1e-12;
  for (double alpha : {0.8, 1.5}) {
    const auto p = params(alpha);
    for (double x : {0.0, 0.5, 1.2, 2.0, 4.0}) {
      const double lhs = fractional_generator(p, kBump * a + g * b, x, spec);
      const double rhs = a * fractional_generator(p, kBump, x, spec) +
                         b * fractional_generator(p, g, x, spec);
      EXPECT_NEAR(lhs, rhs, 1e-10) << alpha << " " << x;
    }
  }
  // frozen value for the combination at alpha 1.5
  EXPECT_NEAR(fractional_generator(params(1.5), kBump + g * -0.7, 1.2), 2.19579977848690593, 1e-8);
}

TEST(Generator, ClampInactiveInsideSupport) {
  for (double alpha : {0.8, 1.5}) {
    const auto p = params(alpha);
    for (double x : {1.2, 2.0, 2.8}) {
      const double a = fractional_generator(p, kBump, x);
      EXPECT_NEAR(a, fractional_laplacian_unclamped(p, kBump, x), 1e-8 * std::abs(a));
    }
  }
}

TEST(Generator, TableInterpolates) {
  const auto p = params(1.5);
  const GeneratorTable L(p, kBump);
  for (double x : {0.013, 0.77, 1.01, 1.999, 2.5, 3.3, 5.9, 40.0}) {
    const double d = fractional_generator(p, kBump, x);
    EXPECT_NEAR(L(x), d, 1e-6 * 0.7) << x;  // 0.7 ~ sup |Lf|
  }
}

TEST(WeakForm, ZeroFunctionAndReversal) {
  const auto p = params(0.8);
  const TestFunction zero;
  const GeneratorTable Lz(p, zero, 16, 4.0);
  const std::vector<double> a{0.1, 1.5, 2.5}, b{0.3, 2.0, 7.0};
  const auto r = weak_form_residual(Lz, zero, 0.1, a, b, a);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_EQ(r.finite_difference, 0.0);
  const GeneratorTable L(p, kBump, 257);
  const auto f = weak_form_residual(L, kBump, 0.1, a, b, a);
  const auto g = weak_form_residual(L, kBump, 0.1, b, a, a);
  EXPECT_EQ(f.finite_difference, -g.finite_difference);
  EXPECT_NE(f.finite_difference, 0.0);
}

// R_t has the law of t^{1/alpha} R_1, so one set of exact supremum draws
// gives paired samples at every time.
TEST(WeakForm, MonteCarloIdentity) {
  for (double alpha : {0.8, 1.5}) {
    const auto p = params(alpha);
    const double t = 1.0, h = 0.05;
    const std::size_t n = 100000;
    std::vector<double> r0(n), r1(n), rm(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = derive_stream(61, i);
      const double r = sample_stable_supremum(p, 1.0, s);
      r0[i] = std::pow(t, 1.0 / alpha) * r;
      r1[i] = std::pow(t + h, 1.0 / alpha) * r;
      rm[i] = std::pow(t + h / 2, 1.0 / alpha) * r;
    }
    const GeneratorTable L(p, kBump);
    const auto r = weak_form_residual(L, kBump, h, r0, r1, rm);
    EXPECT_LT(r.residual, 3.0 * r.std_error) << r.finite_difference << " vs " << r.generator_mean;
    // a sigma/2 prefactor would miss by many standard errors
    const double half = r.generator_mean * 0.5 / generator_prefactor(p);
    EXPECT_GT(std::abs(r.finite_difference - half), 5.0 * r.std_error);
  }
}

TEST(Kinetic, TimeOnlyFunctionAwayFromBoundary) {
  const auto ff = ForceField::builtin(2.0);
  const auto mu = BoundaryLaw::dirac(10.0);
  // x and v factors nearly flat on the visited region
  const KineticTestFunction phi{TestFunction::bump(0.1, 0.6), TestFunction::bump(-1e3, 1e3),
                                TestFunction::bump(-1e3, 1e3)};
  std::vector<KineticPathTerms> terms;
  std::vector<BoundaryEvent> events;
  for (std::size_t i = 0; i < 20; ++i) {
    auto rng = derive_stream(71, i);
    const auto path = simulate_reflected(ff, mu, 10.0, SimGrid{1e-4, 0.7, 1}, rng);
    ASSERT_TRUE(path.events.empty());
    terms.push_back(kinetic_path_terms(phi, ff, path));
  }
  const auto rep = kinetic_weak_form_check(terms, events);
  EXPECT_LT(rep.residual, 1e-4);
  EXPECT_FALSE(rep.factorization.has_value());
  EXPECT_FALSE(rep.warning.empty());
}

TEST(Kinetic, ResidualAndFactorization) {
  const auto ff = ForceField::builtin(2.0);
  const auto mu = BoundaryLaw::half_gaussian(1.0);
  const KineticTestFunction phi{TestFunction::bump(-1.0, 3.0), TestFunction::bump(-1.0, 2.0),
                                TestFunction::bump(-3.0, 3.0)};
  std::vector<KineticPathTerms> terms;
  std::vector<BoundaryEvent> events;
  for (std::size_t i = 0; i < 2000; ++i) {
    auto rng = derive_stream(72, i);
    const auto path = simulate_reflected(ff, mu, 0.5, SimGrid{1e-3, 3.0, 1}, rng);
    terms.push_back(kinetic_path_terms(phi, ff, path));
    events.insert(events.end(), path.events.begin(), path.events.end());
  }
  const auto rep = kinetic_weak_form_check(terms, events);
  EXPECT_LT(rep.residual, 3.0 * rep.std_error);
  EXPECT_GT(rep.mean.boundary_plus, 0.0);
  ASSERT_TRUE(rep.factorization.has_value());
  EXPECT_GE(rep.n_events, 1000u);
  EXPECT_GT(rep.factorization->p_value, 0.01);
}

TEST(DensityAsymptotics, StableSupremum) {
  const auto p = params(1.2);
  const std::size_t n = 100000;
  std::vector<double> s1(n), s2(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = derive_stream(81, i);
    s1[i] = sample_stable_supremum(p, 1.0, r);
    s2[i] = sample_stable_supremum(p, 2.0, r);
  }
  const auto d = density_asymptotics_check(s1);
  EXPECT_NEAR(d.tail.value, -1.2, 0.15);
  ASSERT_TRUE(d.origin.has_value());
  EXPECT_NEAR(d.origin->value, 1.2 / 2 - 1, 0.1);
  const double ratio = tail_amplitude_ratio(s1, s2, d.tail.x_lo, d.tail.x_hi);
  EXPECT_NEAR(ratio, 2.0, 0.4);
}

}  // namespace
