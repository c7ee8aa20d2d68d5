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
#include <vector>

#include "reflevy/rng.hpp"

namespace {

using reflevy::derive_stream;
using reflevy::RngStream;

TEST(Rng, SplitMixReferenceValues) {
  // Published reference output for seed 1234567.
  reflevy::SplitMix64 sm(1234567);
  EXPECT_EQ(sm.next(), 6457827717110365317ULL);
  EXPECT_EQ(sm.next(), 3203168211198807973ULL);
}

TEST(Rng, SameInputsSameStream) {
  auto a = derive_stream(42, 7);
  auto b = derive_stream(42, 7);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.noise.normal(), b.noise.normal());
    ASSERT_EQ(a.restart.uniform(), b.restart.uniform());
  }
}

TEST(Rng, NoiseAndRestartDiffer) {
  auto a = derive_stream(42, 7);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.noise.uniform() == a.restart.uniform();
  EXPECT_EQ(same, 0);
}

TEST(Rng, RestartDrawsDoNotPerturbNoise) {
  auto a = derive_stream(9, 3);
  auto b = derive_stream(9, 3);
  for (int i = 0; i < 500; ++i) {
    if (i % 7 == 0) b.restart.exponential();
    ASSERT_EQ(a.noise.normal(), b.noise.normal());
  }
}

TEST(Rng, UniformInOpenInterval) {
  auto s = derive_stream(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.noise.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, AdjacentStreamsLookIndependent) {
  auto a = derive_stream(2024, 0);
  auto b = derive_stream(2024, 1);
  const int n = 10000;
  std::vector<double> x(n), y(n);
  double sxy = 0;
  for (int i = 0; i < n; ++i) {
    x[i] = a.noise.uniform();
    y[i] = b.noise.uniform();
    sxy += (x[i] - 0.5) * (y[i] - 0.5);
  }
  // correlation of uniforms: sd 1/sqrt(n) after scaling by 12
  EXPECT_LT(std::abs(12.0 * sxy / n), 4.0 / std::sqrt(double(n)));
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) ++i; else ++j;
    d = std::max(d, std::abs(double(i) / n - double(j) / n));
  }
  EXPECT_LT(d, 1.63 * std::sqrt(2.0 / n));
}

TEST(Rng, NormalMoments) {
  auto s = derive_stream(5, 5);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.noise.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n; m2 /= n; m4 /= n;
  EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(double(n)));
  EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Rng, ExponentialMean) {
  auto s = derive_stream(11, 0);
  const int n = 200000;
  double m = 0;
  for (int i = 0; i < n; ++i) m += s.restart.exponential();
  EXPECT_NEAR(m / n, 1.0, 5.0 / std::sqrt(double(n)));
}

TEST(Rng, MixIsInjectiveOnSmallIds) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t id = 0; id < 5000; ++id) seeds.push_back(RngStream::mix(77, id));
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
}

}  // namespace
