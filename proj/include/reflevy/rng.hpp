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

#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace reflevy {

inline constexpr std::string_view kPrngFamily = "xoshiro256++/splitmix64";

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Advance by 2^128 draws.
  void jump() noexcept {
    static constexpr std::uint64_t kJump[] = {
        0x180EC6D33CFD0ABAULL, 0xD5A61266F0C9392CULL, 0xA9582618E03FC9AAULL,
        0x39ABDC4529B1661CULL};
    std::uint64_t t[4] = {0, 0, 0, 0};
    for (std::uint64_t j : kJump) {
      for (int b = 0; b < 64; ++b) {
        if (j & (std::uint64_t{1} << b)) {
          for (int i = 0; i < 4; ++i) t[i] ^= s_[i];
        }
        (*this)();
      }
    }
    for (int i = 0; i < 4; ++i) s_[i] = t[i];
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Variate generators on top of one engine; the draw sequence is a function
/// of the engine seed alone.
class Variates {
 public:
  explicit Variates(std::uint64_t seed) noexcept : eng_(seed) {}

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() noexcept { return -std::log(uniform()); }

  /// Standard normal via the Boost.Random ziggurat.
  double normal() noexcept { return normal_(eng_); }

  Xoshiro256pp& engine() noexcept { return eng_; }

 private:
  friend class RngStream;
  Xoshiro256pp eng_;
  boost::random::normal_distribution<double> normal_;
};

/// Per-path randomness. `noise` feeds Brownian increments only; `restart`
/// feeds boundary draws and bridge refinements, so that coupled simulations
/// with different boundary rules see identical increments.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : master_seed_(master_seed),
        stream_id_(stream_id),
        noise(mix(master_seed, stream_id)),
        restart(mix(master_seed, stream_id)) {
    restart.eng_.jump();
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Seed of the noise engine: injective in stream_id for a fixed master.
  static constexpr std::uint64_t mix(std::uint64_t master,
                                     std::uint64_t id) noexcept {
    return master ^ (id * 0x9E3779B97F4A7C15ULL);
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;

 public:
  Variates noise;
  Variates restart;
};

inline RngStream derive_stream(std::uint64_t master_seed,
                               std::uint64_t path_index) {
  return RngStream(master_seed, path_index);
}

}  // namespace reflevy
