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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "reflevy/harness/pool.hpp"
#include "reflevy/harness/report.hpp"
#include "reflevy/model.hpp"
#include "reflevy/rng.hpp"
#include "reflevy/stable.hpp"

namespace reflevy::harness {

/// Reference draws at time t of the symmetric stable process Z with
/// E exp(i xi Z_t) = exp(-t sigma |xi|^alpha).
enum class RefKind {
  supremum,  ///< sup_{[0,t]} Z, equal in law to Z_t - inf_{[0,t]} Z
  marginal,  ///< Z_t
  abs_marginal,  ///< |Z_t|
};

inline const char* to_string(RefKind k) {
  switch (k) {
    case RefKind::supremum: return "supremum";
    case RefKind::marginal: return "marginal";
    case RefKind::abs_marginal: return "abs_marginal";
  }
  return "?";
}

struct ReferenceKey {
  RefKind kind = RefKind::supremum;
  double alpha = 1.0;
  double sigma = 1.0;
  double t = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  /// Draw method; part of the key so a sampler change invalidates the cache.
  std::string grid() const {
    return kind == RefKind::supremum ? "stick-breaking:rel_tol=1e-15" : "exact";
  }

  nlohmann::json to_json() const {
    return {{"kind", to_string(kind)}, {"alpha", alpha}, {"sigma_alpha", sigma}, {"t", t},
            {"n", n},  {"seed", seed},  {"grid", grid()},  {"prng_family", std::string(kPrngFamily)}};
  }

  std::string file_stem() const {
    const std::string s = to_json().dump();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "ref_%s_%016llx", to_string(kind),
                  static_cast<unsigned long long>(h));
    return buf;
  }
};

inline std::vector<double> generate_reference(const ReferenceKey& k, unsigned threads) {
  const StableParams p{k.alpha, k.sigma, 0.0};
  return parallel_map(k.n, threads, [&](std::size_t i) {
    RngStream rng = derive_stream(k.seed, i);
    switch (k.kind) {
      case RefKind::supremum: return sample_stable_supremum(p, k.t, rng);
      case RefKind::marginal: return sample_stable_increment(p, k.t, rng.noise);
      case RefKind::abs_marginal: return std::abs(sample_stable_increment(p, k.t, rng.noise));
    }
    return 0.0;
  });
}

namespace detail {
inline bool read_cached(const std::string& csv, const std::string& side, const ReferenceKey& k,
                        std::vector<double>& out) {
  std::ifstream js(side);
  if (!js) return false;
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const std::exception&) {
    return false;
  }
  if (!meta.contains("key") || meta["key"] != k.to_json()) return false;
  std::ifstream f(csv);
  std::string line;
  if (!std::getline(f, line) || line != "value") return false;
  out.clear();
  out.reserve(k.n);
  while (std::getline(f, line)) {
    char* end = nullptr;
    const double d = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) return false;
    out.push_back(d);
  }
  return out.size() == k.n;
}
}  // namespace detail

/// Samples for `k`, read from `cache_dir` when a matching file exists and
/// generated (then stored) otherwise.
inline std::vector<double> reference_samples(const ReferenceKey& k, const std::string& cache_dir,
                                             unsigned threads, bool* from_cache = nullptr) {
  const std::string stem = k.file_stem();
  const std::string csv = cache_dir + "/samples_" + stem + ".csv";
  const std::string side = cache_dir + "/samples_" + stem + ".json";
  std::vector<double> xs;
  if (detail::read_cached(csv, side, k, xs)) {
    if (from_cache) *from_cache = true;
    return xs;
  }
  if (from_cache) *from_cache = false;
  xs = generate_reference(k, threads);
  ArtifactWriter(cache_dir).write_samples(stem, xs, {{"key", k.to_json()}});
  return xs;
}

}  // namespace reflevy::harness
