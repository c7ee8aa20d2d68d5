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
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflevy/model.hpp"

namespace reflevy {

/// Time grid of a simulation. Every k-th node is recorded.
struct SimGrid {
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t record_stride = 1;

  std::int64_t steps() const {
    return static_cast<std::int64_t>(std::ceil(horizon / dt - 1e-9));
  }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("grid: dt must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("grid: horizon must be > 0");
    if (record_stride < 1) throw std::invalid_argument("grid: record_stride must be >= 1");
    if (horizon / dt > 4e18) throw std::invalid_argument("grid: too many steps");
  }

  /// Also enforces dt <= 1 / Lip(F), which the coupled comparisons rely on.
  void validate(const ForceField& ff) const {
    validate();
    if (ff.lipschitz_bound() > 0.0 && dt * ff.lipschitz_bound() > 1.0) {
      std::ostringstream os;
      os << "grid: dt = " << dt << " exceeds 1/Lip(F) = " << 1.0 / ff.lipschitz_bound();
      throw std::invalid_argument(os.str());
    }
  }
};

enum class EventKind { hit_zero, restart_diffusive, restart_specular, sigma_time, tau_time };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::hit_zero: return "hit_zero";
    case EventKind::restart_diffusive: return "restart_diffusive";
    case EventKind::restart_specular: return "restart_specular";
    case EventKind::sigma_time: return "sigma_time";
    case EventKind::tau_time: return "tau_time";
  }
  return "?";
}

struct BoundaryEvent {
  double time = 0.0;
  EventKind kind = EventKind::hit_zero;
  double v_in = 0.0;
  double v_out = 0.0;
};

/// Recorded path (t, x, v) with its boundary-event log.
struct PathSample {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<BoundaryEvent> events;

  std::size_t size() const noexcept { return t.size(); }
  void reserve(std::size_t n) {
    t.reserve(n);
    x.reserve(n);
    v.reserve(n);
  }
  void push(double tt, double xx, double vv) {
    t.push_back(tt);
    x.push_back(xx);
    v.push_back(vv);
  }
};

inline void write_paths_header(std::ostream& os) { os << "path_id,t,x,v\n"; }

inline void write_path_rows(std::ostream& os, std::size_t id, const PathSample& p) {
  char buf[128];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", id, p.t[i], p.x[i], p.v[i]);
    os << buf;
  }
}

inline void write_events_header(std::ostream& os) { os << "path_id,time,kind,v_in,v_out\n"; }

inline void write_event_rows(std::ostream& os, std::size_t id, const PathSample& p) {
  char buf[160];
  for (const auto& e : p.events) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%s,%.17g,%.17g\n", id, e.time, to_string(e.kind),
                  e.v_in, e.v_out);
    os << buf;
  }
}

}  // namespace reflevy
