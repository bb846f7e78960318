// Copyright 2026 The sundrop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent brute-force references. None of these share code with the
// library beyond the plain data types.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sundrop/fleet.hpp"
#include "sundrop/siting.hpp"
#include "sundrop/trace.hpp"

namespace sundrop::oracle {

// Most cores any activation vector lights within the budget, by enumerating
// every per-server core count.
inline int brute_force_max_cores(std::span<const ServerSpec> servers, double budget_watts) {
  std::vector<int> c(servers.size(), 0);
  int best = 0;
  while (true) {
    double w = 0.0;
    int cores = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] > 0) w += servers[i].idle_watts + c[i] * servers[i].per_core_watts;
      cores += c[i];
    }
    if (w <= budget_watts) best = std::max(best, cores);
    std::size_t i = 0;
    while (i < c.size() && c[i] == servers[i].core_count) c[i++] = 0;
    if (i == c.size()) break;
    ++c[i];
  }
  return best;
}

// Least draw among vectors lighting exactly `cores`.
inline double brute_force_min_watts(std::span<const ServerSpec> servers, int cores) {
  std::vector<int> c(servers.size(), 0);
  double best = INFINITY;
  while (true) {
    double w = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] > 0) w += servers[i].idle_watts + c[i] * servers[i].per_core_watts;
      n += c[i];
    }
    if (n == cores) best = std::min(best, w);
    std::size_t i = 0;
    while (i < c.size() && c[i] == servers[i].core_count) c[i++] = 0;
    if (i == c.size()) break;
    ++c[i];
  }
  return best;
}

// Union coverage computed directly from the definition: the share of step
// indices at which some trace is opportunity power of at least min_mw.
inline double brute_force_union(const std::vector<PowerTrace>& traces, double min_mw) {
  if (traces.empty()) return 0.0;
  const std::size_t n = traces.front().size();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (const auto& t : traces) {
      const auto& s = t[i];
      any = any || ((s.curtailed || s.price_usd_per_mwh <= 0.0) && s.available_mw >= min_mw);
    }
    hits += any ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

// Best objective over every k-subset of the candidates.
inline double best_subset_objective(std::span<const CandidateSite> c, int k, double demand_mw,
                                    SitingObjective obj) {
  const std::size_t n = c.size();
  const std::size_t steps = c.empty() ? 0 : c.front().trace.size();
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    double sum = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask & (1u << i))) continue;
        const auto& s = c[i].trace[t];
        const bool opp = s.curtailed || s.price_usd_per_mwh <= 0.0;
        if (!opp || s.available_mw < demand_mw) continue;
        v = std::max(v, obj == SitingObjective::energy ? s.available_mw : 1.0);
      }
      sum += v;
    }
    best = std::max(best, steps == 0 ? 0.0 : sum / static_cast<double>(steps));
  }
  return best;
}

// Daylight fraction of a half-sine solar day sampled every step_s, counting
// samples whose power reaches min_mw; computed from the sample instants.
inline double solar_duty_reference(double peak_mw, double sunrise_s, double sunset_s, double step_s,
                                   double min_mw) {
  const auto n = static_cast<std::size_t>(std::llround(86400.0 / step_s));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = step_s * static_cast<double>(i);
    if (t < sunrise_s || t >= sunset_s) continue;
    const double p = peak_mw * std::sin(M_PI * (t - sunrise_s) / (sunset_s - sunrise_s));
    if (p >= min_mw) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace sundrop::oracle
