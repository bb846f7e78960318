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

// Choosing K SunDrop locations among candidate generation sites.
//
// The default objective is time coverage: the fraction of trace steps in
// which at least one chosen site offers opportunity power of at least the
// demand. The energy objective instead averages, over steps, the largest
// such power among the chosen sites.
//
// Selection is greedy on marginal gain (ties to the lower location_id),
// followed by a pass of single swaps that is repeated while any swap
// strictly improves the objective. When there are at most
// kExactSubsetLimit subsets of size k, every subset is scored and a strictly
// better one replaces the local-search answer.

#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "sundrop/error.hpp"
#include "sundrop/trace.hpp"

namespace sundrop {

enum class SitingObjective { time_coverage, energy };

inline std::optional<SitingObjective> parse_siting_objective(std::string_view s) {
  if (s == "coverage" || s == "time") return SitingObjective::time_coverage;
  if (s == "energy") return SitingObjective::energy;
  return std::nullopt;
}

inline double duty_factor(const PowerTrace& trace, double min_mw) {
  if (!(min_mw >= 0.0)) throw std::invalid_argument("min_mw must be >= 0");
  return coverage(trace, min_mw);
}

struct CandidateSite {
  std::string location_id;
  PowerTrace trace;
  double duty_factor = 0.0;
  double peak_opportunity_mw = 0.0;
};

inline CandidateSite make_candidate(std::string location_id, PowerTrace trace, double min_mw = 0.0) {
  CandidateSite c{std::move(location_id), std::move(trace), 0.0, 0.0};
  c.duty_factor = duty_factor(c.trace, min_mw);
  for (const auto& s : c.trace.samples())
    if (s.is_opportunity()) c.peak_opportunity_mw = std::max(c.peak_opportunity_mw, s.available_mw);
  return c;
}

struct SitingResult {
  std::vector<std::string> chosen;  // sorted by location_id
  double coverage = 0.0;            // time coverage of the chosen set
  double objective = 0.0;           // value of the selected objective
};

namespace detail {

class SitingScore {
 public:
  SitingScore(std::span<const CandidateSite> c, double demand_mw, SitingObjective obj) {
    if (c.empty()) return;
    steps_ = c.front().trace.size();
    for (const auto& cand : c) {
      if (!cand.trace.aligned_with(c.front().trace))
        throw MisalignedTraces("candidate '" + cand.location_id + "' is not aligned with '" +
                               c.front().location_id + "'");
      std::vector<double> v(steps_, 0.0);
      for (std::size_t t = 0; t < steps_; ++t) {
        const auto& s = cand.trace[t];
        if (is_available(s, demand_mw)) v[t] = obj == SitingObjective::energy ? s.available_mw : 1.0;
      }
      values_.push_back(std::move(v));
    }
  }

  double value(const std::vector<std::size_t>& chosen) const {
    if (steps_ == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t t = 0; t < steps_; ++t) {
      double best = 0.0;
      for (std::size_t c : chosen) best = std::max(best, values_[c][t]);
      sum += best;
    }
    return sum / static_cast<double>(steps_);
  }

 private:
  std::size_t steps_ = 0;
  std::vector<std::vector<double>> values_;
};

inline std::size_t subset_count(std::size_t n, std::size_t k) {
  std::size_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > (std::size_t{1} << 40)) return c;
  }
  return c;
}

}  // namespace detail

inline constexpr std::size_t kExactSubsetLimit = 4096;

inline double siting_objective(std::span<const CandidateSite> candidates, const std::vector<std::size_t>& chosen,
                               double demand_mw, SitingObjective obj = SitingObjective::time_coverage) {
  return detail::SitingScore(candidates, demand_mw, obj).value(chosen);
}

inline SitingResult greedy_siting(std::span<const CandidateSite> candidates, int k, double demand_mw,
                                  SitingObjective obj = SitingObjective::time_coverage) {
  if (k < 1 || static_cast<std::size_t>(k) > candidates.size())
    throw std::invalid_argument("k must lie in [1, number of candidates]");
  if (!(demand_mw >= 0.0)) throw std::invalid_argument("demand_mw must be >= 0");

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].location_id < candidates[b].location_id;
  });

  const detail::SitingScore score(candidates, demand_mw, obj);
  std::vector<std::size_t> chosen;
  std::vector<bool> used(candidates.size(), false);
  double current = 0.0;
  for (int round = 0; round < k; ++round) {
    std::size_t best = candidates.size();
    double best_value = -1.0;
    for (std::size_t c : order) {
      if (used[c]) continue;
      chosen.push_back(c);
      const double v = score.value(chosen);
      chosen.pop_back();
      if (v > best_value) {
        best_value = v;
        best = c;
      }
    }
    used[best] = true;
    chosen.push_back(best);
    current = best_value;
  }

  constexpr double kEps = 1e-12;
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t pos = 0; pos < chosen.size() && !improved; ++pos) {
      for (std::size_t c : order) {
        if (used[c]) continue;
        const std::size_t old = chosen[pos];
        chosen[pos] = c;
        const double v = score.value(chosen);
        if (v > current + kEps) {
          used[old] = false;
          used[c] = true;
          current = v;
          improved = true;
          break;
        }
        chosen[pos] = old;
      }
    }
  }

  if (detail::subset_count(candidates.size(), static_cast<std::size_t>(k)) <= kExactSubsetLimit) {
    // Subsets of `order` positions in lexicographic order.
    std::vector<std::size_t> idx(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<std::size_t> trial(idx.size());
    while (true) {
      for (std::size_t i = 0; i < idx.size(); ++i) trial[i] = order[idx[i]];
      const double v = score.value(trial);
      if (v > current + kEps) {
        current = v;
        chosen = trial;
      }
      std::size_t i = idx.size();
      while (i > 0 && idx[i - 1] == order.size() - idx.size() + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < idx.size(); ++j) idx[j] = idx[j - 1] + 1;
    }
  }

  SitingResult out;
  std::vector<const CandidateSite*> picked;
  for (std::size_t c : chosen) picked.push_back(&candidates[c]);
  std::sort(picked.begin(), picked.end(),
            [](const CandidateSite* a, const CandidateSite* b) { return a->location_id < b->location_id; });
  std::vector<PowerTrace> traces;
  for (const auto* p : picked) {
    out.chosen.push_back(p->location_id);
    traces.push_back(p->trace);
  }
  out.coverage = union_coverage(traces, demand_mw);
  out.objective = current;
  return out;
}

}  // namespace sundrop
