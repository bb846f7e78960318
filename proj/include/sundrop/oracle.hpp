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

// Exhaustive minimum-carbon schedule for small instances, used as a test
// oracle for the online scheduler.
//
// Instances must be uncontended so that jobs are independent:
//   * every job is a single task arriving on a step boundary;
//   * compute servers of a site share one per-core wattage, with zero idle
//     draw, no RAM/flash nodes and an unpowered fabric;
//   * whenever a site lights any core it lights enough for every job at
//     full width, with RAM and cold storage to spare;
//   * every transfer fits within one step.
//
// Each job then gets its own search over per-step actions. The actions are
// the ones the platform permits a job at a step boundary:
//
//   wait (not started or frozen), start or resume at a site, keep running,
//   freeze, migrate (running or from cold storage).
//
// A site can host a job in a step when it lights a core there and, for 100%
// renewable jobs, the sample is opportunity power. Occupying a site for a
// step requires it to stay hostable through the next step as well, so the
// following boundary can still evacuate. A migration needs the source to
// stay usable until the transfer plus the safety margin has elapsed, and the
// target to be hostable through the step after arrival.
//
// The search keeps, per boundary and location, the Pareto front of
// (progress, carbon) and returns the cheapest completion before the
// deadline.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sundrop/error.hpp"
#include "sundrop/network.hpp"
#include "sundrop/scenario.hpp"
#include "sundrop/scheduler.hpp"
#include "sundrop/site.hpp"
#include "sundrop/workload.hpp"

namespace sundrop {

inline constexpr std::size_t kOracleMaxSites = 3;
inline constexpr std::size_t kOracleMaxJobs = 5;
inline constexpr std::size_t kOracleMaxSteps = 200;

struct OracleJobPlan {
  std::string job_id;
  bool feasible = false;
  double kgco2e = 0.0;
  std::optional<double> completion_s;
  std::vector<std::string> actions;  // "boundary:action" in time order
};

struct OracleResult {
  bool feasible = true;  // every job can meet its deadline
  double total_kgco2e = 0.0;
  std::vector<OracleJobPlan> jobs;
};

// Whether the scenario lies in the instance family the oracle handles;
// returns the first reason it does not.
inline std::optional<std::string> oracle_unsupported(const ScenarioConfig& cfg) {
  if (cfg.sites.size() > kOracleMaxSites || cfg.jobs.size() > kOracleMaxJobs) return "too many sites or jobs";
  double demand = 0.0, ram = 0.0, state = 0.0;
  for (const auto& j : cfg.jobs) {
    if (j.tasks.size() != 1) return "job '" + j.job_id + "' has more than one task";
    demand += j.tasks[0].max_parallelism;
    ram += j.tasks[0].ram_gb;
    state += j.tasks[0].state_gb;
  }
  for (const auto& sc : cfg.sites) {
    const auto& s = sc.spec;
    if (sc.forecast != ForecastMethod::oracle) return "site '" + s.site_id + "' does not use oracle forecasts";
    if (s.fabric.watts_per_switch != 0.0) return "site '" + s.site_id + "' has a powered fabric";
    if (s.cold_storage_gb < state) return "site '" + s.site_id + "' has too little cold storage";
    const double pc = s.servers.front().per_core_watts;
    for (const auto& v : s.servers) {
      if (!v.is_compute()) return "site '" + s.site_id + "' has RAM or flash nodes";
      if (v.idle_watts != 0.0 || v.per_core_watts != pc) return "site '" + s.site_id + "' is heterogeneous";
    }
    const Site site(s, cfg.traces.at(s.trace_ref));
    for (std::size_t i = 0; i < site.trace().size(); ++i) {
      const auto& cap = site.capacity_at_step(i);
      if (cap.active_cores == 0) continue;
      if (cap.active_cores < demand || cap.ram_gb < ram)
        return "site '" + s.site_id + "' is contended at step " + std::to_string(i);
    }
  }
  return std::nullopt;
}

namespace detail {

struct OracleSite {
  std::string id;
  std::string iso;
  double per_core_watts = 0.0;
  std::vector<int> cores;
  std::vector<bool> opportunity;
  std::vector<double> carbon;  // effective gCO2/kWh
};

struct OracleLabel {
  double progress = 0.0;
  double carbon = 0.0;
  int node = -1;
};

struct OracleNode {
  int parent = -1;
  std::string action;
};

inline void insert_label(std::vector<OracleLabel>& front, OracleLabel l) {
  for (const auto& f : front)
    if (f.progress >= l.progress && f.carbon <= l.carbon) return;
  std::erase_if(front, [&](const OracleLabel& f) { return l.progress >= f.progress && l.carbon <= f.carbon; });
  front.push_back(l);
}

}  // namespace detail

inline OracleResult exhaustive_schedule(const ScenarioConfig& cfg) {
  using detail::OracleLabel;
  if (cfg.sites.size() > kOracleMaxSites || cfg.jobs.size() > kOracleMaxJobs)
    throw SearchSpaceTooLarge("oracle handles at most 3 sites and 5 jobs");
  validate_scenario(cfg);

  std::vector<detail::OracleSite> sites;
  {
    std::vector<SiteConfig> ordered = cfg.sites;
    std::sort(ordered.begin(), ordered.end(),
              [](const SiteConfig& a, const SiteConfig& b) { return a.spec.site_id < b.spec.site_id; });
    for (const auto& sc : ordered) {
      const Site site(sc.spec, cfg.traces.at(sc.spec.trace_ref));
      detail::OracleSite os{sc.spec.site_id, sc.spec.iso_id, sc.spec.servers.front().per_core_watts, {}, {}, {}};
      for (std::size_t i = 0; i < site.trace().size(); ++i) {
        os.cores.push_back(site.capacity_at_step(i).active_cores);
        os.opportunity.push_back(site.trace()[i].is_opportunity());
        os.carbon.push_back(site.trace()[i].effective_carbon_gco2_per_kwh());
      }
      sites.push_back(std::move(os));
    }
  }
  const PowerTrace& any = *cfg.traces.at(cfg.sites.front().spec.trace_ref);
  const double start = any.start();
  const double step = any.step();
  double span = std::numeric_limits<double>::infinity();
  for (const auto& sc : cfg.sites) span = std::min(span, cfg.traces.at(sc.spec.trace_ref)->duration());
  if (cfg.duration_s > 0.0) span = std::min(span, cfg.duration_s);
  const auto steps = static_cast<std::size_t>(std::llround(span / step));
  if (std::abs(static_cast<double>(steps) * step - span) > 1e-9 * span)
    throw std::invalid_argument("oracle needs a whole number of steps");
  if (steps > kOracleMaxSteps) throw SearchSpaceTooLarge("oracle handles at most 200 steps");
  if (auto why = oracle_unsupported(cfg)) throw std::invalid_argument("oracle: " + *why);

  const double margin = cfg.policy.safety_margin_s < 0.0 ? step : cfg.policy.safety_margin_s;
  const std::size_t guard = cfg.policy.guard_steps;
  const std::size_t S = sites.size();
  auto boundary = [&](std::size_t i) { return start + step * static_cast<double>(i); };

  OracleResult result;
  for (const auto& job : cfg.jobs) {
    const TaskSpec& task = job.tasks.front();
    const int width = task.max_parallelism;
    const double work = task.cpu_core_seconds;
    const bool full = job.slo.requires_full_renewable();

    // Hostable / powered, with everything past the end allowed.
    auto host = [&](std::size_t s, std::size_t i) {
      if (i >= steps) return true;
      return sites[s].cores[i] >= 1 && (!full || sites[s].opportunity[i]);
    };
    auto powered = [&](std::size_t s, std::size_t i) { return i >= steps || sites[s].cores[i] >= 1; };
    auto host_range = [&](std::size_t s, std::size_t from, std::size_t n) {
      for (std::size_t k = from; k < from + n; ++k)
        if (!host(s, k)) return false;
      return true;
    };
    auto tier_ok = [&](std::size_t a, std::size_t b) {
      return job.tier == Tier::premium || sites[a].iso == sites[b].iso;
    };
    auto link_of = [&](std::size_t a, std::size_t b) -> const InterSiteLink* {
      for (const auto& l : cfg.links)
        if (l.connects(sites[a].id, sites[b].id)) return &l;
      return nullptr;
    };
    // Steps the target must host for a job arriving `tt` after boundary i.
    auto arrival_steps = [&](double tt) {
      const auto a = static_cast<std::size_t>(std::floor(tt / step));
      return std::max(guard, a + 2);
    };

    const double arrival_rel = (job.arrival_s - start) / step;
    const auto first = static_cast<std::size_t>(std::llround(arrival_rel));
    if (std::abs(arrival_rel - static_cast<double>(first)) > 1e-9)
      throw std::invalid_argument("oracle: job '" + job.job_id + "' does not arrive on a step boundary");

    std::vector<detail::OracleNode> nodes;
    auto node = [&](int parent, std::size_t i, std::string action) {
      nodes.push_back({parent, std::to_string(i) + ":" + std::move(action)});
      return static_cast<int>(nodes.size()) - 1;
    };

    // Locations: 0 queued, 1..S frozen at s-1, S+1..2S running at s-S-1.
    const std::size_t L = 1 + 2 * S;
    std::vector<std::vector<OracleLabel>> front(L);
    std::vector<std::vector<OracleLabel>> next(L);
    front[0].push_back({0.0, 0.0, node(-1, first, "arrive")});

    OracleJobPlan plan;
    plan.job_id = job.job_id;
    double best = std::numeric_limits<double>::infinity();
    int best_node = -1;

    // Runs the job at site s during [boundary(i) + offset, boundary(i + 1)).
    auto run = [&](const OracleLabel& l, std::size_t s, std::size_t i, double offset, int nd) {
      const double avail = step - offset;
      const double need = (work - l.progress) / width;
      const double kg_per_s = width * sites[s].per_core_watts * sites[s].carbon[i] / 3.6e9;
      if (need <= avail) {
        const double done_at = boundary(i) + offset + need;
        const double kg = l.carbon + kg_per_s * need;
        if (done_at <= job.deadline_s && kg < best) {
          best = kg;
          best_node = nd;
          plan.completion_s = done_at;
        }
        return;
      }
      detail::insert_label(next[1 + S + s], {l.progress + width * avail, l.carbon + kg_per_s * avail, nd});
    };

    for (std::size_t i = first; i < steps; ++i) {
      for (auto& f : next) f.clear();
      const double t = boundary(i);
      for (std::size_t loc = 0; loc < L; ++loc) {
        for (const auto& l : front[loc]) {
          if (loc == 0) {
            detail::insert_label(next[0], {l.progress, l.carbon, l.node});
            for (std::size_t s = 0; s < S; ++s)
              if (host_range(s, i, guard)) run(l, s, i, 0.0, node(l.node, i, "start " + sites[s].id));
          } else if (loc <= S) {
            const std::size_t f = loc - 1;
            detail::insert_label(next[loc], {l.progress, l.carbon, l.node});
            if (host_range(f, i, guard)) run(l, f, i, 0.0, node(l.node, i, "resume " + sites[f].id));
            for (std::size_t s = 0; s < S; ++s) {
              if (s == f || !tier_ok(f, s)) continue;
              const InterSiteLink* link = link_of(f, s);
              if (!link) continue;
              const double tt = transfer_time(task.state_gb, *link, 1);
              bool source_ok = true;
              for (std::size_t k = i; k < steps && boundary(k) <= t + tt + margin; ++k)
                source_ok = source_ok && powered(f, k);
              if (!source_ok || !host_range(s, i, arrival_steps(tt))) continue;
              run(l, s, i, tt, node(l.node, i, "resume " + sites[f].id + "->" + sites[s].id));
            }
          } else {
            const std::size_t r = loc - 1 - S;
            if (host(r, i + 1)) run(l, r, i, 0.0, node(l.node, i, "run " + sites[r].id));
            detail::insert_label(next[1 + r], {l.progress, l.carbon, node(l.node, i, "freeze " + sites[r].id)});
            for (std::size_t s = 0; s < S; ++s) {
              if (s == r || !tier_ok(r, s)) continue;
              const InterSiteLink* link = link_of(r, s);
              if (!link) continue;
              const double tt = transfer_time(task.state_gb, *link, 1);
              bool source_ok = true;
              for (std::size_t k = i + 1; k < steps && boundary(k) < t + tt + margin; ++k)
                source_ok = source_ok && host(r, k);
              if (!source_ok || !host_range(s, i, arrival_steps(tt))) continue;
              run(l, s, i, tt, node(l.node, i, "migrate " + sites[r].id + "->" + sites[s].id));
            }
          }
        }
      }
      std::swap(front, next);
    }

    if (best_node >= 0) {
      plan.feasible = true;
      plan.kgco2e = best;
      for (int n = best_node; n >= 0; n = nodes[n].parent) plan.actions.push_back(nodes[n].action);
      std::reverse(plan.actions.begin(), plan.actions.end());
      result.total_kgco2e += best;
    } else {
      plan.completion_s.reset();
      result.feasible = false;
    }
    result.jobs.push_back(std::move(plan));
  }
  return result;
}

}  // namespace sundrop
