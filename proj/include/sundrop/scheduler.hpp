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

// Placement, proactive migration and freeze/resume decisions.
//
// The scheduler is a pure function of the placement state, the per-site
// forecasts and the clock. It is invoked once per trace step. A job is
// "hostable" at a site during a forecast step when the site lights at least
// one core, has RAM for every resident's reservation and, for jobs that
// demand 100% renewable energy, the step is opportunity power. When a forecast
// shows a resident losing its host, the job is moved or frozen at the last
// tick that still allows it:
//
//   * migrate when a target exists and the transfer can still finish a
//     safety margin before the loss;
//   * otherwise freeze to the site's cold storage at the last tick before
//     the loss.
//
// Standard-tier jobs only move within their ISO; premium jobs may move
// anywhere a link reaches.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sundrop/error.hpp"
#include "sundrop/forecast.hpp"
#include "sundrop/network.hpp"
#include "sundrop/site.hpp"
#include "sundrop/workload.hpp"

namespace sundrop {

enum class JobPhase { queued, running, frozen, migrating, done, killed, rejected };

inline std::string_view to_string(JobPhase p) {
  switch (p) {
    case JobPhase::queued: return "queued";
    case JobPhase::running: return "running";
    case JobPhase::frozen: return "frozen";
    case JobPhase::migrating: return "migrating";
    case JobPhase::done: return "done";
    case JobPhase::killed: return "killed";
    case JobPhase::rejected: return "rejected";
  }
  return "?";
}

// Scheduler-visible status of one job.
struct JobState {
  const JobSpec* spec = nullptr;
  JobPhase phase = JobPhase::queued;
  std::string site;    // running/frozen: host; migrating: source
  std::string target;  // migrating only
  double migration_done_s = 0.0;
  bool resuming = false;  // migrating out of cold storage
  double remaining_core_s = 0.0;
  double state_gb = 0.0;
  int vm_count = 0;
  int demand_cores = 1;  // sum of max_parallelism over ready tasks
  double phase_since_s = 0.0;
  std::uint64_t fifo = 0;

  const std::string& id() const { return spec->job_id; }
  bool full_renewable() const { return spec->slo.requires_full_renewable(); }
  double ram_gb() const { return spec->ram_reservation_gb(); }

  double slack(double now) const {
    return spec->deadline_s - now - remaining_core_s / std::max(1, demand_cores);
  }

  // Whether the job occupies (or will occupy on arrival) a site.
  std::optional<std::string> resident_site() const {
    if (phase == JobPhase::running) return site;
    if (phase == JobPhase::migrating) return target;
    return std::nullopt;
  }
};

struct PlacementState {
  std::map<std::string, JobState> jobs;
  std::map<std::string, double> cold_used_gb;
};

struct Start {
  std::string job;
  std::string site;
  int width = 0;
  friend bool operator==(const Start&, const Start&) = default;
};
struct Migrate {
  std::string job;
  std::string from;
  std::string to;
  double start_s = 0.0;
  double transfer_s = 0.0;
  friend bool operator==(const Migrate&, const Migrate&) = default;
};
struct Freeze {
  std::string job;
  std::string site;
  friend bool operator==(const Freeze&, const Freeze&) = default;
};
struct Resume {
  std::string job;
  std::string site;
  double transfer_s = 0.0;  // zero when resuming where the job was frozen
  friend bool operator==(const Resume&, const Resume&) = default;
};
struct Defer {
  std::string job;
  friend bool operator==(const Defer&, const Defer&) = default;
};

using SchedulerAction = std::variant<Start, Migrate, Freeze, Resume, Defer>;

inline std::string describe(const SchedulerAction& a) {
  struct V {
    std::string operator()(const Start& s) const {
      return "start job=" + s.job + " site=" + s.site + " width=" + std::to_string(s.width);
    }
    std::string operator()(const Migrate& m) const {
      return "migrate job=" + m.job + " from=" + m.from + " to=" + m.to;
    }
    std::string operator()(const Freeze& f) const { return "freeze job=" + f.job + " site=" + f.site; }
    std::string operator()(const Resume& r) const { return "resume job=" + r.job + " site=" + r.site; }
    std::string operator()(const Defer& d) const { return "defer job=" + d.job; }
  };
  return std::visit(V{}, a);
}

struct SchedulerPolicy {
  // Forecast horizon consulted at each tick, in trace steps.
  std::size_t lead_window_steps = 12;
  // Time a migration must finish before the predicted loss. Negative means
  // "one trace step".
  double safety_margin_s = -1.0;
  // Steps a newly placed job must stay hostable for (covers the gap until
  // the next tick can react).
  std::size_t guard_steps = 2;
  bool progress_loss_on_blackout = false;
};

// Latest instant a migration may start and still finish `margin` before
// `power_loss_at_s`.
inline double plan_migration_deadline(double job_state_gb, int vm_count, const InterSiteLink& link,
                                      double power_loss_at_s, double safety_margin_s, double now_s) {
  if (!(safety_margin_s >= 0.0)) throw std::invalid_argument("safety margin must be >= 0");
  const double latest =
      power_loss_at_s - transfer_time(job_state_gb, link, vm_count) - safety_margin_s;
  if (latest < now_s)
    throw AlreadyLate("migration would have to start at " + std::to_string(latest) +
                      " s, before now (" + std::to_string(now_s) + " s)");
  return latest;
}

// Everything the scheduler reads besides the placement state.
struct SchedulerContext {
  std::vector<const Site*> sites;  // sorted by site id
  std::vector<InterSiteLink> links;
  std::map<std::string, Forecast> forecasts;
  SchedulerPolicy policy;

  const Site* site(const std::string& id) const {
    for (const Site* s : sites)
      if (s->id() == id) return s;
    return nullptr;
  }

  const InterSiteLink* link(const std::string& a, const std::string& b) const {
    for (const auto& l : links)
      if (l.connects(a, b)) return &l;
    return nullptr;
  }

  double step() const { return sites.empty() ? kDefaultStepSeconds : sites.front()->trace().step(); }

  double margin() const { return policy.safety_margin_s < 0.0 ? step() : policy.safety_margin_s; }
};

// A job with a 100% renewable target can never run if no configured trace
// ever offers an opportunity sample that lights a core.
inline void check_slo_satisfiable(const JobSpec& job, const std::vector<const Site*>& sites) {
  if (!job.slo.requires_full_renewable()) return;
  for (const Site* s : sites) {
    for (std::size_t i = 0; i < s->trace().size(); ++i)
      if (s->trace()[i].is_opportunity() && s->capacity_at_step(i).active_cores > 0) return;
  }
  throw InfeasibleSlo(job.job_id + ": no site ever offers opportunity power for a 100% renewable job");
}

namespace detail {

struct StepView {
  int cores = 0;
  double ram_gb = 0.0;
  bool opportunity = false;
  double carbon = 0.0;
  double price = 0.0;
};

// Predicted capacity of every site over the forecast horizon, plus the
// residents the plan so far places there.
class Projection {
 public:
  Projection(const PlacementState& state, const SchedulerContext& ctx) : ctx_(ctx) {
    for (const Site* s : ctx.sites) {
      auto& steps = views_[s->id()];
      auto it = ctx.forecasts.find(s->id());
      if (it == ctx.forecasts.end()) continue;
      const Forecast& f = it->second;
      for (std::size_t i = 0; i < f.steps(); ++i) {
        const SiteCapacity cap = s->capacity_for_power(f.predicted_mw[i]);
        steps.push_back({cap.active_cores, cap.ram_gb, static_cast<bool>(f.predicted_opportunity[i]),
                         f.predicted_carbon[i], f.predicted_price[i]});
      }
      issued_[s->id()] = f.issued_at_s;
      reaches_end_[s->id()] = f.time_of(f.steps()) >= s->trace().end();
    }
    for (const auto& [id, job] : state.jobs) {
      if (auto site = job.resident_site()) residents_[*site].insert(id);
    }
    state_ = &state;
  }

  const std::vector<StepView>& steps(const std::string& site) const {
    static const std::vector<StepView> empty;
    auto it = views_.find(site);
    return it == views_.end() ? empty : it->second;
  }

  double time_of(const std::string& site, std::size_t i) const {
    return issued_.at(site) + ctx_.step() * static_cast<double>(i);
  }

  const std::set<std::string>& residents(const std::string& site) const {
    static const std::set<std::string> empty;
    auto it = residents_.find(site);
    return it == residents_.end() ? empty : it->second;
  }

  void move(const std::string& job, const std::string& from, const std::string& to) {
    if (!from.empty()) residents_[from].erase(job);
    if (!to.empty()) residents_[to].insert(job);
  }

  double resident_ram(const std::string& site) const {
    double sum = 0.0;
    for (const auto& id : residents(site)) sum += state_->jobs.at(id).ram_gb();
    return sum;
  }

  bool reaches_end(const std::string& site) const {
    auto it = reaches_end_.find(site);
    return it != reaches_end_.end() && it->second;
  }

  // Whether `job` could join `site` and stay hostable for steps [0, n).
  // Steps past the end of the trace impose nothing.
  bool can_host(const std::string& site, const JobState& job, std::size_t n) const {
    const auto& st = steps(site);
    if (st.empty() || n == 0) return false;
    if (st.size() < n && !reaches_end_.at(site)) return false;
    const double ram = resident_ram(site) + job.ram_gb();
    const int count = static_cast<int>(residents(site).size()) + 1;
    for (std::size_t i = 0; i < std::min(n, st.size()); ++i) {
      if (!hostable(st[i], job, count, ram)) return false;
    }
    return true;
  }

  static bool hostable(const StepView& v, const JobState& job, int count, double ram) {
    return v.cores >= count && ram <= v.ram_gb && (!job.full_renewable() || v.opportunity);
  }

  // Consecutive steps from now that `site` could host `job`, capped at `cap`.
  std::size_t cover(const std::string& site, const JobState& job, std::size_t cap) const {
    const auto& st = steps(site);
    const double ram = resident_ram(site) + job.ram_gb();
    const int count = static_cast<int>(residents(site).size()) + 1;
    std::size_t n = 0;
    while (n < cap && n < st.size() && hostable(st[n], job, count, ram)) ++n;
    if (n == st.size() && reaches_end_.at(site)) n = cap;
    return n;
  }

  // Steps a site must stay hostable for a job arriving at `arrive_s`: up to
  // and including the step after arrival, so the next tick can react.
  std::size_t steps_through(const std::string& site, double arrive_s, std::size_t guard) const {
    const double rel = (arrive_s - issued_.at(site)) / ctx_.step();
    const auto a = static_cast<std::size_t>(std::max(0.0, std::floor(rel)));
    return std::max(guard, a + 2);
  }

  // Whether the site keeps at least one core lit over [t0, t1].
  bool powered_through(const std::string& site, double t0, double t1) const {
    const auto& st = steps(site);
    for (std::size_t i = 0; i < st.size(); ++i) {
      const double a = time_of(site, i);
      const double b = a + ctx_.step();
      if (b <= t0 || a > t1) continue;
      if (st[i].cores < 1) return false;
      if (i + 1 == st.size() && b < t1 && !reaches_end_.at(site)) return false;
    }
    return !st.empty();
  }

  double mean_carbon(const std::string& site, std::size_t n) const {
    const auto& st = steps(site);
    n = std::min(n, st.size());
    if (n == 0) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += st[i].carbon;
    return sum / static_cast<double>(n);
  }

  double mean_price(const std::string& site, std::size_t n) const {
    const auto& st = steps(site);
    n = std::min(n, st.size());
    if (n == 0) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += st[i].price;
    return sum / static_cast<double>(n);
  }

 private:
  const SchedulerContext& ctx_;
  const PlacementState* state_ = nullptr;
  std::map<std::string, std::vector<StepView>> views_;
  std::map<std::string, double> issued_;
  std::map<std::string, bool> reaches_end_;
  std::map<std::string, std::set<std::string>> residents_;
};

inline bool tier_allows(const JobState& job, const Site& from, const Site& to) {
  return job.spec->tier == Tier::premium || from.spec().iso_id == to.spec().iso_id;
}

// Steps of the horizon a job is expected to run at a given width.
inline std::size_t run_window_steps(const JobState& job, int width, double step) {
  const double secs = job.remaining_core_s / std::max(1, width);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(secs / step)));
}

struct Candidate {
  const Site* site = nullptr;
  std::size_t cover = 0;  // hostable steps of the run window, more is better
  double carbon = 0.0;
  double price = 0.0;
  double transfer_s = 0.0;
  double latest_start_s = 0.0;
};

inline bool better(const Candidate& a, const Candidate& b) {
  if (a.cover != b.cover) return a.cover > b.cover;
  if (a.carbon != b.carbon) return a.carbon < b.carbon;
  if (a.price != b.price) return a.price < b.price;
  return a.site->id() < b.site->id();
}

// First move of a job, scored by Lookahead.
struct Move {
  enum class Kind { wait, start, resume, stay, freeze, migrate };
  Kind kind = Kind::wait;
  std::string site;  // destination of start, resume and migrate
};

// Best progress one job can make before the end of the forecast horizon
// (or its deadline, if sooner) after a given first move, assuming it keeps
// its full width and the residents planned so far stay put. The search
// follows the same per-step rules the scheduler applies: guard steps on
// placement, evacuation before a loss, cold storage readable only while the
// home site is lit, and tier limits on moves.
class Lookahead {
 public:
  Lookahead(const Projection& proj, const SchedulerContext& ctx, const JobState& job, double t)
      : proj_(proj), ctx_(ctx), job_(job), t_(t) {
    for (const Site* s : ctx.sites) {
      sites_.push_back(s);
      horizon_ = std::max(horizon_, proj.steps(s->id()).size());
      const auto& res = proj.residents(s->id());
      const bool inside = res.count(job.id()) > 0;
      count_.push_back(static_cast<int>(res.size()) + (inside ? 0 : 1));
      ram_.push_back(proj.resident_ram(s->id()) + (inside ? 0.0 : job.ram_gb()));
    }
    horizon_ = std::max<std::size_t>(horizon_, 1);
  }

  double tolerance() const { return 1e-9 * std::max(1.0, job_.remaining_core_s); }

  double progress_after(const Move& first) const {
    const std::size_t S = sites_.size();
    const std::size_t L = 1 + 2 * S;
    const double step = ctx_.step();
    const double margin = ctx_.margin();
    const std::size_t guard = ctx_.policy.guard_steps;
    const int width = std::max(1, job_.demand_cores);
    const double work = job_.remaining_core_s;
    const double deadline = job_.spec->deadline_s;
    auto boundary = [&](std::size_t i) { return t_ + step * static_cast<double>(i); };
    auto index = [&](const std::string& id) {
      for (std::size_t s = 0; s < S; ++s)
        if (sites_[s]->id() == id) return s;
      return S;
    };
    auto host_range = [&](std::size_t s, std::size_t from, std::size_t n) {
      for (std::size_t k = from; k < from + n; ++k)
        if (!host(s, k)) return false;
      return true;
    };
    auto arrival_steps = [&](double tt) {
      return std::max(guard, static_cast<std::size_t>(std::floor(tt / step)) + 2);
    };
    auto link_time = [&](std::size_t a, std::size_t b) -> std::optional<double> {
      if (job_.spec->tier != Tier::premium && sites_[a]->spec().iso_id != sites_[b]->spec().iso_id)
        return std::nullopt;
      const InterSiteLink* link = ctx_.link(sites_[a]->id(), sites_[b]->id());
      if (!link) return std::nullopt;
      return transfer_time(job_.state_gb, *link, job_.vm_count);
    };

    std::vector<double> cur(L, -1.0), next(L, -1.0);
    if (job_.phase == JobPhase::queued) {
      cur[0] = 0.0;
    } else {
      const std::size_t h = index(job_.site);
      if (h == S) return 0.0;
      cur[job_.phase == JobPhase::frozen ? 1 + h : 1 + S + h] = 0.0;
    }
    double best = 0.0;
    auto keep = [&](std::size_t loc, double p) { next[loc] = std::max(next[loc], p); };
    auto run = [&](double p, std::size_t s, std::size_t i, double offset) {
      const double a = boundary(i) + offset;
      const double b = boundary(i + 1);
      const double useful = std::max(0.0, std::min(b, deadline) - a);
      const double q = p + width * useful;
      if (q >= work - tolerance() || b > deadline) {
        best = std::max(best, std::min(q, work));
        if (q >= work - tolerance()) return;
      }
      keep(1 + S + s, q);
    };
    auto allowed = [&](std::size_t i, Move::Kind kind, std::size_t s) {
      if (i > 0) return true;
      return first.kind == kind && (s == S || sites_[s]->id() == first.site);
    };

    for (std::size_t i = 0; i < horizon_; ++i) {
      std::fill(next.begin(), next.end(), -1.0);
      const double t = boundary(i);
      for (std::size_t loc = 0; loc < L; ++loc) {
        const double p = cur[loc];
        if (p < 0.0) continue;
        best = std::max(best, p);
        if (loc == 0) {
          if (allowed(i, Move::Kind::wait, S)) keep(0, p);
          for (std::size_t s = 0; s < S; ++s)
            if (allowed(i, Move::Kind::start, s) && host_range(s, i, guard)) run(p, s, i, 0.0);
        } else if (loc <= S) {
          const std::size_t f = loc - 1;
          if (allowed(i, Move::Kind::wait, S)) keep(loc, p);
          if (allowed(i, Move::Kind::resume, f) && host_range(f, i, guard)) run(p, f, i, 0.0);
          for (std::size_t s = 0; s < S; ++s) {
            if (s == f || !allowed(i, Move::Kind::resume, s)) continue;
            const auto tt = link_time(f, s);
            if (!tt) continue;
            bool source_ok = true;
            for (std::size_t k = i; boundary(k) <= t + *tt + margin && source_ok; ++k) source_ok = powered(f, k);
            if (source_ok && host_range(s, i, arrival_steps(*tt))) run(p, s, i, *tt);
          }
        } else {
          const std::size_t r = loc - 1 - S;
          if (allowed(i, Move::Kind::stay, S) && host(r, i + 1)) run(p, r, i, 0.0);
          if (allowed(i, Move::Kind::freeze, S)) keep(1 + r, p);
          for (std::size_t s = 0; s < S; ++s) {
            if (s == r || !allowed(i, Move::Kind::migrate, s)) continue;
            const auto tt = link_time(r, s);
            if (!tt) continue;
            bool source_ok = true;
            for (std::size_t k = i + 1; boundary(k) < t + *tt + margin && source_ok; ++k) source_ok = host(r, k);
            if (source_ok && host_range(s, i, arrival_steps(*tt))) run(p, s, i, *tt);
          }
        }
      }
      std::swap(cur, next);
    }
    for (double p : cur) best = std::max(best, p);
    return best;
  }

 private:
  // Unknown steps beyond the horizon are assumed usable.
  bool host(std::size_t s, std::size_t k) const {
    const auto& st = proj_.steps(sites_[s]->id());
    if (k >= st.size()) return true;
    return Projection::hostable(st[k], job_, count_[s], ram_[s]);
  }

  bool powered(std::size_t s, std::size_t k) const {
    const auto& st = proj_.steps(sites_[s]->id());
    return k >= st.size() || st[k].cores >= 1;
  }

  const Projection& proj_;
  const SchedulerContext& ctx_;
  const JobState& job_;
  double t_;
  std::vector<const Site*> sites_;
  std::vector<int> count_;
  std::vector<double> ram_;
  std::size_t horizon_ = 0;
};

inline std::optional<SchedulerAction> admit_with(const JobState& job, const SchedulerContext& ctx,
                                                 double t, const Projection& proj) {
  const std::size_t guard = ctx.policy.guard_steps;
  const Lookahead look(proj, ctx, job, t);
  std::optional<Candidate> best;
  double best_progress = -1.0;
  int best_width = 0;
  for (const Site* s : ctx.sites) {
    if (!proj.can_host(s->id(), job, guard)) continue;
    const auto& st = proj.steps(s->id());
    const int free_cores = st[0].cores - static_cast<int>(proj.residents(s->id()).size());
    const int width = std::max(1, std::min(job.demand_cores, free_cores));
    const std::size_t window = run_window_steps(job, width, ctx.step());
    Candidate c{s, 0, proj.mean_carbon(s->id(), window), proj.mean_price(s->id(), window), 0.0, t};
    const double progress = look.progress_after({Move::Kind::start, s->id()});
    const bool ahead = progress > best_progress + look.tolerance();
    const bool level = !ahead && progress >= best_progress - look.tolerance();
    if (!best || ahead || (level && better(c, *best))) {
      best = c;
      best_width = width;
      best_progress = std::max(best_progress, progress);
    }
  }
  if (!best) return std::nullopt;
  // Holding back pays when a site that lights up soon beats every start now.
  if (look.progress_after({Move::Kind::wait, ""}) > best_progress + look.tolerance()) return std::nullopt;
  return Start{job.id(), best->site->id(), best_width};
}

}  // namespace detail

// Places a newly arrived (or deferred) job at the hostable site with the
// lowest predicted carbon intensity over its estimated run window.
inline SchedulerAction admit(const JobState& job, const PlacementState& state,
                             const SchedulerContext& ctx, double t) {
  if (job.spec->arrival_s > t) throw std::invalid_argument(job.id() + ": admitted before arrival");
  check_slo_satisfiable(*job.spec, ctx.sites);
  detail::Projection proj(state, ctx);
  if (auto a = detail::admit_with(job, ctx, t, proj)) return *a;
  return Defer{job.id()};
}

// One scheduler tick. Returns actions in the order they should be applied.
inline std::vector<SchedulerAction> plan_step(const PlacementState& state, const SchedulerContext& ctx,
                                              double t) {
  using detail::Candidate;
  std::vector<SchedulerAction> actions;
  detail::Projection proj(state, ctx);
  const double step = ctx.step();
  const double margin = ctx.margin();
  const std::size_t guard = ctx.policy.guard_steps;

  // 1. Residents that lose their host within the horizon.
  struct Victim {
    const JobState* job;
    const Site* site;
    double loss_s;
  };
  std::vector<Victim> victims;
  for (const Site* s : ctx.sites) {
    std::vector<const JobState*> left;
    for (const auto& id : proj.residents(s->id())) {
      const JobState& j = state.jobs.at(id);
      if (j.phase == JobPhase::running) left.push_back(&j);
    }
    const auto& st = proj.steps(s->id());
    for (std::size_t i = 1; i < st.size() && !left.empty(); ++i) {
      const double loss = proj.time_of(s->id(), i);
      std::vector<const JobState*> keep;
      std::vector<const JobState*> lost;
      for (const JobState* j : left) {
        if (st[i].cores < 1 || (j->full_renewable() && !st[i].opportunity))
          lost.push_back(j);
        else
          keep.push_back(j);
      }
      // RAM shortfall: the most urgent jobs leave first.
      double ram = 0.0;
      for (const JobState* j : keep) ram += j->ram_gb();
      // Incoming migrations also hold RAM here.
      for (const auto& id : proj.residents(s->id())) {
        const JobState& j = state.jobs.at(id);
        if (j.phase == JobPhase::migrating) ram += j.ram_gb();
      }
      if (ram > st[i].ram_gb) {
        std::sort(keep.begin(), keep.end(), [&](const JobState* a, const JobState* b) {
          const double sa = a->slack(t), sb = b->slack(t);
          if (sa != sb) return sa < sb;
          return a->id() < b->id();
        });
        std::vector<const JobState*> stay;
        for (const JobState* j : keep) {
          if (ram > st[i].ram_gb) {
            lost.push_back(j);
            ram -= j->ram_gb();
          } else {
            stay.push_back(j);
          }
        }
        keep = std::move(stay);
      }
      for (const JobState* j : lost) victims.push_back({j, s, loss});
      left = std::move(keep);
    }
  }
  std::sort(victims.begin(), victims.end(), [&](const Victim& a, const Victim& b) {
    if (a.loss_s != b.loss_s) return a.loss_s < b.loss_s;
    const double sa = a.job->slack(t), sb = b.job->slack(t);
    if (sa != sb) return sa < sb;
    return a.job->id() < b.job->id();
  });

  for (const Victim& v : victims) {
    const JobState& job = *v.job;
    const detail::Lookahead look(proj, ctx, job, t);
    std::optional<Candidate> best;
    double best_progress = -1.0;
    for (const Site* target : ctx.sites) {
      if (target == v.site || !detail::tier_allows(job, *v.site, *target)) continue;
      const InterSiteLink* link = ctx.link(v.site->id(), target->id());
      if (!link) continue;
      const double tt = transfer_time(job.state_gb, *link, job.vm_count);
      if (!proj.can_host(target->id(), job, proj.steps_through(target->id(), t + tt, guard))) continue;
      double latest = 0.0;
      try {
        latest = plan_migration_deadline(job.state_gb, job.vm_count, *link, v.loss_s, margin, t);
      } catch (const AlreadyLate&) {
        continue;
      }
      const std::size_t window = detail::run_window_steps(job, job.demand_cores, step);
      Candidate c{target, proj.cover(target->id(), job, window), proj.mean_carbon(target->id(), window),
                  proj.mean_price(target->id(), window), tt, latest};
      const double progress = look.progress_after({detail::Move::Kind::migrate, target->id()});
      const bool ahead = progress > best_progress + look.tolerance();
      const bool level = !ahead && progress >= best_progress - look.tolerance();
      if (!best || ahead || (level && detail::better(c, *best))) {
        best = c;
        best_progress = std::max(best_progress, progress);
      }
    }
    const bool last_chance = v.loss_s <= t + step;
    // Staying, moving now and freezing now are compared on look-ahead
    // progress. Ties keep the job where it is until its migration deadline
    // or last chance, and prefer a move over a freeze.
    const double tol = look.tolerance();
    const double freeze = look.progress_after({detail::Move::Kind::freeze, ""});
    const double stay = last_chance ? -1.0 : look.progress_after({detail::Move::Kind::stay, ""});
    const double move = best ? best_progress : -1.0;
    const bool must_decide = last_chance || (best && best->latest_start_s < t + step);
    bool migrate = false;
    bool freeze_now = false;
    if (move > stay + tol || (best && must_decide && move >= stay - tol)) {
      migrate = move >= freeze - tol;
      freeze_now = !migrate;
    } else {
      freeze_now = last_chance || freeze > stay + tol;
    }
    if (migrate) {
      actions.push_back(Migrate{job.id(), v.site->id(), best->site->id(), t, best->transfer_s});
      proj.move(job.id(), v.site->id(), best->site->id());
    } else if (freeze_now) {
      actions.push_back(Freeze{job.id(), v.site->id()});
      proj.move(job.id(), v.site->id(), "");
    }
  }

  // 2. Frozen jobs: premium first, then FIFO.
  std::vector<const JobState*> frozen;
  for (const auto& [id, j] : state.jobs)
    if (j.phase == JobPhase::frozen) frozen.push_back(&j);
  std::sort(frozen.begin(), frozen.end(), [](const JobState* a, const JobState* b) {
    if (a->spec->tier != b->spec->tier) return a->spec->tier == Tier::premium;
    if (a->phase_since_s != b->phase_since_s) return a->phase_since_s < b->phase_since_s;
    return a->fifo < b->fifo;
  });
  for (const JobState* j : frozen) {
    const Site* home = ctx.site(j->site);
    if (!home) continue;
    const detail::Lookahead look(proj, ctx, *j, t);
    std::optional<Resume> pick;
    double pick_progress = -1.0;
    auto consider = [&](const Site* target, double tt) {
      const double progress = look.progress_after({detail::Move::Kind::resume, target->id()});
      if (!pick || progress > pick_progress + look.tolerance()) {
        pick = Resume{j->id(), target->id(), tt};
        pick_progress = progress;
      }
    };
    if (proj.can_host(home->id(), *j, guard)) consider(home, 0.0);
    for (const Site* target : ctx.sites) {
      if (target == home || !detail::tier_allows(*j, *home, *target)) continue;
      const InterSiteLink* link = ctx.link(home->id(), target->id());
      if (!link) continue;
      const double tt = transfer_time(j->state_gb, *link, j->vm_count);
      if (!proj.can_host(target->id(), *j, proj.steps_through(target->id(), t + tt, guard))) continue;
      // Cold storage is only readable while the home site is lit.
      if (!proj.powered_through(home->id(), t, t + tt + margin)) continue;
      consider(target, tt);
    }
    if (!pick) continue;
    if (look.progress_after({detail::Move::Kind::wait, ""}) > pick_progress + look.tolerance()) continue;
    actions.push_back(*pick);
    proj.move(j->id(), "", pick->site);
  }

  // 3. Queued jobs: premium first, then FIFO.
  std::vector<const JobState*> queued;
  for (const auto& [id, j] : state.jobs)
    if (j.phase == JobPhase::queued && j.spec->arrival_s <= t) queued.push_back(&j);
  std::sort(queued.begin(), queued.end(), [](const JobState* a, const JobState* b) {
    if (a->spec->tier != b->spec->tier) return a->spec->tier == Tier::premium;
    if (a->spec->arrival_s != b->spec->arrival_s) return a->spec->arrival_s < b->spec->arrival_s;
    return a->fifo < b->fifo;
  });
  for (const JobState* j : queued) {
    if (auto a = detail::admit_with(*j, ctx, t, proj)) {
      proj.move(j->id(), "", std::get<Start>(*a).site);
      actions.push_back(*a);
    }
  }
  return actions;
}

}  // namespace sundrop
