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

// Discrete-event simulation loop.
//
// Power changes only at trace steps, so a TraceStep and a SchedulerTick are
// queued at every step boundary. Between two consecutive events the core
// allocation is constant; each event first meters and attributes the energy
// of the elapsed segment, then applies its own transition, then re-checks
// capacity, re-allocates cores and logs one record.
//
// Metering: a compute server activated by the current plan draws idle watts
// plus per-core watts for each core actually running a task. RAM/flash nodes
// idle whenever the site is lit, and the fabric draws what it was scaled to.
// Whatever is not billed to a task lands in the site's overhead accounts.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sundrop/accounting.hpp"
#include "sundrop/detail/numfmt.hpp"
#include "sundrop/error.hpp"
#include "sundrop/forecast.hpp"
#include "sundrop/scenario.hpp"
#include "sundrop/scheduler.hpp"
#include "sundrop/site.hpp"
#include "sundrop/workload.hpp"

namespace sundrop {

enum class EventKind { trace_step, migration_complete, task_complete, job_arrival, scheduler_tick, sim_end };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::trace_step: return "TraceStep";
    case EventKind::migration_complete: return "MigrationComplete";
    case EventKind::task_complete: return "TaskComplete";
    case EventKind::job_arrival: return "JobArrival";
    case EventKind::scheduler_tick: return "SchedulerTick";
    case EventKind::sim_end: return "SimEnd";
  }
  return "?";
}

struct SimEvent {
  double time_s = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::trace_step;
  std::string job;
  std::uint64_t token = 0;
};

// Queue order: earliest first, then kind priority, then seq.
struct EventAfter {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time_s != b.time_s) return a.time_s > b.time_s;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct EventRecord {
  double time_s = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::trace_step;
  std::string payload;
};

struct SeriesRow {
  double time_s = 0.0;
  std::string site_id;
  double available_mw = 0.0;
  bool opportunity = false;
  int plan_cores = 0;
  int committed_cores = 0;
  double ram_gb = 0.0;
  double committed_ram_gb = 0.0;
  double usable_budget_w = 0.0;
  double watts_used = 0.0;
  double fabric_watts = 0.0;
};

struct SiteAccount {
  double metered_j = 0.0;
  double attributed_j = 0.0;
  double unhosted_idle_j = 0.0;
  double infra_idle_j = 0.0;
  double fabric_j = 0.0;
  EnergySplit metered;   // carbon and cost of everything drawn
  EnergySplit overhead;  // carbon and cost of the unattributed part
  double embodied_attributed_kg = 0.0;
  double embodied_unattributed_kg = 0.0;
  double powered_s = 0.0;
  double opportunity_s = 0.0;
  double task_core_seconds = 0.0;

  double overhead_j() const { return unhosted_idle_j + infra_idle_j + fabric_j; }
};

struct MigrationRecord {
  std::string job;
  std::string from;
  std::string to;
  double start_s = 0.0;
  double done_s = 0.0;
  bool from_cold_storage = false;
  bool completed = false;
  bool aborted = false;
};

struct Counters {
  int emergency_freezes = 0;
  int migrations_started = 0;
  int migrations_completed = 0;
  int migration_aborts = 0;
  int planned_freezes = 0;
  int resumes = 0;
  int kills = 0;
  int rejected = 0;
  int capacity_violations = 0;
  double lost_core_seconds = 0.0;
};

struct JobOutcome {
  JobSpec spec;
  JobPhase phase = JobPhase::queued;
  std::optional<double> completion_s;
  double consumed_core_seconds = 0.0;
  std::string note;
};

struct SimResult {
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<LedgerEntry> ledger;
  std::vector<EventRecord> events;
  std::vector<SeriesRow> series;
  std::map<std::string, SiteAccount> sites;
  std::vector<JobOutcome> jobs;  // in config order
  std::vector<MigrationRecord> migrations;
  Counters counters;
  std::vector<std::string> assumptions;
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    validate_scenario(cfg_);
    std::vector<SiteConfig> ordered = cfg_.sites;
    std::sort(ordered.begin(), ordered.end(),
              [](const SiteConfig& a, const SiteConfig& b) { return a.spec.site_id < b.spec.site_id; });
    for (const auto& sc : ordered) {
      sites_.push_back(std::make_unique<Site>(sc.spec, cfg_.traces.at(sc.spec.trace_ref)));
      methods_[sc.spec.site_id] = sc.forecast;
      result_.sites[sc.spec.site_id];
    }
    for (const auto& s : sites_) ctx_.sites.push_back(s.get());
    ctx_.links = cfg_.links;
    ctx_.policy = cfg_.policy;

    const PowerTrace& any = sites_.front()->trace();
    start_ = any.start();
    step_ = any.step();
    double span = std::numeric_limits<double>::infinity();
    for (const auto& s : sites_) span = std::min(span, s->trace().duration());
    if (cfg_.duration_s > 0.0) span = std::min(span, cfg_.duration_s);
    end_ = start_ + span;
    now_ = start_;
    result_.start_s = start_;
    result_.end_s = end_;
    result_.assumptions = default_assumptions();

    std::uint64_t fifo = 0;
    for (const auto& spec : cfg_.jobs) {
      JobRuntime rt;
      rt.topo = validate_dag(spec);
      for (const auto& t : spec.tasks) {
        auto& tr = rt.tasks[t.task_id];
        tr.spec = &t;
        tr.remaining = tr.snapshot = t.cpu_core_seconds;
      }
      JobState st;
      st.spec = &spec;
      st.phase = JobPhase::queued;
      st.fifo = fifo++;
      st.phase_since_s = spec.arrival_s;
      place_.jobs[spec.job_id] = st;
      runtime_[spec.job_id] = std::move(rt);
      refresh(spec.job_id);
    }
    for (const auto& s : sites_) place_.cold_used_gb[s->id()] = 0.0;

    for (std::size_t i = 0;; ++i) {
      const double t = boundary(i);
      if (t >= end_) break;
      push(t, EventKind::trace_step);
      push(t, EventKind::scheduler_tick);
    }
    for (const auto& spec : cfg_.jobs)
      if (spec.arrival_s < end_) push(std::max(spec.arrival_s, start_), EventKind::job_arrival, spec.job_id);
    push(end_, EventKind::sim_end);
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  bool finished() const noexcept { return finished_; }
  double now() const noexcept { return now_; }
  const PlacementState& placement() const noexcept { return place_; }
  const SimResult& result() const noexcept { return result_; }
  const std::vector<const Site*>& sites() const noexcept { return ctx_.sites; }

  // Pops and applies exactly one event. Stale completion events are dropped
  // without being logged.
  void step() {
    if (queue_.empty()) throw std::logic_error("event queue is empty");
    SimEvent ev = queue_.top();
    queue_.pop();
    if (ev.time_s < now_) throw TimeRegression("event at " + std::to_string(ev.time_s) + " s after " + std::to_string(now_) + " s");
    if (ev.kind == EventKind::task_complete && ev.token != completion_token_) return;
    if (ev.kind == EventKind::migration_complete && runtime_.at(ev.job).migration_token != ev.token) return;

    advance(ev.time_s);
    std::string payload;
    switch (ev.kind) {
      case EventKind::trace_step:
        payload = "step=" + std::to_string(step_index(now_));
        break;
      case EventKind::migration_complete: payload = on_migration_complete(ev.job); break;
      case EventKind::task_complete: payload = "completed=" + join(finished_tasks_); break;
      case EventKind::job_arrival: payload = on_arrival(ev.job); break;
      case EventKind::scheduler_tick: payload = on_tick(); break;
      case EventKind::sim_end: payload = on_end(); break;
    }
    if (ev.kind != EventKind::task_complete && !finished_tasks_.empty())
      payload += (payload.empty() ? "completed=" : ";completed=") + join(finished_tasks_);
    finished_tasks_.clear();
    if (!finished_) {
      std::string emergency = enforce_capacity();
      if (!emergency.empty()) payload += (payload.empty() ? "" : ";") + emergency;
      allocate();
      schedule_completion();
      record_series();
    }
    result_.events.push_back({now_, ev.seq, ev.kind, payload});
  }

  const SimResult& run() {
    while (!finished_) step();
    return result_;
  }

 private:
  struct TaskRuntime {
    const TaskSpec* spec = nullptr;
    double remaining = 0.0;
    double snapshot = 0.0;
    bool done = false;
    int cores = 0;
    std::vector<std::pair<std::size_t, int>> placement;  // (compute server index, cores)
  };

  struct JobRuntime {
    std::vector<std::string> topo;
    std::map<std::string, TaskRuntime> tasks;
    std::optional<double> completion_s;
    std::uint64_t migration_token = 0;
    std::size_t migration_record = 0;
    double consumed = 0.0;
    std::string note;
    std::set<std::string> completed() const {
      std::set<std::string> out;
      for (const auto& [id, t] : tasks)
        if (t.done) out.insert(id);
      return out;
    }
  };

  static std::vector<std::string> default_assumptions() {
    return {
        "Tasks can be frozen at any instant without losing completed core-seconds.",
        "Frozen jobs draw no power while in cold storage.",
        "Serverless cold-start cost on legacy hardware is modeled as zero.",
        "Network transfer energy between sites is not metered.",
        "RAM-dense and flash nodes idle whenever their site is lit.",
        "Fabric demand scales with activated compute cores.",
        "Opportunity energy carries zero grid carbon; job kgCO2e excludes embodied carbon, reported apart.",
        "Idle power of a server is billed to its tasks by core share; unhosted idle is site overhead.",
    };
  }

  static std::string join(const std::vector<std::string>& v, const char* sep = "|") {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += sep;
      out += s;
    }
    return out;
  }

  void push(double t, EventKind kind, std::string job = {}, std::uint64_t token = 0) {
    if (t < now_) throw TimeRegression("cannot schedule an event in the past");
    queue_.push(SimEvent{t, seq_++, kind, std::move(job), token});
  }

  double boundary(std::size_t i) const { return start_ + step_ * static_cast<double>(i); }

  // Same arithmetic as the queued step boundaries, so a boundary event maps
  // to the step it opens.
  std::size_t step_index(double t) const {
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor((t - start_) / step_)));
    while (i > 0 && boundary(i) > t) --i;
    while (boundary(i + 1) <= t) ++i;
    return i;
  }

  const Site& site(const std::string& id) const {
    for (const auto& s : sites_)
      if (s->id() == id) return *s;
    throw std::logic_error("unknown site '" + id + "'");
  }

  const SiteCapacity& capacity_now(const Site& s) const { return s.capacity_at_step(step_index(now_)); }
  const PowerSample& sample_now(const Site& s) const { return s.trace()[step_index(now_)]; }

  // Scheduler-visible fields derived from runtime progress.
  void refresh(const std::string& id) {
    JobState& st = place_.jobs.at(id);
    const JobRuntime& rt = runtime_.at(id);
    st.remaining_core_s = 0.0;
    st.state_gb = 0.0;
    st.vm_count = 0;
    for (const auto& [tid, t] : rt.tasks) {
      if (t.done) continue;
      st.remaining_core_s += t.remaining;
      st.state_gb += t.spec->state_gb;
      ++st.vm_count;
    }
    int demand = 0;
    for (const auto& tid : ready_tasks(*st.spec, rt.completed())) demand += st.spec->find_task(tid)->max_parallelism;
    st.demand_cores = std::max(1, demand);
  }

  // ----------------------------------------------------------------- metering

  void advance(double t1) {
    const double dt = t1 - now_;
    if (dt <= 0.0) {
      now_ = std::max(now_, t1);
      return;
    }
    for (const auto& sp : sites_) meter_site(*sp, now_, t1);
    for (auto& [id, rt] : runtime_) {
      bool progressed = false;
      for (auto& [tid, t] : rt.tasks) {
        if (t.cores <= 0 || t.done) continue;
        const double work = t.cores * dt;
        t.remaining -= work;
        rt.consumed += work;
        progressed = true;
      }
      if (progressed) refresh(id);
    }
    now_ = t1;
    detect_completions();
  }

  void meter_site(const Site& s, double t0, double t1) {
    const double dt = t1 - t0;
    SiteAccount& acct = result_.sites.at(s.id());
    const SiteCapacity& cap = s.capacity_at_step(step_index(t0));
    const PowerTrace& trace = s.trace();

    double infra_embodied_rate = 0.0;
    for (const auto& n : s.infra_servers()) infra_embodied_rate += embodied_rate(n);
    double compute_embodied_rate = 0.0;
    for (const auto& n : s.compute_servers()) compute_embodied_rate += embodied_rate(n);
    const double total_embodied = (infra_embodied_rate + compute_embodied_rate) * dt / 3600.0;
    double attributed_embodied = 0.0;

    if (!cap.powered) {
      acct.embodied_unattributed_kg += total_embodied;
      return;
    }
    acct.powered_s += dt;
    if (trace[step_index(t0)].is_opportunity()) acct.opportunity_s += dt;

    const auto& servers = s.compute_servers();
    std::vector<int> busy(servers.size(), 0);
    int site_busy = 0;
    struct Piece {
      std::string job;
      std::string task;
      std::size_t server;
      int cores;
    };
    std::vector<Piece> pieces;
    for (const auto& [jid, st] : place_.jobs) {
      if (st.phase != JobPhase::running || st.site != s.id()) continue;
      for (const auto& [tid, t] : runtime_.at(jid).tasks) {
        for (const auto& [idx, c] : t.placement) {
          busy[idx] += c;
          site_busy += c;
          pieces.push_back({jid, tid, idx, c});
        }
      }
    }

    double meter_w = cap.infra_watts + cap.fabric.fabric_watts;
    double unhosted_w = 0.0;
    for (std::size_t i = 0; i < servers.size(); ++i) {
      if (cap.plan.active_cores[i] == 0) continue;
      meter_w += servers[i].idle_watts + busy[i] * servers[i].per_core_watts;
      if (busy[i] == 0) unhosted_w += servers[i].idle_watts;
    }

    std::map<std::pair<std::string, std::string>, LedgerEntry> entries;
    for (const auto& p : pieces) {
      TaskRun run;
      run.job_id = p.job;
      run.task_id = p.task;
      run.t0 = t0;
      run.t1 = t1;
      run.active_cores = p.cores;
      run.server_busy_cores = busy[p.server];
      run.shared_embodied_kg_per_h = infra_embodied_rate * p.cores / site_busy;
      LedgerEntry e = attribute(run, servers[p.server], s.id(), trace);
      auto key = std::make_pair(p.job, p.task);
      auto it = entries.find(key);
      if (it == entries.end())
        entries.emplace(key, e);
      else
        merge_into(it->second, e);
    }
    for (auto& [key, e] : entries) {
      acct.attributed_j += e.op_energy_j;
      acct.task_core_seconds += e.active_cores * dt;
      attributed_embodied += e.embodied_kgco2e;
      append_ledger(std::move(e));
    }

    const double overhead_w = unhosted_w + cap.infra_watts + cap.fabric.fabric_watts;
    acct.metered_j += meter_w * dt;
    acct.unhosted_idle_j += unhosted_w * dt;
    acct.infra_idle_j += cap.infra_watts * dt;
    acct.fabric_j += cap.fabric.fabric_watts * dt;
    acct.metered += price_energy(trace, t0, t1, meter_w);
    if (overhead_w > 0.0) acct.overhead += price_energy(trace, t0, t1, overhead_w);
    acct.embodied_attributed_kg += attributed_embodied;
    acct.embodied_unattributed_kg += std::max(0.0, total_embodied - attributed_embodied);
  }

  // Extends the task's previous entry when nothing but time changed.
  void append_ledger(LedgerEntry e) {
    const auto key = std::make_pair(e.job_id, e.task_id);
    auto it = last_entry_.find(key);
    if (it != last_entry_.end()) {
      LedgerEntry& prev = result_.ledger[it->second];
      if (prev.site_id == e.site_id && prev.active_cores == e.active_cores && prev.t1 == e.t0) {
        prev.t1 = e.t1;
        prev.op_energy_j += e.op_energy_j;
        prev.embodied_kgco2e += e.embodied_kgco2e;
        prev.grid_carbon_kgco2e += e.grid_carbon_kgco2e;
        prev.opportunity_energy_j += e.opportunity_energy_j;
        prev.cost_usd += e.cost_usd;
        return;
      }
    }
    last_entry_[key] = result_.ledger.size();
    result_.ledger.push_back(std::move(e));
  }

  void detect_completions() {
    for (auto& [jid, rt] : runtime_) {
      JobState& st = place_.jobs.at(jid);
      if (st.phase != JobPhase::running) continue;
      bool any = false;
      for (auto& [tid, t] : rt.tasks) {
        if (t.done || t.cores <= 0) continue;
        const double tol = 1e-9 * std::max(1.0, t.spec->cpu_core_seconds);
        if (t.remaining <= tol || now_ + t.remaining / t.cores <= now_) {
          t.done = true;
          t.remaining = 0.0;
          t.cores = 0;
          t.placement.clear();
          finished_tasks_.push_back(jid + "/" + tid);
          any = true;
        }
      }
      if (!any) continue;
      refresh(jid);
      if (std::all_of(rt.tasks.begin(), rt.tasks.end(), [](const auto& kv) { return kv.second.done; })) {
        st.phase = JobPhase::done;
        st.phase_since_s = now_;
        rt.completion_s = now_;
        finished_tasks_.push_back("job:" + jid);
      }
    }
  }

  // --------------------------------------------------------------- transitions

  std::map<std::string, Forecast> forecasts_now() {
    const std::size_t idx = step_index(now_);
    if (forecast_step_ == idx && !forecasts_.empty()) return forecasts_;
    forecasts_.clear();
    for (const auto& s : sites_) {
      const PowerTrace& tr = s->trace();
      const std::size_t horizon = std::min(cfg_.policy.lead_window_steps, tr.size() - idx);
      ForecastMethod m = methods_.at(s->id());
      try {
        forecasts_[s->id()] = make_forecast(m, tr, now_, horizon);
      } catch (const InsufficientHistory&) {
        forecasts_[s->id()] = persistence_forecast(tr, now_, horizon);
      }
    }
    forecast_step_ = idx;
    return forecasts_;
  }

  SchedulerContext context() {
    SchedulerContext ctx = ctx_;
    ctx.forecasts = forecasts_now();
    return ctx;
  }

  std::string on_arrival(const std::string& id) {
    JobState& st = place_.jobs.at(id);
    st.phase_since_s = now_;
    try {
      SchedulerAction a = admit(st, place_, context(), now_);
      if (std::holds_alternative<Start>(a)) apply(a);
      return "job=" + id + ";" + describe(a);
    } catch (const InfeasibleSlo& e) {
      st.phase = JobPhase::rejected;
      runtime_.at(id).note = e.what();
      ++result_.counters.rejected;
      return "job=" + id + ";rejected";
    }
  }

  std::string on_tick() {
    for (auto& [id, rt] : runtime_)
      for (auto& [tid, t] : rt.tasks) t.snapshot = t.remaining;
    const auto actions = plan_step(place_, context(), now_);
    std::vector<std::string> parts;
    for (const auto& a : actions) parts.push_back(apply(a));
    return join(parts);
  }

  std::string on_end() {
    finished_ = true;
    while (!queue_.empty()) queue_.pop();
    for (const auto& spec : cfg_.jobs) {
      const JobState& st = place_.jobs.at(spec.job_id);
      JobRuntime& rt = runtime_.at(spec.job_id);
      JobOutcome out;
      out.spec = spec;
      out.phase = st.phase;
      out.completion_s = rt.completion_s;
      out.consumed_core_seconds = rt.consumed;
      out.note = rt.note;
      if (st.phase != JobPhase::done && out.note.empty()) out.note = "incomplete at end of simulation";
      result_.jobs.push_back(std::move(out));
    }
    int unfinished = 0;
    for (const auto& j : result_.jobs) unfinished += j.phase == JobPhase::done ? 0 : 1;
    return "unfinished=" + std::to_string(unfinished);
  }

  std::string apply(const SchedulerAction& action) {
    struct Visitor {
      Simulation& sim;
      std::string operator()(const Start& a) const { return sim.do_start(a); }
      std::string operator()(const Migrate& a) const { return sim.do_migrate(a); }
      std::string operator()(const Freeze& a) const { return sim.do_freeze(a.job, a.site, false); }
      std::string operator()(const Resume& a) const { return sim.do_resume(a); }
      std::string operator()(const Defer& a) const { return describe(SchedulerAction{a}); }
    };
    return std::visit(Visitor{*this}, action);
  }

  JobState& require(const std::string& job, JobPhase phase, const char* what) {
    JobState& st = place_.jobs.at(job);
    if (st.phase != phase)
      throw std::logic_error(std::string(what) + ": job '" + job + "' is " + std::string(to_string(st.phase)));
    return st;
  }

  std::string do_start(const Start& a) {
    JobState& st = require(a.job, JobPhase::queued, "start");
    site(a.site);
    st.phase = JobPhase::running;
    st.site = a.site;
    st.phase_since_s = now_;
    return describe(SchedulerAction{a});
  }

  const InterSiteLink& link(const std::string& a, const std::string& b) const {
    const InterSiteLink* l = ctx_.link(a, b);
    if (!l) throw std::logic_error("no link between '" + a + "' and '" + b + "'");
    return *l;
  }

  std::string begin_migration(JobState& st, const std::string& from, const std::string& to, bool cold) {
    const double tt = transfer_time(st.state_gb, link(from, to), st.vm_count);
    JobRuntime& rt = runtime_.at(st.id());
    st.phase = JobPhase::migrating;
    st.site = from;
    st.target = to;
    st.resuming = cold;
    st.migration_done_s = now_ + tt;
    st.phase_since_s = now_;
    drop_allocation(rt);
    rt.migration_token = ++token_counter_;
    rt.migration_record = result_.migrations.size();
    result_.migrations.push_back({st.id(), from, to, now_, now_ + tt, cold, false, false});
    ++result_.counters.migrations_started;
    push(now_ + tt, EventKind::migration_complete, st.id(), rt.migration_token);
    return "transfer_s=" + detail::format_double(tt);
  }

  std::string do_migrate(const Migrate& a) {
    JobState& st = require(a.job, JobPhase::running, "migrate");
    if (st.site != a.from) throw std::logic_error("migrate: job '" + a.job + "' does not run at '" + a.from + "'");
    return describe(SchedulerAction{a}) + " " + begin_migration(st, a.from, a.to, false);
  }

  std::string do_resume(const Resume& a) {
    JobState& st = require(a.job, JobPhase::frozen, "resume");
    place_.cold_used_gb[st.site] -= st.state_gb;
    ++result_.counters.resumes;
    if (a.site == st.site) {
      st.phase = JobPhase::running;
      st.phase_since_s = now_;
      return describe(SchedulerAction{a});
    }
    const std::string home = st.site;
    return describe(SchedulerAction{a}) + " " + begin_migration(st, home, a.site, true);
  }

  void drop_allocation(JobRuntime& rt) {
    for (auto& [tid, t] : rt.tasks) {
      t.cores = 0;
      t.placement.clear();
    }
  }

  // Moves a job into the cold storage of `at`, killing it if that overflows.
  std::string do_freeze(const std::string& job, const std::string& at, bool emergency) {
    JobState& st = place_.jobs.at(job);
    JobRuntime& rt = runtime_.at(job);
    if (!emergency) require(job, JobPhase::running, "freeze");
    drop_allocation(rt);
    std::string out = std::string(emergency ? "emergency_freeze" : "freeze") + " job=" + job + " site=" + at;
    if (emergency) {
      ++result_.counters.emergency_freezes;
      if (cfg_.policy.progress_loss_on_blackout) {
        for (auto& [tid, t] : rt.tasks) {
          if (t.done) continue;
          result_.counters.lost_core_seconds += t.snapshot - t.remaining;
          t.remaining = t.snapshot;
        }
        refresh(job);
      }
    } else {
      ++result_.counters.planned_freezes;
    }
    const Site& s = site(at);
    if (place_.cold_used_gb[at] + st.state_gb > s.spec().cold_storage_gb + 1e-9) {
      st.phase = JobPhase::killed;
      st.phase_since_s = now_;
      rt.note = ColdStorageFull("cold storage at '" + at + "' cannot hold job '" + job + "'").what();
      ++result_.counters.kills;
      return out + " killed=cold_storage_full";
    }
    place_.cold_used_gb[at] += st.state_gb;
    st.phase = JobPhase::frozen;
    st.site = at;
    st.target.clear();
    st.phase_since_s = now_;
    return out;
  }

  bool hostable_now(const Site& s, const JobState& st, double extra_ram) const {
    const SiteCapacity& cap = capacity_now(s);
    if (!cap.powered) return false;
    if (st.full_renewable() && !sample_now(s).is_opportunity()) return false;
    return resident_ram(s.id()) + extra_ram <= cap.ram_gb;
  }

  double resident_ram(const std::string& site_id) const {
    double ram = 0.0;
    for (const auto& [id, st] : place_.jobs)
      if (st.phase == JobPhase::running && st.site == site_id) ram += st.ram_gb();
    return ram;
  }

  std::string on_migration_complete(const std::string& job) {
    JobState& st = require(job, JobPhase::migrating, "migration complete");
    JobRuntime& rt = runtime_.at(job);
    MigrationRecord& rec = result_.migrations.at(rt.migration_record);
    rec.completed = true;
    ++result_.counters.migrations_completed;
    rt.migration_token = 0;
    const Site& target = site(st.target);
    const std::string from = st.site;
    std::string out = "job=" + job + " from=" + from + " to=" + st.target;
    if (!hostable_now(target, st, st.ram_gb())) return out + ";" + do_freeze(job, target.id(), true);
    st.phase = JobPhase::running;
    st.site = target.id();
    st.target.clear();
    st.resuming = false;
    st.phase_since_s = now_;
    return out;
  }

  // Freezes whatever the current step can no longer host.
  std::string enforce_capacity() {
    std::vector<std::string> parts;
    for (const auto& sp : sites_) {
      const Site& s = *sp;
      const SiteCapacity& cap = capacity_now(s);
      const bool opp = sample_now(s).is_opportunity();

      // In-flight transfers need their source lit.
      for (auto& [id, st] : place_.jobs) {
        if (st.phase != JobPhase::migrating || st.site != s.id() || cap.powered) continue;
        JobRuntime& rt = runtime_.at(id);
        result_.migrations.at(rt.migration_record).aborted = true;
        result_.migrations.at(rt.migration_record).done_s = now_;
        rt.migration_token = 0;
        ++result_.counters.migration_aborts;
        parts.push_back("abort_migration job=" + id);
        parts.push_back(do_freeze(id, s.id(), true));
      }

      std::vector<JobState*> residents;
      for (auto& [id, st] : place_.jobs)
        if (st.phase == JobPhase::running && st.site == s.id()) residents.push_back(&st);
      std::vector<JobState*> keep;
      for (JobState* st : residents) {
        if (!cap.powered || (st->full_renewable() && !opp))
          parts.push_back(do_freeze(st->id(), s.id(), true));
        else
          keep.push_back(st);
      }
      double ram = 0.0;
      for (JobState* st : keep) ram += st->ram_gb();
      if (ram > cap.ram_gb) {
        std::sort(keep.begin(), keep.end(), [&](const JobState* a, const JobState* b) {
          const double sa = a->slack(now_), sb = b->slack(now_);
          if (sa != sb) return sa > sb;
          return a->id() < b->id();
        });
        for (JobState* st : keep) {
          if (ram <= cap.ram_gb) break;
          ram -= st->ram_gb();
          parts.push_back(do_freeze(st->id(), s.id(), true));
        }
      }
    }
    return join(parts);
  }

  // -------------------------------------------------------------- allocation

  // Integer max-min fair split of the site's cores across resident jobs,
  // then across each job's ready tasks in topological order, then onto the
  // activated servers in server_id order.
  void allocate() {
    for (auto& [id, rt] : runtime_) drop_allocation(rt);
    for (const auto& sp : sites_) {
      const Site& s = *sp;
      const SiteCapacity& cap = capacity_now(s);
      if (!cap.powered) continue;
      std::vector<JobState*> residents;
      for (auto& [id, st] : place_.jobs)
        if (st.phase == JobPhase::running && st.site == s.id()) residents.push_back(&st);
      std::sort(residents.begin(), residents.end(), [](const JobState* a, const JobState* b) {
        if (a->spec->tier != b->spec->tier) return a->spec->tier == Tier::premium;
        return a->fifo < b->fifo;
      });

      std::vector<int> need(residents.size()), give(residents.size(), 0);
      for (std::size_t i = 0; i < residents.size(); ++i) need[i] = residents[i]->demand_cores;
      int left = cap.active_cores;
      while (left > 0) {
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < residents.size(); ++i)
          if (give[i] < need[i]) open.push_back(i);
        if (open.empty()) break;
        const int share = left / static_cast<int>(open.size());
        if (share == 0) {
          for (std::size_t k = 0; k < open.size() && left > 0; ++k, --left) ++give[open[k]];
          break;
        }
        for (std::size_t i : open) {
          const int g = std::min(share, need[i] - give[i]);
          give[i] += g;
          left -= g;
        }
      }

      std::vector<int> free = cap.plan.active_cores;
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < residents.size(); ++i) {
        JobRuntime& rt = runtime_.at(residents[i]->id());
        const auto completed = rt.completed();
        const auto ready = ready_tasks(*residents[i]->spec, completed);
        const std::set<std::string> ready_set(ready.begin(), ready.end());
        int budget = give[i];
        for (const auto& tid : rt.topo) {
          if (budget == 0) break;
          if (!ready_set.count(tid)) continue;
          TaskRuntime& t = rt.tasks.at(tid);
          int want = std::min(budget, t.spec->max_parallelism);
          budget -= want;
          t.cores = want;
          while (want > 0) {
            while (cursor < free.size() && free[cursor] == 0) ++cursor;
            if (cursor == free.size()) throw std::logic_error("allocation exceeds the activation plan");
            const int c = std::min(want, free[cursor]);
            free[cursor] -= c;
            want -= c;
            t.placement.emplace_back(cursor, c);
          }
        }
      }
    }
  }

  void schedule_completion() {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, rt] : runtime_)
      for (const auto& [tid, t] : rt.tasks)
        if (!t.done && t.cores > 0) best = std::min(best, now_ + t.remaining / t.cores);
    ++completion_token_;
    if (best < end_) push(best, EventKind::task_complete, {}, completion_token_);
  }

  void record_series() {
    for (const auto& sp : sites_) {
      const Site& s = *sp;
      const SiteCapacity& cap = capacity_now(s);
      const PowerSample& sample = sample_now(s);
      SeriesRow row;
      row.time_s = now_;
      row.site_id = s.id();
      row.available_mw = sample.available_mw;
      row.opportunity = sample.is_opportunity();
      row.plan_cores = cap.active_cores;
      row.ram_gb = cap.ram_gb;
      row.usable_budget_w = cap.usable_budget_w;
      row.fabric_watts = cap.fabric.fabric_watts;
      std::vector<int> busy(s.compute_servers().size(), 0);
      for (const auto& [id, st] : place_.jobs) {
        if (st.phase != JobPhase::running || st.site != s.id()) continue;
        row.committed_ram_gb += st.ram_gb();
        for (const auto& [tid, t] : runtime_.at(id).tasks) {
          row.committed_cores += t.cores;
          for (const auto& [idx, c] : t.placement) busy[idx] += c;
        }
      }
      if (cap.powered) {
        row.watts_used = cap.infra_watts;
        for (std::size_t i = 0; i < busy.size(); ++i) {
          if (cap.plan.active_cores[i] == 0) continue;
          const auto& srv = s.compute_servers()[i];
          row.watts_used += srv.idle_watts + busy[i] * srv.per_core_watts;
        }
      }
      if (row.committed_cores > row.plan_cores || row.watts_used > row.usable_budget_w * (1 + 1e-12))
        ++result_.counters.capacity_violations;
      auto [it, fresh] = series_row_.try_emplace(s.id(), result_.series.size());
      if (!fresh && result_.series[it->second].time_s == now_) {
        result_.series[it->second] = std::move(row);
      } else {
        it->second = result_.series.size();
        result_.series.push_back(std::move(row));
      }
    }
  }

  ScenarioConfig cfg_;
  std::map<std::string, std::size_t> series_row_;  // latest series row per site
  std::vector<std::unique_ptr<Site>> sites_;
  std::map<std::string, ForecastMethod> methods_;
  SchedulerContext ctx_;
  PlacementState place_;
  std::map<std::string, JobRuntime> runtime_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t completion_token_ = 0;
  std::uint64_t token_counter_ = 0;
  double start_ = 0.0;
  double step_ = kDefaultStepSeconds;
  double end_ = 0.0;
  double now_ = 0.0;
  bool finished_ = false;
  std::vector<std::string> finished_tasks_;
  std::map<std::pair<std::string, std::string>, std::size_t> last_entry_;
  std::map<std::string, Forecast> forecasts_;
  std::size_t forecast_step_ = static_cast<std::size_t>(-1);
  SimResult result_;
};

inline SimResult run(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

}  // namespace sundrop
