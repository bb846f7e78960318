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

// Site, siting, accounting and scheduler.

#include <cmath>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <gtest/gtest.h>

#include "sundrop/accounting.hpp"
#include "sundrop/scheduler.hpp"
#include "sundrop/site.hpp"
#include "sundrop/siting.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace sundrop {
namespace {

PowerSample opp(double mw) { return {mw, -1.0, 400.0, true}; }
PowerSample grid(double mw, double carbon = 400.0, double price = 40.0) { return {mw, price, carbon, false}; }

std::shared_ptr<const PowerTrace> shared_trace(const std::string& id, std::vector<PowerSample> s,
                                               double step = 300.0) {
  return std::make_shared<const PowerTrace>(id, 0.0, step, std::move(s));
}

ServerSpec legacy(const std::string& id, int cores, double idle, double per_core, double ram = 0.0) {
  ServerSpec s;
  s.server_id = id;
  s.core_count = cores;
  s.idle_watts = idle;
  s.per_core_watts = per_core;
  s.ram_gb = ram;
  return s;
}

SiteSpec bare_site(const std::string& id, std::vector<ServerSpec> servers, const std::string& iso = "iso") {
  SiteSpec s;
  s.site_id = id;
  s.iso_id = iso;
  s.servers = std::move(servers);
  s.overhead_fraction = 0.0;
  s.trace_ref = id;
  s.cold_storage_gb = 1000.0;
  return s;
}

// ------------------------------------------------------------------- site

TEST(Site, UsableBudget) {
  auto spec = bare_site("a", {legacy("s", 4, 10, 5)});
  spec.overhead_fraction = 0.1;
  const auto t = shared_trace("a", {grid(1.0), grid(0.0)});
  EXPECT_NEAR(usable_budget(spec, *t, 0.0, 50e3), 850e3, 1e-6);
  EXPECT_EQ(usable_budget(spec, *t, 300.0, 50e3), 0.0);
  spec.overhead_fraction = 0.0;
  EXPECT_DOUBLE_EQ(usable_budget(spec, *t, 0.0, 0.0), 1e6);
  EXPECT_THROW(usable_budget(spec, *t, 600.0, 0.0), OutOfRange);
}

TEST(Site, CapacityExamples) {
  const std::vector<ServerSpec> three{legacy("a", 8, 100, 10, 16), legacy("b", 8, 100, 10, 16),
                                      legacy("c", 8, 100, 10, 16)};
  const Site site(bare_site("x", three), shared_trace("x", {grid(0.0), grid(500e-6), grid(540e-6)}));
  const auto& off = site.capacity_at(0.0);
  EXPECT_EQ(off.active_cores, 0);
  EXPECT_EQ(off.ram_gb, 0.0);
  EXPECT_EQ(off.watts_used, 0.0);
  EXPECT_EQ(site.capacity_at(300.0).active_cores, 20);
  const auto& full = site.capacity_at(600.0);
  EXPECT_EQ(full.active_cores, 24);
  EXPECT_EQ(full.ram_gb, 48.0);
}

TEST(Site, RamNodesComeOffTheBudgetFirst) {
  ServerSpec ram;
  ram.server_id = "ram";
  ram.role = ServerRole::ram_dense;
  ram.idle_watts = 200.0;
  ram.ram_gb = 512.0;
  const Site site(bare_site("x", {legacy("a", 8, 0, 10, 8), ram}), shared_trace("x", {grid(250e-6)}));
  const auto& cap = site.capacity_at(0.0);
  EXPECT_EQ(cap.active_cores, 5);
  EXPECT_EQ(cap.ram_gb, 520.0);
  EXPECT_LE(cap.watts_used, cap.usable_budget_w);
}

TEST(Site, MonotoneInPowerAndWithinBudget) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    testgen::Rng r(seed);
    std::vector<ServerSpec> servers;
    for (int i = 0; i < r.integer(1, 6); ++i) servers.push_back(testgen::compute_server(r, "c" + std::to_string(i)));
    if (r.chance(0.5)) servers.push_back(testgen::infra_server(r, "i0"));
    auto spec = bare_site("s", servers);
    spec.overhead_fraction = r.uniform(0.0, 0.3);
    spec.fabric.switch_count = 4;
    spec.fabric.watts_per_switch = r.uniform(0.0, 100.0);
    spec.fabric.gbps_per_switch = 100.0;
    spec.fabric_gbps_per_core = r.uniform(0.0, 5.0);
    const Site site(spec, shared_trace("s", {grid(1.0)}));
    int prev = 0;
    for (int k = 0; k <= 80; ++k) {
      const auto cap = site.capacity_for_power(k * 1e-4);
      EXPECT_GE(cap.active_cores, prev);
      EXPECT_LE(cap.watts_used, cap.usable_budget_w + 1e-9);
      prev = cap.active_cores;
    }
  }
}

TEST(Site, SpillFeasible) {
  ServerSpec ram;
  ram.server_id = "ram";
  ram.role = ServerRole::ram_dense;
  ram.nic_gbps = {100.0};
  auto spec = bare_site("x", {legacy("a", 2, 0, 1), ram});
  spec.spill_gbps_per_server = 25.0;
  const Site site(spec, shared_trace("x", {grid(1.0)}));
  EXPECT_TRUE(site.spill_feasible(4));
  EXPECT_FALSE(site.spill_feasible(5));
}

TEST(Site, Validation) {
  EXPECT_THROW(Site(bare_site("x", {}), shared_trace("x", {grid(1.0)})), std::invalid_argument);
  auto dup = bare_site("x", {legacy("a", 1, 0, 1), legacy("a", 1, 0, 1)});
  EXPECT_THROW(Site(dup, shared_trace("x", {grid(1.0)})), std::invalid_argument);
  auto bad = bare_site("x", {legacy("a", 1, 0, 1)});
  bad.overhead_fraction = 1.0;
  EXPECT_THROW(Site(bad, shared_trace("x", {grid(1.0)})), std::invalid_argument);
}

// ----------------------------------------------------------------- siting

CandidateSite candidate(const std::string& id, std::vector<PowerSample> s) {
  return make_candidate(id, PowerTrace(id, 0.0, 300.0, std::move(s)));
}

TEST(Siting, DutyFactor) {
  EXPECT_EQ(duty_factor(PowerTrace("a", 0, 300, {opp(1), opp(2), opp(3)}), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(duty_factor(synth_solar(50.0, 21600.0, 64800.0, 300.0, 1), 0.0), 0.5);
  SolarParams caiso;
  caiso.sunrise_s = 43200.0 - 1.65 * 3600.0;
  caiso.sunset_s = 43200.0 + 1.65 * 3600.0;
  EXPECT_NEAR(duty_factor(synth_solar(caiso), 0.0), 0.1375, 0.01);
  EXPECT_THROW(duty_factor(PowerTrace("a", 0, 300, {opp(1)}), -1.0), std::invalid_argument);
}

TEST(Siting, ComplementaryPair) {
  std::vector<PowerSample> a, b;
  for (int i = 0; i < 8; ++i) {
    a.push_back(i % 2 ? opp(5) : grid(5));
    b.push_back(i % 2 ? grid(5) : opp(5));
  }
  const std::vector<CandidateSite> c{candidate("a", a), candidate("b", b)};
  const auto r = greedy_siting(c, 2, 0.0);
  EXPECT_EQ(r.coverage, 1.0);
  EXPECT_EQ(r.chosen, (std::vector<std::string>{"a", "b"}));
}

TEST(Siting, TieBreakByLocationId) {
  std::vector<PowerSample> s{opp(5), grid(5)};
  const std::vector<CandidateSite> c{candidate("zeta", s), candidate("alpha", s)};
  EXPECT_EQ(greedy_siting(c, 1, 0.0).chosen, (std::vector<std::string>{"alpha"}));
}

TEST(Siting, AllCandidatesGiveUnion) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = testgen::random_candidates(seed, 5);
    std::vector<PowerTrace> ts;
    for (const auto& x : c) ts.push_back(x.trace);
    EXPECT_DOUBLE_EQ(greedy_siting(c, 5, 10.0).coverage, union_coverage(ts, 10.0));
  }
}

TEST(Siting, MatchesExhaustiveAndMonotoneInK) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    const auto c = testgen::random_candidates(seed, n);
    for (auto obj : {SitingObjective::time_coverage, SitingObjective::energy}) {
      double prev = -1.0;
      for (int k = 1; k <= n; ++k) {
        const auto r = greedy_siting(c, k, 8.0, obj);
        EXPECT_NEAR(r.objective, oracle::best_subset_objective(c, k, 8.0, obj), 1e-12);
        const double cov = greedy_siting(c, k, 8.0).coverage;
        EXPECT_GE(cov, prev);
        prev = cov;
      }
    }
  }
}

TEST(Siting, LargeInstanceWithinGreedyBound) {
  const auto c = testgen::random_candidates(99, 24);
  const auto r = greedy_siting(c, 4, 5.0);
  const double opt = oracle::best_subset_objective(c, 4, 5.0, SitingObjective::time_coverage);
  EXPECT_GE(r.objective, (1.0 - 1.0 / std::exp(1.0)) * opt - 1e-12);
  EXPECT_LE(r.objective, opt + 1e-12);
}

TEST(Siting, Errors) {
  const auto c = testgen::random_candidates(1, 3);
  EXPECT_THROW(greedy_siting(c, 0, 0.0), std::invalid_argument);
  EXPECT_THROW(greedy_siting(c, 4, 0.0), std::invalid_argument);
  std::vector<CandidateSite> mixed = c;
  mixed.push_back(candidate("short", {opp(1)}));
  EXPECT_THROW(greedy_siting(mixed, 2, 0.0), MisalignedTraces);
}

// ------------------------------------------------------------- accounting

TEST(Accounting, SoleTaskOnOpportunityPower) {
  const PowerTrace t("a", 0.0, 300.0, std::vector<PowerSample>(12, opp(1.0)));
  const auto e = attribute({"j", "t", 0.0, 3600.0, 2, 2, 0.0}, legacy("s", 8, 0, 10), "a", t);
  EXPECT_DOUBLE_EQ(e.op_energy_j, 2 * 10.0 * 3600.0);
  EXPECT_DOUBLE_EQ(e.opportunity_energy_j, e.op_energy_j);
  EXPECT_EQ(e.grid_carbon_kgco2e, 0.0);
  EXPECT_EQ(e.embodied_kgco2e, 0.0);
}

TEST(Accounting, GridCarbonAndNegativePrice) {
  const PowerTrace g("a", 0.0, 300.0, std::vector<PowerSample>(12, grid(1.0, 400.0, 50.0)));
  const auto e = attribute({"j", "t", 0.0, 3600.0, 1, 1, 0.0}, legacy("s", 8, 0, 1000), "a", g);
  EXPECT_NEAR(e.grid_carbon_kgco2e, 0.4, 1e-12);  // 1 kWh at 400 g/kWh
  EXPECT_NEAR(e.cost_usd, 0.05, 1e-12);
  const PowerTrace paid("a", 0.0, 300.0, std::vector<PowerSample>(12, grid(1.0, 400.0, -5.0)));
  const auto p = attribute({"j", "t", 0.0, 3600.0, 1, 1, 0.0}, legacy("s", 8, 0, 1000), "a", paid);
  EXPECT_LT(p.cost_usd, 0.0);
  EXPECT_EQ(p.grid_carbon_kgco2e, 0.0);
}

TEST(Accounting, IdleSharedByCores) {
  const PowerTrace t("a", 0.0, 300.0, std::vector<PowerSample>(4, opp(1.0)));
  const auto s = legacy("s", 8, 90, 10);
  const auto a = attribute({"j", "a", 0.0, 100.0, 1, 3, 0.0}, s, "a", t);
  const auto b = attribute({"k", "b", 0.0, 100.0, 2, 3, 0.0}, s, "a", t);
  EXPECT_DOUBLE_EQ(a.op_energy_j, (10.0 + 30.0) * 100.0);
  EXPECT_DOUBLE_EQ(b.op_energy_j, (20.0 + 60.0) * 100.0);
  EXPECT_DOUBLE_EQ(a.op_energy_j + b.op_energy_j, power_draw(s, 3, true) * 100.0);
  EXPECT_THROW(attribute({"j", "a", 0.0, 100.0, 4, 3, 0.0}, s, "a", t), std::invalid_argument);
  EXPECT_THROW(attribute({"j", "a", 0.0, 2000.0, 1, 1, 0.0}, s, "a", t), OutOfRange);
}

TEST(Accounting, EmbodiedShare) {
  ServerSpec ram;
  ram.server_id = "r";
  ram.role = ServerRole::ram_dense;
  ram.core_count = 4;
  ram.embodied_kgco2e = 876.0;
  ram.amortization_hours = 8760.0;
  const PowerTrace t("a", 0.0, 300.0, std::vector<PowerSample>(24, opp(1.0)));
  const auto e = attribute({"j", "t", 0.0, 7200.0, 1, 2, 0.0}, ram, "a", t);
  EXPECT_NEAR(e.embodied_kgco2e, 0.1 * 0.5 * 2.0, 1e-12);
}

TEST(Accounting, SplittingIsAdditive) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    testgen::Rng r(seed);
    const auto t = testgen::blocky_trace(r, "a", 40, 300.0, 0.1, 5.0, 0.2, 0.5);
    const auto s = legacy("s", 16, r.uniform(0, 100), r.uniform(1, 20));
    const double t0 = r.uniform(0, 5000), t1 = t0 + r.uniform(1, 6000);
    const double cut = r.uniform(t0 + 1e-3, t1 - 1e-3);
    const TaskRun whole{"j", "t", t0, t1, 3, 5, 0.01};
    TaskRun left = whole, right = whole;
    left.t1 = cut;
    right.t0 = cut;
    const auto w = attribute(whole, s, "a", t);
    auto parts = attribute(left, s, "a", t);
    const auto rp = attribute(right, s, "a", t);
    parts.op_energy_j += rp.op_energy_j;
    parts.opportunity_energy_j += rp.opportunity_energy_j;
    parts.grid_carbon_kgco2e += rp.grid_carbon_kgco2e;
    parts.cost_usd += rp.cost_usd;
    parts.embodied_kgco2e += rp.embodied_kgco2e;
    auto rel = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    EXPECT_TRUE(rel(parts.op_energy_j, w.op_energy_j));
    EXPECT_TRUE(rel(parts.opportunity_energy_j, w.opportunity_energy_j));
    EXPECT_TRUE(rel(parts.grid_carbon_kgco2e, w.grid_carbon_kgco2e));
    EXPECT_TRUE(rel(parts.cost_usd, w.cost_usd));
    EXPECT_TRUE(rel(parts.embodied_kgco2e, w.embodied_kgco2e));
    EXPECT_GE(w.op_energy_j, w.opportunity_energy_j);
  }
}

JobSpec one_task_job(const std::string& id, double core_s, double deadline, double x = 0.0) {
  JobSpec j;
  j.job_id = id;
  j.tasks.push_back({"t", core_s, 0.0, 0.0, 1});
  j.deadline_s = deadline;
  j.slo.min_renewable_fraction = x;
  return j;
}

TEST(Accounting, Summaries) {
  const auto full = one_task_job("j", 10, 100, 1.0);
  const std::vector<LedgerEntry> clean{{"j", "t", "a", 0, 10, 1, 500.0, 0.0, 0.0, 500.0, 0.0}};
  const auto s = summarize(full, clean, 10.0);
  EXPECT_EQ(s.renewable_fraction, 1.0);
  EXPECT_TRUE(s.slo_pass);
  EXPECT_EQ(s.kgco2e, 0.0);

  const auto mostly = one_task_job("j", 10, 100, 0.9);
  const std::vector<LedgerEntry> half{{"j", "t", "a", 0, 5, 1, 3.6e6, 0.0, 0.0, 3.6e6, 0.0},
                                      {"j", "t", "a", 5, 10, 1, 3.6e6, 0.0, 0.4, 0.0, 0.0}};
  const auto h = summarize(mostly, half, 10.0);
  EXPECT_DOUBLE_EQ(h.renewable_fraction, 0.5);
  EXPECT_FALSE(h.slo_pass);
  EXPECT_TRUE(h.slo_evaluated);

  const auto never = summarize(full, {}, std::nullopt);
  EXPECT_FALSE(never.completed);
  EXPECT_FALSE(never.slo_evaluated);
  EXPECT_FALSE(never.slo_pass);

  auto capped = one_task_job("j", 10, 100);
  capped.slo.max_kgco2e = 0.3;
  EXPECT_FALSE(summarize(capped, half, 10.0).slo_pass);
  capped.slo.max_kgco2e = 0.5;
  EXPECT_TRUE(summarize(capped, half, 10.0).slo_pass);
}

TEST(Accounting, LedgerCsvRoundTrip) {
  std::vector<LedgerEntry> entries;
  testgen::Rng r(4);
  for (int i = 0; i < 25; ++i)
    entries.push_back({"job" + std::to_string(i % 3), "t" + std::to_string(i), "s", r.uniform(0, 100),
                       r.uniform(100, 200), r.integer(1, 9), r.uniform(0, 1e7), r.uniform(0, 1), r.uniform(0, 2),
                       r.uniform(0, 1e6), r.uniform(-3, 3)});
  std::stringstream io;
  write_ledger_csv(io, entries);
  EXPECT_EQ(read_ledger_csv(io), entries);
}

// -------------------------------------------------------------- scheduler

struct Fixture {
  std::vector<std::unique_ptr<Site>> sites;
  std::vector<JobSpec> specs;
  PlacementState state;
  SchedulerContext ctx;

  Fixture() { specs.reserve(16); }

  void add_site(const std::string& id, std::vector<PowerSample> s, int cores, const std::string& iso = "iso",
                double step = 300.0) {
    sites.push_back(std::make_unique<Site>(bare_site(id, {legacy(id + "_s", cores, 0, 10)}, iso),
                                           shared_trace(id, std::move(s), step)));
  }

  JobState& add_job(JobSpec spec, JobPhase phase = JobPhase::queued, const std::string& site = "") {
    specs.push_back(std::move(spec));
    JobState js;
    js.spec = &specs.back();
    js.phase = phase;
    js.site = site;
    js.remaining_core_s = specs.back().total_core_seconds();
    js.demand_cores = 1;
    js.vm_count = 1;
    js.fifo = state.jobs.size();
    return state.jobs[specs.back().job_id] = js;
  }

  void prepare(double t) {
    ctx.sites.clear();
    ctx.forecasts.clear();
    for (const auto& s : sites) ctx.sites.push_back(s.get());
    std::sort(ctx.sites.begin(), ctx.sites.end(), [](const Site* a, const Site* b) { return a->id() < b->id(); });
    for (const Site* s : ctx.sites) {
      const std::size_t idx = s->trace().index_at(t);
      const std::size_t h = std::min(ctx.policy.lead_window_steps, s->trace().size() - idx);
      ctx.forecasts[s->id()] = oracle_forecast(s->trace(), t, h);
    }
  }
};

TEST(Admit, SingleSite) {
  Fixture f;
  f.add_site("a", std::vector<PowerSample>(20, opp(1.0)), 8);
  const auto& job = f.add_job(one_task_job("j", 100, 6000));
  f.prepare(0.0);
  const auto a = admit(job, f.state, f.ctx, 0.0);
  ASSERT_TRUE(std::holds_alternative<Start>(a));
  EXPECT_EQ(std::get<Start>(a).site, "a");
  EXPECT_EQ(std::get<Start>(a).width, 1);
}

TEST(Admit, PrefersZeroCarbon) {
  Fixture f;
  f.add_site("a_dirty", std::vector<PowerSample>(20, grid(1.0, 400.0, 1.0)), 8);
  f.add_site("z_clean", std::vector<PowerSample>(20, opp(1.0)), 8);
  const auto& job = f.add_job(one_task_job("j", 100, 6000));
  f.prepare(0.0);
  const auto a = admit(job, f.state, f.ctx, 0.0);
  ASSERT_TRUE(std::holds_alternative<Start>(a));
  EXPECT_EQ(std::get<Start>(a).site, "z_clean");
}

TEST(Admit, TiesGoToLowerPriceThenSiteId) {
  Fixture f;
  f.add_site("b", std::vector<PowerSample>(20, grid(1.0, 300.0, 20.0)), 8);
  f.add_site("c", std::vector<PowerSample>(20, grid(1.0, 300.0, 10.0)), 8);
  f.add_site("d", std::vector<PowerSample>(20, grid(1.0, 300.0, 10.0)), 8);
  const auto& job = f.add_job(one_task_job("j", 100, 6000));
  f.prepare(0.0);
  EXPECT_EQ(std::get<Start>(admit(job, f.state, f.ctx, 0.0)).site, "c");
}

TEST(Admit, FullSitesDefer) {
  Fixture f;
  f.add_site("a", std::vector<PowerSample>(20, opp(10e-6)), 1);
  f.add_job(one_task_job("busy", 1e6, 1e7), JobPhase::running, "a");
  const auto& job = f.add_job(one_task_job("j", 100, 6000));
  f.prepare(0.0);
  EXPECT_TRUE(std::holds_alternative<Defer>(admit(job, f.state, f.ctx, 0.0)));
}

TEST(Admit, InfeasibleRenewableSlo) {
  Fixture f;
  f.add_site("a", std::vector<PowerSample>(20, grid(1.0)), 8);
  const auto& job = f.add_job(one_task_job("j", 100, 6000, 1.0));
  f.prepare(0.0);
  EXPECT_THROW(admit(job, f.state, f.ctx, 0.0), InfeasibleSlo);
  EXPECT_THROW(admit(job, f.state, f.ctx, -1.0), std::invalid_argument);
}

TEST(MigrationDeadline, Examples) {
  InterSiteLink l;
  l.gbps = 10.0;
  l.latency_s = 0.0;
  l.per_vm_overhead_s = 0.05;
  EXPECT_NEAR(plan_migration_deadline(10.0, 1, l, 100.0, 0.0, 0.0), 91.95, 1e-12);
  InterSiteLink zero = l;
  zero.per_vm_overhead_s = 0.0;
  EXPECT_DOUBLE_EQ(plan_migration_deadline(0.0, 0, zero, 100.0, 7.0, 0.0), 93.0);
  EXPECT_THROW(plan_migration_deadline(10.0, 0, l, 51.0, 0.0, 50.0), AlreadyLate);
}

TEST(PlanStep, NoShortfallNoActions) {
  Fixture f;
  f.add_site("a", std::vector<PowerSample>(30, opp(1.0)), 8);
  f.add_job(one_task_job("j", 1e4, 1e6), JobPhase::running, "a");
  f.prepare(0.0);
  EXPECT_TRUE(plan_step(f.state, f.ctx, 0.0).empty());
}

// Site A goes dark one minute from now; B stays lit.
Fixture evacuation(const std::string& b_iso, Tier tier) {
  Fixture f;
  std::vector<PowerSample> a(40, grid(0.0)), b(40, opp(1.0));
  a[0] = opp(1.0);
  f.add_site("a", a, 8, "iso", 60.0);
  f.add_site("b", b, 8, b_iso, 60.0);
  InterSiteLink l;
  l.from_site = "a";
  l.to_site = "b";
  l.gbps = 10.0;
  l.latency_s = 0.0;
  l.per_vm_overhead_s = 0.05;
  f.ctx.links = {l};
  f.ctx.policy.safety_margin_s = 0.0;
  auto spec = one_task_job("j", 1e4, 1e6);
  spec.tier = tier;
  auto& js = f.add_job(spec, JobPhase::running, "a");
  js.state_gb = 10.0;
  f.prepare(0.0);
  return f;
}

TEST(PlanStep, MigratesBeforeDeadline) {
  const Fixture f = evacuation("iso", Tier::standard);
  const auto actions = plan_step(f.state, f.ctx, 0.0);
  ASSERT_EQ(actions.size(), 1u);
  ASSERT_TRUE(std::holds_alternative<Migrate>(actions[0]));
  const auto& m = std::get<Migrate>(actions[0]);
  EXPECT_EQ(m.from, "a");
  EXPECT_EQ(m.to, "b");
  EXPECT_LE(m.start_s, 51.95 + 1e-9);
  EXPECT_NEAR(m.transfer_s, 8.05, 1e-12);
}

TEST(PlanStep, TierRule) {
  const Fixture standard = evacuation("other", Tier::standard);
  const auto s = plan_step(standard.state, standard.ctx, 0.0);
  ASSERT_EQ(s.size(), 1u);
  ASSERT_TRUE(std::holds_alternative<Freeze>(s[0]));
  EXPECT_EQ(std::get<Freeze>(s[0]).site, "a");

  const Fixture premium = evacuation("other", Tier::premium);
  const auto p = plan_step(premium.state, premium.ctx, 0.0);
  ASSERT_EQ(p.size(), 1u);
  ASSERT_TRUE(std::holds_alternative<Migrate>(p[0]));
  EXPECT_EQ(std::get<Migrate>(p[0]).to, "b");
}

TEST(PlanStep, FrozenJobResumesWhenPowerReturns) {
  Fixture f;
  std::vector<PowerSample> a(30, opp(1.0));
  f.add_site("a", a, 8);
  auto& js = f.add_job(one_task_job("j", 1e4, 1e6), JobPhase::frozen, "a");
  js.state_gb = 1.0;
  f.prepare(0.0);
  const auto actions = plan_step(f.state, f.ctx, 0.0);
  ASSERT_EQ(actions.size(), 1u);
  ASSERT_TRUE(std::holds_alternative<Resume>(actions[0]));
  EXPECT_EQ(std::get<Resume>(actions[0]).site, "a");
}

TEST(PlanStep, Deterministic) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    testgen::Rng r(seed);
    Fixture f;
    for (int s = 0; s < 3; ++s) {
      const auto t = testgen::blocky_trace(r, "s" + std::to_string(s), 30, 300.0, 0.0, 1e-4, 0.4, 0.6);
      f.add_site("s" + std::to_string(s), {t.samples().begin(), t.samples().end()}, r.integer(1, 4),
                 r.chance(0.5) ? "x" : "y");
    }
    for (int j = 0; j < 5; ++j) {
      const auto phase = r.chance(0.5) ? JobPhase::running : JobPhase::frozen;
      auto& js = f.add_job(one_task_job("j" + std::to_string(j), r.uniform(100, 5000), 9000), phase,
                           "s" + std::to_string(r.integer(0, 2)));
      js.state_gb = r.uniform(0, 5);
    }
    f.prepare(0.0);
    const auto once = plan_step(f.state, f.ctx, 0.0);
    const auto twice = plan_step(f.state, f.ctx, 0.0);
    EXPECT_EQ(once, twice);
  }
}

}  // namespace
}  // namespace sundrop
