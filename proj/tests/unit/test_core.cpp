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

// Trace, economics, fleet, network, workload and forecast.

#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sundrop/economics.hpp"
#include "sundrop/fleet.hpp"
#include "sundrop/forecast.hpp"
#include "sundrop/network.hpp"
#include "sundrop/trace.hpp"
#include "sundrop/workload.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace sundrop {
namespace {

PowerSample opp(double mw) { return {mw, -1.0, 400.0, true}; }
PowerSample grid(double mw) { return {mw, 40.0, 400.0, false}; }

PowerTrace trace_of(std::vector<PowerSample> s, double step = 300.0, double start = 0.0) {
  return PowerTrace("t", start, step, std::move(s));
}

// ------------------------------------------------------------------ trace

TEST(TraceCsv, TwoRowsGiveStepAndCount) {
  const auto t = parse_trace_csv(std::string(kTraceCsvHeader) +
                                 "\n0,a,50,10,300,0\n300,a,50,10,300,0\n");
  EXPECT_EQ(t.step(), 300.0);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.site_id(), "a");
}

TEST(TraceCsv, NegativePowerRejected) {
  EXPECT_THROW(parse_trace_csv(std::string(kTraceCsvHeader) + "\n0,a,-1,10,300,0\n"), NegativePower);
}

TEST(TraceCsv, GapRejected) {
  EXPECT_THROW(parse_trace_csv(std::string(kTraceCsvHeader) +
                               "\n0,a,1,10,300,0\n300,a,1,10,300,0\n900,a,1,10,300,0\n"),
               NonUniformStep);
}

TEST(TraceCsv, MalformedFields) {
  const std::string h = std::string(kTraceCsvHeader) + "\n";
  EXPECT_THROW(parse_trace_csv(h + "0,a,abc,10,300,0\n"), MalformedRow);
  EXPECT_THROW(parse_trace_csv(h + "0,a,1,10,300\n"), MalformedRow);
  EXPECT_THROW(parse_trace_csv(h + "0,a,1,10,300,2\n"), MalformedRow);
  EXPECT_THROW(parse_trace_csv(h), MalformedRow);
  EXPECT_THROW(parse_trace_csv("time,mw\n0,1\n"), MalformedRow);
}

TEST(TraceCsv, OneDayDuration) {
  std::string csv = std::string(kTraceCsvHeader) + "\n";
  for (int i = 0; i < 288; ++i) csv += std::to_string(i * 300) + ",a,5,20,100,0\n";
  EXPECT_DOUBLE_EQ(parse_trace_csv(csv).duration(), 86400.0);
}

TEST(TraceCsv, RoundTripRandomTraces) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    testgen::Rng r(seed);
    const auto t = testgen::blocky_trace(r, "rt", 97, 300.0, 0.013, 77.7, 0.3, 0.5);
    const auto once = parse_trace_csv(to_csv(t));
    EXPECT_EQ(once, t);
    EXPECT_EQ(parse_trace_csv(to_csv(once)), once);
  }
}

TEST(Solar, NoonPeakNightZero) {
  const auto t = synth_solar(100.0, 21600.0, 64800.0, 300.0, 1);
  EXPECT_NEAR(power_at(t, 43200.0), 100.0, 1e-9);
  EXPECT_EQ(power_at(t, 10800.0), 0.0);
}

TEST(Solar, DailyEnergyMatchesQuadrature) {
  const auto t = synth_solar(100.0, 21600.0, 64800.0, 300.0, 1);
  double mwh = 0.0;
  for (const auto& s : t.samples()) mwh += s.available_mw * t.step() / 3600.0;
  // Composite Simpson over the daylight arch, in MWh.
  const int n = 2000;
  const double a = 21600.0, b = 64800.0, h = (b - a) / n;
  auto f = [&](double x) { return 100.0 * std::sin(std::numbers::pi * (x - a) / (b - a)); };
  double simpson = f(a) + f(b);
  for (int i = 1; i < n; ++i) simpson += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  simpson *= h / 3.0 / 3600.0;
  EXPECT_NEAR(simpson, 763.9, 0.05);
  EXPECT_NEAR(mwh, simpson, 0.005 * simpson);
}

TEST(Solar, InvalidWindow) {
  EXPECT_THROW(synth_solar(100.0, 50000.0, 40000.0, 300.0, 1), InvalidWindow);
  EXPECT_THROW(synth_solar(100.0, 40000.0, 40000.0, 300.0, 1), InvalidWindow);
}

TEST(Solar, DutyAtTwelveHours) {
  EXPECT_DOUBLE_EQ(coverage(synth_solar(10.0, 21600.0, 64800.0, 300.0, 2), 0.0), 0.5);
}

TEST(Wind, ZeroVolatilityIsConstant) {
  const auto t = synth_wind(30.0, 0.0, 0.2, 9, 300.0, 1);
  for (const auto& s : t.samples()) EXPECT_EQ(s.available_mw, 30.0);
}

TEST(Wind, SeedIsDeterministic) {
  EXPECT_EQ(synth_wind(50.0, 20.0, 0.1, 7, 300.0, 2), synth_wind(50.0, 20.0, 0.1, 7, 300.0, 2));
  EXPECT_NE(synth_wind(50.0, 20.0, 0.1, 7, 300.0, 2), synth_wind(50.0, 20.0, 0.1, 8, 300.0, 2));
}

TEST(Wind, LongRunMean) {
  const auto t = synth_wind(50.0, 20.0, 0.5, 11, 300.0, 35);
  ASSERT_GE(t.size(), 10000u);
  double sum = 0.0;
  for (const auto& s : t.samples()) {
    EXPECT_GE(s.available_mw, 0.0);
    sum += s.available_mw;
  }
  EXPECT_NEAR(sum / static_cast<double>(t.size()), 50.0, 5.0);
}

TEST(PowerAt, StepHold) {
  const auto t = trace_of({grid(10), grid(20)}, 300.0, 1000.0);
  EXPECT_EQ(power_at(t, 1000.0 + 299.0), 10.0);
  EXPECT_EQ(power_at(t, 1000.0 + 300.0), 20.0);
  EXPECT_THROW(power_at(t, 1000.0 + 600.0), OutOfRange);
  EXPECT_THROW(power_at(t, 999.0), OutOfRange);
}

TEST(Windows, Examples) {
  EXPECT_TRUE(opportunity_windows(trace_of({opp(1), opp(2)}), 10.0).empty());
  const auto w = opportunity_windows(trace_of({opp(0), opp(50), opp(50), opp(0)}), 10.0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], (Interval{300.0, 900.0}));
  // Grid power never opens a window.
  EXPECT_TRUE(opportunity_windows(trace_of({grid(50), grid(50)}), 0.0).empty());
}

TEST(Windows, SolarOnePerDay) {
  const auto t = synth_solar(80.0, 20000.0, 70000.0, 300.0, 3);
  const auto w = opportunity_windows(t, 0.0);
  ASSERT_EQ(w.size(), 3u);
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_NEAR(w[d].begin, d * 86400.0 + 20100.0, 1e-9);  // first grid point at or after sunrise
    EXPECT_NEAR(w[d].end, d * 86400.0 + 70200.0, 1e-9);
  }
}

TEST(Windows, DisjointSortedAndSumToCoverage) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    testgen::Rng r(seed);
    const auto t = testgen::blocky_trace(r, "w", 200, 300.0, 0.0, 40.0, 0.3, 0.6);
    for (double min : {0.0, 5.0, 20.0}) {
      const auto w = opportunity_windows(t, min);
      double total = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_LT(w[i].begin, w[i].end);
        if (i > 0) {
          EXPECT_LT(w[i - 1].end, w[i].begin);
        }
        total += w[i].length();
      }
      EXPECT_NEAR(total, coverage(t, min) * t.duration(), 1e-6);
    }
  }
}

TEST(UnionCoverage, Examples) {
  std::vector<PowerSample> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(i < 5 ? opp(10) : grid(10));
    b.push_back(i < 5 ? grid(10) : opp(10));
  }
  const std::vector<PowerTrace> one{trace_of(a)};
  EXPECT_DOUBLE_EQ(union_coverage(one, 0.0), 0.5);
  const std::vector<PowerTrace> pair{trace_of(a), trace_of(b)};
  EXPECT_DOUBLE_EQ(union_coverage(pair, 0.0), 1.0);
  const std::vector<PowerTrace> bad{trace_of(a), trace_of(b, 600.0)};
  EXPECT_THROW(union_coverage(bad, 0.0), MisalignedTraces);
}

TEST(UnionCoverage, BruteForceAndBounds) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    testgen::Rng r(seed);
    std::vector<PowerTrace> ts;
    const int n = r.integer(1, 4);
    for (int i = 0; i < n; ++i)
      ts.push_back(testgen::blocky_trace(r, "u" + std::to_string(i), 150, 300.0, 0.0, 30.0, 0.25, 0.5));
    const double min = r.uniform(0.0, 20.0);
    const double u = union_coverage(ts, min);
    EXPECT_DOUBLE_EQ(u, oracle::brute_force_union(ts, min));
    double best = 0.0;
    for (const auto& t : ts) best = std::max(best, coverage(t, min));
    EXPECT_GE(u, best);
    if (n == 1) {
      EXPECT_DOUBLE_EQ(u, coverage(ts[0], min));
    }
  }
}

TEST(Opportunity, CurtailedOrNonPositivePrice) {
  EXPECT_TRUE((PowerSample{1, 50, 300, true}).is_opportunity());
  EXPECT_TRUE((PowerSample{1, 0, 300, false}).is_opportunity());
  EXPECT_TRUE((PowerSample{1, -3, 300, false}).is_opportunity());
  EXPECT_FALSE((PowerSample{1, 0.01, 300, false}).is_opportunity());
  EXPECT_EQ((PowerSample{1, -3, 300, false}).effective_carbon_gco2_per_kwh(), 0.0);
  EXPECT_EQ((PowerSample{1, 3, 300, false}).effective_carbon_gco2_per_kwh(), 300.0);
}

// -------------------------------------------------------------- economics

TEST(Econ, StorageFigures) {
  const double caiso = econ::one_hour_storage_cost(1.5, 209.0).dollars();
  const double miso = econ::one_hour_storage_cost(6.0, 209.0).dollars();
  EXPECT_NEAR(caiso, 1.5e9 / 8760.0 * 209.0, 0.01);
  EXPECT_NEAR(caiso, 35e6, 0.05 * 35e6);
  EXPECT_NEAR(miso, 140e6, 0.05 * 140e6);
  EXPECT_EQ(econ::one_hour_storage_cost(0.0, 209.0).cents(), 0);
  EXPECT_EQ(econ::one_hour_storage_cost(0.0, 1e6).cents(), 0);
}

TEST(Econ, StorageIsLinear) {
  const auto base = econ::one_hour_storage_cost(1.5, 209.0);
  EXPECT_NEAR(econ::one_hour_storage_cost(3.0, 209.0).dollars(), 2.0 * base.dollars(), 0.02);
  EXPECT_NEAR(econ::one_hour_storage_cost(1.5, 418.0).dollars(), 2.0 * base.dollars(), 0.02);
  EXPECT_NEAR(econ::one_hour_storage_cost(4.5, 627.0).dollars(), 9.0 * base.dollars(), 0.1);
}

TEST(Econ, Projection) {
  EXPECT_NEAR(econ::growth_projection(1.5, 0.40, 8), 22.0, 0.02 * 22.0);
  EXPECT_NEAR(econ::growth_projection(1.5, 0.40, 8), 1.5 * std::pow(1.4, 8), 1e-12);
  EXPECT_DOUBLE_EQ(econ::growth_projection(3.7, 0.0, 12), 3.7);
  EXPECT_NEAR(econ::growth_projection(2.0, 0.40, 3), 5.488, 1e-9);
}

TEST(Econ, Transmission) {
  EXPECT_DOUBLE_EQ(econ::transmission_cost(100, 100, 2500).dollars(), 2.5e7);
  EXPECT_DOUBLE_EQ(econ::transmission_cost(100, 100, 16000).dollars(), 1.6e8);
  EXPECT_EQ(econ::transmission_cost(0, 100, 16000).cents(), 0);
}

TEST(Econ, Coverage) {
  EXPECT_DOUBLE_EQ(econ::dc_coverage_fraction(7, 70), 0.10);
  EXPECT_NEAR(econ::dc_coverage_fraction(20, 70), 0.2857, 1e-4);
  EXPECT_EQ(econ::dc_coverage_fraction(0, 70), 0.0);
}

TEST(Econ, Monotone) {
  testgen::Rng r(5);
  for (int i = 0; i < 200; ++i) {
    const double a = r.uniform(0, 50), b = a + r.uniform(0.01, 10), p = r.uniform(1, 500);
    EXPECT_LE(econ::one_hour_storage_cost(a, p), econ::one_hour_storage_cost(b, p));
    EXPECT_LE(econ::growth_projection(a, 0.3, 5), econ::growth_projection(b, 0.3, 5));
    EXPECT_LE(econ::transmission_cost(a, 10, p), econ::transmission_cost(b, 10, p));
    EXPECT_LE(econ::dc_coverage_fraction(a, 70), econ::dc_coverage_fraction(b, 70));
  }
}

TEST(Econ, RejectsBadInput) {
  EXPECT_THROW(econ::one_hour_storage_cost(-1, 209), std::invalid_argument);
  EXPECT_THROW(econ::dc_coverage_fraction(1, 0), std::invalid_argument);
  econ::EconConstants k;
  k.tx_usd_per_mw_mile_low = 20000;
  EXPECT_THROW(k.validate(), std::invalid_argument);
  EXPECT_NO_THROW(econ::EconConstants{}.validate());
}

// ------------------------------------------------------------------ fleet

ServerSpec legacy(const std::string& id, int cores, double idle, double per_core) {
  ServerSpec s;
  s.server_id = id;
  s.core_count = cores;
  s.idle_watts = idle;
  s.per_core_watts = per_core;
  return s;
}

TEST(Fleet, PowerDraw) {
  const auto s = legacy("a", 8, 100, 10);
  EXPECT_EQ(power_draw(s, 4, true), 140.0);
  EXPECT_EQ(power_draw(s, 0, false), 0.0);
  EXPECT_EQ(power_draw(s, 0, true), 100.0);
  EXPECT_THROW(power_draw(s, 9, true), CoreOverflow);
  EXPECT_DOUBLE_EQ(watts_per_core(s, 1), 110.0);
  EXPECT_DOUBLE_EQ(watts_per_core(s, 8), 22.5);
}

TEST(Fleet, DrawIncreasingPerCoreNonincreasing) {
  testgen::Rng r(3);
  for (int i = 0; i < 200; ++i) {
    const auto s = legacy("x", r.integer(1, 48), r.uniform(0, 250), r.uniform(0.5, 30));
    for (int n = 1; n <= s.core_count; ++n) {
      EXPECT_GT(power_draw(s, n, true), power_draw(s, n - 1, true));
      if (n > 1) {
        EXPECT_LE(watts_per_core(s, n), watts_per_core(s, n - 1));
      }
    }
  }
}

TEST(Fleet, BudgetExamples) {
  const std::vector<ServerSpec> three{legacy("a", 8, 100, 10), legacy("b", 8, 100, 10), legacy("c", 8, 100, 10)};
  const auto empty = activate_for_budget(three, 0.0);
  EXPECT_EQ(empty.total_active_cores, 0);
  EXPECT_EQ(empty.total_watts, 0.0);
  const auto p = activate_for_budget(three, 500.0);
  EXPECT_EQ(p.total_active_cores, 20);
  EXPECT_EQ(p.total_watts, 500.0);
  EXPECT_EQ(p.active_cores, (std::vector<int>{8, 8, 4}));
  EXPECT_EQ(activate_for_budget(three, 540.0).total_active_cores, 24);
  EXPECT_EQ(activate_for_budget(three, 1e9).total_active_cores, 24);
  EXPECT_THROW(activate_for_budget(three, -1.0), std::invalid_argument);
}

TEST(Fleet, MatchesBruteForceMinWatts) {
  testgen::Rng r(17);
  for (int f = 0; f < 60; ++f) {
    std::vector<ServerSpec> servers;
    const int n = r.integer(1, 5);
    for (int i = 0; i < n; ++i)
      servers.push_back(legacy("s" + std::to_string(i), r.integer(1, 6), std::round(r.uniform(0, 80)),
                               std::round(r.uniform(1, 20))));
    const ActivationTable table(servers);
    for (int k = 0; k <= table.total_cores(); ++k) {
      EXPECT_NEAR(table.min_watts(k), oracle::brute_force_min_watts(servers, k), 1e-9);
      const auto plan = table.plan_for_cores(k);
      double draw = 0.0;
      for (std::size_t i = 0; i < servers.size(); ++i) {
        EXPECT_LE(plan.active_cores[i], servers[i].core_count);
        draw += power_draw(servers[i], plan.active_cores[i], plan.active_cores[i] > 0);
      }
      EXPECT_NEAR(draw, plan.total_watts, 1e-9);
    }
  }
}

TEST(Fleet, HalfBudgetsNeverBeatFull) {
  testgen::Rng r(23);
  for (int f = 0; f < 100; ++f) {
    std::vector<ServerSpec> servers;
    const int n = r.integer(2, 6);
    for (int i = 0; i < n; ++i)
      servers.push_back(legacy("s" + std::to_string(i), r.integer(1, 8), r.uniform(0, 120), r.uniform(1, 25)));
    const double budget = r.uniform(0, 1500);
    // Split the fleet in two and give each half of the budget.
    const auto mid = servers.begin() + n / 2;
    const std::vector<ServerSpec> lo(servers.begin(), mid), hi(mid, servers.end());
    const int split = activate_for_budget(lo, budget / 2).total_active_cores +
                      activate_for_budget(hi, budget / 2).total_active_cores;
    EXPECT_LE(split, activate_for_budget(servers, budget).total_active_cores);
  }
}

TEST(Fleet, TieBreakByServerId) {
  const std::vector<ServerSpec> two{legacy("b", 4, 10, 5), legacy("a", 4, 10, 5)};
  const auto p = activate_for_budget(two, 30.0);
  EXPECT_EQ(p.active_cores, (std::vector<int>{0, 4}));
}

TEST(Fleet, EmbodiedRate) {
  EXPECT_EQ(embodied_rate(legacy("l", 4, 10, 5)), 0.0);
  ServerSpec ram;
  ram.server_id = "ram";
  ram.role = ServerRole::ram_dense;
  ram.embodied_kgco2e = 1000.0;
  EXPECT_NEAR(embodied_rate(ram), 0.0228, 1e-4);
  const double r1 = embodied_rate(ram);
  ram.amortization_hours *= 2.0;
  EXPECT_DOUBLE_EQ(embodied_rate(ram), r1 / 2.0);
  auto bad = legacy("l", 4, 10, 5);
  bad.embodied_kgco2e = 3.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Fleet, RamSpill) {
  ServerSpec ram;
  ram.role = ServerRole::ram_dense;
  ram.nic_gbps = {100.0, 100.0};
  EXPECT_TRUE(ram_spill_feasible(ram, 20, 10.0));
  ram.nic_gbps = {100.0};
  EXPECT_TRUE(ram_spill_feasible(ram, 4, 25.0));
  EXPECT_FALSE(ram_spill_feasible(ram, 5, 25.0));
  EXPECT_TRUE(ram_spill_feasible(ram, 0, 25.0));
  EXPECT_THROW(ram_spill_feasible(ram, -1, 25.0), std::invalid_argument);
}

// ---------------------------------------------------------------- network

TEST(Fabric, Staircase) {
  FabricSpec f;
  f.switch_count = 10;
  f.gbps_per_switch = 100.0;
  f.watts_per_switch = 150.0;
  f.always_on_core_switches = 2;
  EXPECT_EQ(scale_fabric(f, 0.0).enabled_switches, 2);
  EXPECT_EQ(scale_fabric(f, 350.0).enabled_switches, 4);
  EXPECT_EQ(scale_fabric(f, 350.0).fabric_watts, 600.0);
  EXPECT_EQ(scale_fabric(f, 1000.0).enabled_switches, 10);
  EXPECT_THROW(scale_fabric(f, 1001.0), CapacityExceeded);
  double prev = 0.0;
  for (double g = 0.0; g <= 1000.0; g += 7.5) {
    const double w = scale_fabric(f, g).fabric_watts;
    EXPECT_GE(w, prev);
    EXPECT_GE(w, f.floor_watts());
    EXPECT_LE(w, f.max_watts());
    prev = w;
  }
}

TEST(Fabric, Validation) {
  FabricSpec f;
  f.switch_count = 2;
  f.always_on_core_switches = 3;
  EXPECT_THROW(f.validate(), std::invalid_argument);
  f.always_on_core_switches = 0;
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(Link, TransferTime) {
  InterSiteLink l;
  l.gbps = 10.0;
  l.latency_s = 0.05;
  l.per_vm_overhead_s = 0.05;
  EXPECT_NEAR(transfer_time(10.0, l, 1), 8.10, 1e-12);
  EXPECT_DOUBLE_EQ(transfer_time(0.0, l, 0), 0.05);
  const double base = transfer_time(7.0, l, 0) - l.latency_s;
  EXPECT_DOUBLE_EQ(transfer_time(14.0, l, 0) - l.latency_s, 2.0 * base);
  InterSiteLink fast = l;
  fast.gbps = 40.0;
  EXPECT_LT(transfer_time(10.0, fast, 2), transfer_time(10.0, l, 2));
  EXPECT_LT(transfer_time(10.0, l, 2), transfer_time(10.0, l, 3));
}

// --------------------------------------------------------------- workload

JobSpec job_with(std::vector<std::string> ids, std::vector<std::pair<std::string, std::string>> edges) {
  JobSpec j;
  j.job_id = "j";
  for (auto& id : ids) j.tasks.push_back({id, 10.0, 0.0, 0.0, 1});
  j.edges = std::move(edges);
  j.deadline_s = 100.0;
  return j;
}

TEST(Dag, Orders) {
  EXPECT_EQ(validate_dag(job_with({"A"}, {})), (std::vector<std::string>{"A"}));
  EXPECT_EQ(validate_dag(job_with({"C", "B", "A"}, {{"A", "B"}, {"B", "C"}})),
            (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(validate_dag(job_with({"D", "C", "B", "A"}, {{"A", "C"}, {"A", "B"}, {"B", "D"}, {"C", "D"}})),
            (std::vector<std::string>{"A", "B", "C", "D"}));
}

TEST(Dag, Cycle) {
  try {
    validate_dag(job_with({"A", "B"}, {{"A", "B"}, {"B", "A"}}));
    FAIL() << "expected a cycle";
  } catch (const CyclicDependency& e) {
    EXPECT_EQ(e.cycle(), (std::vector<std::string>{"A", "B"}));
  }
  EXPECT_THROW(validate_dag(job_with({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "B"}})), CyclicDependency);
  EXPECT_THROW(validate_dag(job_with({"A"}, {{"A", "Z"}})), UnknownTask);
}

TEST(Dag, ReadyTasksDiamond) {
  const auto j = job_with({"A", "B", "C", "D"}, {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}});
  EXPECT_EQ(ready_tasks(j, {}), (std::vector<std::string>{"A"}));
  EXPECT_EQ(ready_tasks(j, {"A"}), (std::vector<std::string>{"B", "C"}));
  EXPECT_TRUE(ready_tasks(j, {"A", "B", "C", "D"}).empty());
  EXPECT_THROW(ready_tasks(j, {"Q"}), UnknownTask);
}

TEST(Dag, LivenessOnRandomDags) {
  testgen::Rng r(31);
  for (int k = 0; k < 100; ++k) {
    const int n = r.integer(1, 9);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("t" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (r.chance(0.3)) edges.emplace_back(ids[a], ids[b]);
    const auto j = job_with(ids, edges);
    std::set<std::string> done;
    int completions = 0;
    while (true) {
      const auto ready = ready_tasks(j, done);
      if (ready.empty()) break;
      for (const auto& id : ready) {
        done.insert(id);
        ++completions;
      }
    }
    EXPECT_EQ(completions, n);
    const auto order = validate_dag(j);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& [a, b] : edges) EXPECT_LT(pos[a], pos[b]);
  }
}

TEST(Burst, WidthAndWallTime) {
  TaskSpec t{"t", 3600.0, 0.0, 0.0, 64};
  EXPECT_EQ(burst_width(t, 8), 8);
  t.max_parallelism = 4;
  EXPECT_EQ(burst_width(t, 100), 4);
  EXPECT_EQ(burst_width(t, 0), 0);
  EXPECT_DOUBLE_EQ(wall_time(3600.0, 8), 450.0);
  EXPECT_THROW(wall_time(3600.0, 0), std::invalid_argument);
}

TEST(Job, Validation) {
  auto j = job_with({"A"}, {});
  EXPECT_NO_THROW(j.validate());
  j.deadline_s = j.arrival_s;
  EXPECT_THROW(j.validate(), std::invalid_argument);
  j = job_with({"A"}, {});
  j.slo.min_renewable_fraction = 1.5;
  EXPECT_THROW(j.validate(), std::invalid_argument);
  j = job_with({"A"}, {});
  j.tasks[0].cpu_core_seconds = 0.0;
  EXPECT_THROW(j.validate(), std::invalid_argument);
}

// --------------------------------------------------------------- forecast

TEST(Forecast, Persistence) {
  const auto t = trace_of({grid(40), grid(40), grid(10), grid(10), grid(10), grid(10)});
  const auto f = persistence_forecast(t, 0.0, 4);
  EXPECT_EQ(f.predicted_mw, (std::vector<double>{40, 40, 40, 40}));
  EXPECT_DOUBLE_EQ(f.horizon_s(), 1200.0);
  const auto e = forecast_error(f, t);
  EXPECT_DOUBLE_EQ(e.mae_mw, 15.0);  // two steps exact, two off by the 30 MW jump
  const auto flat = trace_of({grid(7), grid(7), grid(7)});
  EXPECT_EQ(forecast_error(persistence_forecast(flat, 0.0, 3), flat).rmse_mw, 0.0);
  EXPECT_THROW(persistence_forecast(flat, 900.0, 1), OutOfRange);
}

TEST(Forecast, Oracle) {
  testgen::Rng r(2);
  const auto t = testgen::blocky_trace(r, "o", 50, 300.0, 0.0, 10.0, 0.3, 0.5);
  const auto f = oracle_forecast(t, 3000.0, 20);
  const auto e = forecast_error(f, t);
  EXPECT_EQ(e.mae_mw, 0.0);
  EXPECT_EQ(e.rmse_mw, 0.0);
  EXPECT_THROW(oracle_forecast(t, 3000.0, 41), OutOfRange);
  const auto flat = trace_of({grid(7), grid(7), grid(7)});
  EXPECT_EQ(oracle_forecast(flat, 0.0, 3).predicted_mw, persistence_forecast(flat, 0.0, 3).predicted_mw);
}

TEST(Forecast, DiurnalMean) {
  std::vector<PowerSample> s;
  for (int d = 0; d < 3; ++d)
    for (int h = 0; h < 24; ++h) s.push_back(grid(d == 0 ? 10 : d == 1 ? 30 : 99));
  const auto t = trace_of(s, 3600.0);
  const auto f = diurnal_forecast(t, 2 * 86400.0, 5);
  for (double v : f.predicted_mw) EXPECT_DOUBLE_EQ(v, 20.0);
  EXPECT_THROW(diurnal_forecast(t, 86400.0 - 3600.0, 1), InsufficientHistory);
}

TEST(Forecast, DiurnalExactOnPeriodicTrace) {
  const auto t = synth_solar(60.0, 20000.0, 70000.0, 300.0, 4);
  for (std::size_t h : {1u, 50u, 288u}) {
    const auto e = forecast_error(diurnal_forecast(t, 86400.0 + 3000.0, h), t);
    EXPECT_EQ(e.mae_mw, 0.0);
  }
}

TEST(Forecast, ErrorDefinitions) {
  const auto t = trace_of({grid(10), grid(10)});
  Forecast f;
  f.step_s = 300.0;
  f.issued_at_s = 0.0;
  f.predicted_mw = {15.0, 15.0};
  EXPECT_DOUBLE_EQ(forecast_error(f, t).mae_mw, 5.0);
  EXPECT_DOUBLE_EQ(forecast_error(f, t).rmse_mw, 5.0);
  f.predicted_mw = {13.0, 6.0};
  EXPECT_DOUBLE_EQ(forecast_error(f, t).mae_mw, 3.5);
  EXPECT_NEAR(forecast_error(f, t).rmse_mw, 3.5355, 1e-4);
  f.step_s = 600.0;
  EXPECT_THROW(forecast_error(f, t), MisalignedTraces);
}

TEST(Forecast, RmseAtLeastMae) {
  testgen::Rng r(8);
  const auto t = testgen::blocky_trace(r, "f", 400, 300.0, 0.0, 50.0, 0.2, 0.5);
  for (int i = 0; i < 100; ++i) {
    const double at = 300.0 * r.integer(0, 300);
    const auto e = forecast_error(persistence_forecast(t, at, static_cast<std::size_t>(r.integer(1, 99))), t);
    EXPECT_GE(e.rmse_mw + 1e-12, e.mae_mw);
    EXPECT_EQ(e.mae_mw == 0.0, e.rmse_mw == 0.0);
  }
}

}  // namespace
}  // namespace sundrop
