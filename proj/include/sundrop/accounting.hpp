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

// Per-task energy attribution and per-job carbon rollups.
//
// A task running on a server is billed for its own cores plus a share of the
// server's idle draw proportional to its cores among all cores busy on that
// server. Embodied carbon is shared the same way. Energy drawn from an
// opportunity sample is zero-carbon; everything else is charged the sample's
// grid intensity. Cost is energy times the settlement price, so negative
// prices produce negative cost.

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sundrop/detail/numfmt.hpp"
#include "sundrop/error.hpp"
#include "sundrop/fleet.hpp"
#include "sundrop/trace.hpp"
#include "sundrop/workload.hpp"

namespace sundrop {

inline constexpr double kJoulesPerKwh = 3.6e6;
inline constexpr double kJoulesPerMwh = 3.6e9;

struct LedgerEntry {
  std::string job_id;
  std::string task_id;
  std::string site_id;
  double t0 = 0.0;
  double t1 = 0.0;
  int active_cores = 0;
  double op_energy_j = 0.0;
  double embodied_kgco2e = 0.0;
  double grid_carbon_kgco2e = 0.0;
  double opportunity_energy_j = 0.0;
  double cost_usd = 0.0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

// One task's occupancy of one server over [t0, t1).
struct TaskRun {
  std::string job_id;
  std::string task_id;
  double t0 = 0.0;
  double t1 = 0.0;
  int active_cores = 0;
  // All busy cores on the server during the interval, this task included.
  int server_busy_cores = 0;
  // Embodied rate of shared RAM/flash nodes already apportioned to this run.
  double shared_embodied_kg_per_h = 0.0;
};

struct EnergySplit {
  double energy_j = 0.0;
  double opportunity_j = 0.0;
  double grid_carbon_kg = 0.0;
  double cost_usd = 0.0;

  EnergySplit& operator+=(const EnergySplit& o) {
    energy_j += o.energy_j;
    opportunity_j += o.opportunity_j;
    grid_carbon_kg += o.grid_carbon_kg;
    cost_usd += o.cost_usd;
    return *this;
  }
};

// Prices a constant draw of `watts` over [t0, t1) against the trace, step by
// step.
inline EnergySplit price_energy(const PowerTrace& trace, double t0, double t1, double watts) {
  if (!(t1 > t0)) throw OutOfRange("empty or inverted interval");
  if (t0 < trace.start() || t1 > trace.end())
    throw OutOfRange("interval lies outside trace '" + trace.site_id() + "'");
  EnergySplit out;
  std::size_t i = trace.index_at(t0);
  double a = t0;
  while (a < t1) {
    const double step_end = trace.time_of(i + 1);
    const double b = std::min(t1, step_end);
    if (b > a) {
      const auto& s = trace[i];
      const double e = watts * (b - a);
      out.energy_j += e;
      if (s.is_opportunity()) {
        out.opportunity_j += e;
      } else {
        out.grid_carbon_kg += e / kJoulesPerKwh * s.carbon_gco2_per_kwh / 1000.0;
      }
      out.cost_usd += e / kJoulesPerMwh * s.price_usd_per_mwh;
    }
    a = b;
    if (++i >= trace.size()) break;
  }
  return out;
}

inline LedgerEntry attribute(const TaskRun& run, const ServerSpec& server, const std::string& site_id,
                             const PowerTrace& trace) {
  if (run.active_cores <= 0 || run.server_busy_cores < run.active_cores)
    throw std::invalid_argument("task run must hold between 1 and server_busy_cores cores");
  if (run.server_busy_cores > server.core_count)
    throw CoreOverflow(server.server_id + ": busy cores exceed core_count");
  const double share = static_cast<double>(run.active_cores) / run.server_busy_cores;
  const double watts = run.active_cores * server.per_core_watts + server.idle_watts * share;
  const EnergySplit e = price_energy(trace, run.t0, run.t1, watts);

  LedgerEntry out;
  out.job_id = run.job_id;
  out.task_id = run.task_id;
  out.site_id = site_id;
  out.t0 = run.t0;
  out.t1 = run.t1;
  out.active_cores = run.active_cores;
  out.op_energy_j = e.energy_j;
  out.opportunity_energy_j = e.opportunity_j;
  out.grid_carbon_kgco2e = e.grid_carbon_kg;
  out.cost_usd = e.cost_usd;
  out.embodied_kgco2e =
      (embodied_rate(server) * share + run.shared_embodied_kg_per_h) * (run.t1 - run.t0) / 3600.0;
  return out;
}

// Sums `b` into `a`. Both must describe the same task over the same interval.
inline void merge_into(LedgerEntry& a, const LedgerEntry& b) {
  a.active_cores += b.active_cores;
  a.op_energy_j += b.op_energy_j;
  a.embodied_kgco2e += b.embodied_kgco2e;
  a.grid_carbon_kgco2e += b.grid_carbon_kgco2e;
  a.opportunity_energy_j += b.opportunity_energy_j;
  a.cost_usd += b.cost_usd;
}

struct JobSummary {
  std::string job_id;
  double total_energy_j = 0.0;
  double opportunity_energy_j = 0.0;
  double renewable_fraction = 0.0;
  // Operational (grid) carbon only; embodied carbon is reported apart.
  double kgco2e = 0.0;
  double embodied_kgco2e = 0.0;
  double cost_usd = 0.0;
  bool completed = false;
  std::optional<double> completion_s;
  bool slo_evaluated = false;
  bool slo_pass = false;
  bool deadline_met = false;
};

// Rolls a job's ledger entries up. The SLO is evaluated only for completed
// jobs; an incomplete job never passes.
inline JobSummary summarize(const JobSpec& job, const std::vector<LedgerEntry>& ledger,
                            std::optional<double> completion_s = std::nullopt) {
  JobSummary s;
  s.job_id = job.job_id;
  for (const auto& e : ledger) {
    if (e.job_id != job.job_id) continue;
    s.total_energy_j += e.op_energy_j;
    s.opportunity_energy_j += e.opportunity_energy_j;
    s.kgco2e += e.grid_carbon_kgco2e;
    s.embodied_kgco2e += e.embodied_kgco2e;
    s.cost_usd += e.cost_usd;
  }
  if (s.total_energy_j > 0.0)
    s.renewable_fraction = std::clamp(s.opportunity_energy_j / s.total_energy_j, 0.0, 1.0);
  s.completed = completion_s.has_value() && s.total_energy_j > 0.0;
  if (s.completed) {
    s.completion_s = completion_s;
    s.deadline_met = *completion_s <= job.deadline_s;
    s.slo_evaluated = true;
    s.slo_pass = s.renewable_fraction >= job.slo.min_renewable_fraction &&
                 s.kgco2e <= job.slo.max_kgco2e;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Ledger CSV

inline constexpr const char* kLedgerCsvHeader =
    "job_id,task_id,site_id,t0,t1,active_cores,op_energy_j,embodied_kgco2e,grid_carbon_kgco2e,"
    "opportunity_energy_j,cost_usd";

inline void write_ledger_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger) {
  using detail::format_double;
  out << kLedgerCsvHeader << '\n';
  for (const auto& e : ledger) {
    out << e.job_id << ',' << e.task_id << ',' << e.site_id << ',' << format_double(e.t0) << ','
        << format_double(e.t1) << ',' << e.active_cores << ',' << format_double(e.op_energy_j) << ','
        << format_double(e.embodied_kgco2e) << ',' << format_double(e.grid_carbon_kgco2e) << ','
        << format_double(e.opportunity_energy_j) << ',' << format_double(e.cost_usd) << '\n';
  }
}

inline std::vector<LedgerEntry> read_ledger_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kLedgerCsvHeader)
    throw MalformedRow("ledger: unexpected header");
  std::vector<LedgerEntry> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, ',');
    if (f.size() != 11) throw MalformedRow("ledger line " + std::to_string(line_no) + ": field count");
    auto num = [&](std::size_t i) {
      auto v = detail::parse_double(f[i]);
      if (!v) throw MalformedRow("ledger line " + std::to_string(line_no) + ": bad number");
      return *v;
    };
    LedgerEntry e;
    e.job_id = std::string(f[0]);
    e.task_id = std::string(f[1]);
    e.site_id = std::string(f[2]);
    e.t0 = num(3);
    e.t1 = num(4);
    e.active_cores = static_cast<int>(num(5));
    e.op_energy_j = num(6);
    e.embodied_kgco2e = num(7);
    e.grid_carbon_kgco2e = num(8);
    e.opportunity_energy_j = num(9);
    e.cost_usd = num(10);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace sundrop
