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

// Report emission: report.json, ledger.csv, events.csv and series.csv.
// The JSON and CSV layouts are documented in README.md.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sundrop/accounting.hpp"
#include "sundrop/detail/numfmt.hpp"
#include "sundrop/engine.hpp"
#include "sundrop/error.hpp"
#include "sundrop/scenario.hpp"

namespace sundrop {

inline constexpr int kReportSchemaVersion = 1;

inline std::vector<JobSummary> summarize_jobs(const SimResult& result) {
  std::map<std::string, std::vector<LedgerEntry>> by_job;
  for (const auto& e : result.ledger) by_job[e.job_id].push_back(e);
  std::vector<JobSummary> out;
  for (const auto& j : result.jobs) {
    const auto it = by_job.find(j.spec.job_id);
    static const std::vector<LedgerEntry> none;
    out.push_back(summarize(j.spec, it == by_job.end() ? none : it->second, j.completion_s));
  }
  return out;
}

namespace detail {

inline bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace detail

// Builds report.json. Throws std::logic_error if the totals do not equal the
// sums of their parts.
inline nlohmann::json build_report(const ScenarioConfig& cfg, const SimResult& result) {
  using nlohmann::json;
  const auto summaries = summarize_jobs(result);

  json jobs = json::array();
  double job_energy = 0.0, job_carbon = 0.0, job_cost = 0.0, job_embodied = 0.0;
  for (std::size_t i = 0; i < result.jobs.size(); ++i) {
    const auto& o = result.jobs[i];
    const auto& s = summaries[i];
    job_energy += s.total_energy_j;
    job_carbon += s.kgco2e;
    job_cost += s.cost_usd;
    job_embodied += s.embodied_kgco2e;
    jobs.push_back({
        {"job_id", s.job_id},
        {"tier", std::string(to_string(o.spec.tier))},
        {"status", std::string(to_string(o.phase))},
        {"completed", s.completed},
        {"completion_s", s.completion_s ? json(*s.completion_s) : json(nullptr)},
        {"arrival_s", o.spec.arrival_s},
        {"deadline_s", o.spec.deadline_s},
        {"deadline_met", s.deadline_met},
        {"total_energy_j", s.total_energy_j},
        {"opportunity_energy_j", s.opportunity_energy_j},
        {"renewable_fraction", s.renewable_fraction},
        {"kgco2e", s.kgco2e},
        {"embodied_kgco2e", s.embodied_kgco2e},
        {"cost_usd", s.cost_usd},
        {"consumed_core_seconds", o.consumed_core_seconds},
        {"slo",
         {{"min_renewable_fraction", o.spec.slo.min_renewable_fraction},
          {"max_kgco2e", detail::number_or_null(o.spec.slo.max_kgco2e)},
          {"evaluated", s.slo_evaluated},
          {"pass", s.slo_pass}}},
        {"note", o.note},
    });
  }

  json sites = json::array();
  double metered = 0.0, attributed = 0.0, overhead = 0.0, metered_carbon = 0.0, overhead_carbon = 0.0,
         metered_cost = 0.0, overhead_cost = 0.0, embodied_unattributed = 0.0;
  const double span = result.end_s - result.start_s;
  for (const auto& [id, a] : result.sites) {
    if (!detail::close(a.attributed_j + a.overhead_j(), a.metered_j))
      throw std::logic_error("site '" + id + "': attributed + overhead energy differs from the meter");
    metered += a.metered_j;
    attributed += a.attributed_j;
    overhead += a.overhead_j();
    metered_carbon += a.metered.grid_carbon_kg;
    overhead_carbon += a.overhead.grid_carbon_kg;
    metered_cost += a.metered.cost_usd;
    overhead_cost += a.overhead.cost_usd;
    embodied_unattributed += a.embodied_unattributed_kg;
    std::string iso;
    for (const auto& sc : cfg.sites)
      if (sc.spec.site_id == id) iso = sc.spec.iso_id;
    sites.push_back({
        {"site_id", id},
        {"iso", iso},
        {"metered_energy_j", a.metered_j},
        {"attributed_energy_j", a.attributed_j},
        {"overhead",
         {{"unhosted_idle_j", a.unhosted_idle_j},
          {"infra_idle_j", a.infra_idle_j},
          {"fabric_j", a.fabric_j},
          {"total_j", a.overhead_j()},
          {"kgco2e", a.overhead.grid_carbon_kg},
          {"cost_usd", a.overhead.cost_usd}}},
        {"metered_opportunity_energy_j", a.metered.opportunity_j},
        {"kgco2e", a.metered.grid_carbon_kg},
        {"cost_usd", a.metered.cost_usd},
        {"embodied_attributed_kgco2e", a.embodied_attributed_kg},
        {"embodied_unattributed_kgco2e", a.embodied_unattributed_kg},
        {"task_core_seconds", a.task_core_seconds},
        {"coverage",
         {{"powered_fraction", span > 0 ? a.powered_s / span : 0.0},
          {"opportunity_fraction", span > 0 ? a.opportunity_s / span : 0.0}}},
    });
  }

  if (!detail::close(job_energy, attributed))
    throw std::logic_error("job energy does not sum to the attributed site energy");
  if (!detail::close(job_carbon + overhead_carbon, metered_carbon, 1e-6))
    throw std::logic_error("job and overhead carbon do not sum to the metered carbon");

  json migrations = json::array();
  for (const auto& m : result.migrations)
    migrations.push_back({{"job_id", m.job}, {"from", m.from}, {"to", m.to}, {"start_s", m.start_s},
                          {"done_s", m.done_s}, {"from_cold_storage", m.from_cold_storage},
                          {"completed", m.completed}, {"aborted", m.aborted}});

  const auto& c = result.counters;
  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["seed"] = cfg.seed;
  report["simulation"] = {{"start_s", result.start_s}, {"end_s", result.end_s}, {"events", result.events.size()}};
  report["assumptions"] = result.assumptions;
  report["config"] = scenario_echo(cfg);
  report["jobs"] = std::move(jobs);
  report["sites"] = std::move(sites);
  report["totals"] = {
      {"energy_j", metered},
      {"attributed_energy_j", attributed},
      {"overhead_energy_j", overhead},
      {"job_kgco2e", job_carbon},
      {"overhead_kgco2e", overhead_carbon},
      {"kgco2e", metered_carbon},
      {"job_cost_usd", job_cost},
      {"overhead_cost_usd", overhead_cost},
      {"cost_usd", metered_cost},
      {"embodied_kgco2e", job_embodied + embodied_unattributed},
  };
  report["counters"] = {
      {"emergency_freezes", c.emergency_freezes}, {"planned_freezes", c.planned_freezes},
      {"migrations_started", c.migrations_started}, {"migrations_completed", c.migrations_completed},
      {"migration_aborts", c.migration_aborts}, {"resumes", c.resumes},
      {"kills", c.kills}, {"rejected", c.rejected},
      {"capacity_violations", c.capacity_violations}, {"lost_core_seconds", c.lost_core_seconds},
  };
  report["migrations"] = std::move(migrations);
  return report;
}

// ---------------------------------------------------------------------------
// CSV files

inline constexpr const char* kSeriesCsvHeader =
    "time_s,site_id,available_mw,opportunity,plan_cores,committed_cores,ram_gb,committed_ram_gb,"
    "usable_budget_w,watts_used,fabric_watts";

inline constexpr const char* kEventsCsvHeader = "time_s,seq,kind,payload";

inline void write_series_csv(std::ostream& out, const std::vector<SeriesRow>& rows) {
  using detail::format_double;
  out << kSeriesCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.time_s) << ',' << r.site_id << ',' << format_double(r.available_mw) << ','
        << (r.opportunity ? 1 : 0) << ',' << r.plan_cores << ',' << r.committed_cores << ','
        << format_double(r.ram_gb) << ',' << format_double(r.committed_ram_gb) << ','
        << format_double(r.usable_budget_w) << ',' << format_double(r.watts_used) << ','
        << format_double(r.fabric_watts) << '\n';
  }
}

inline std::vector<SeriesRow> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kSeriesCsvHeader)
    throw MalformedRow("series: unexpected header");
  std::vector<SeriesRow> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 11) throw MalformedRow("series line " + std::to_string(line_no) + ": field count");
    auto num = [&](std::size_t i) {
      auto v = detail::parse_double(f[i]);
      if (!v) throw MalformedRow("series line " + std::to_string(line_no) + ": bad number");
      return *v;
    };
    SeriesRow r;
    r.time_s = num(0);
    r.site_id = std::string(f[1]);
    r.available_mw = num(2);
    r.opportunity = num(3) != 0.0;
    r.plan_cores = static_cast<int>(num(4));
    r.committed_cores = static_cast<int>(num(5));
    r.ram_gb = num(6);
    r.committed_ram_gb = num(7);
    r.usable_budget_w = num(8);
    r.watts_used = num(9);
    r.fabric_watts = num(10);
    out.push_back(std::move(r));
  }
  return out;
}

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace detail

inline void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events) {
  out << kEventsCsvHeader << '\n';
  for (const auto& e : events)
    out << detail::format_double(e.time_s) << ',' << e.seq << ',' << to_string(e.kind) << ','
        << detail::csv_field(e.payload) << '\n';
}

inline std::vector<EventRecord> read_events_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kEventsCsvHeader)
    throw MalformedRow("events: unexpected header");
  std::vector<EventRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fail = [&](const char* what) {
      return MalformedRow("events line " + std::to_string(line_no) + ": " + what);
    };
    std::size_t p1 = line.find(','), p2 = line.find(',', p1 + 1), p3 = line.find(',', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos)
      throw fail("field count");
    EventRecord e;
    const auto t = detail::parse_double(std::string_view(line).substr(0, p1));
    const auto seq = detail::parse_double(std::string_view(line).substr(p1 + 1, p2 - p1 - 1));
    if (!t || !seq) throw fail("bad number");
    e.time_s = *t;
    e.seq = static_cast<std::uint64_t>(*seq);
    const std::string kind = line.substr(p2 + 1, p3 - p2 - 1);
    bool found = false;
    for (auto k : {EventKind::trace_step, EventKind::migration_complete, EventKind::task_complete,
                   EventKind::job_arrival, EventKind::scheduler_tick, EventKind::sim_end}) {
      if (to_string(k) == kind) {
        e.kind = k;
        found = true;
      }
    }
    if (!found) throw fail("unknown event kind");
    std::string payload = line.substr(p3 + 1);
    if (!payload.empty() && payload.front() == '"') {
      std::string un;
      for (std::size_t i = 1; i < payload.size(); ++i) {
        if (payload[i] == '"') {
          if (i + 1 < payload.size() && payload[i + 1] == '"') {
            un += '"';
            ++i;
          } else {
            break;
          }
        } else {
          un += payload[i];
        }
      }
      payload = std::move(un);
    }
    e.payload = std::move(payload);
    out.push_back(std::move(e));
  }
  return out;
}

// Writes the four report files into `dir`, creating it if needed.
inline void write_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg, const SimResult& result) {
  std::filesystem::create_directories(dir);
  const auto report = build_report(cfg, result);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("report.json");
    out << report.dump(2) << '\n';
  }
  {
    auto out = open("ledger.csv");
    write_ledger_csv(out, result.ledger);
  }
  {
    auto out = open("events.csv");
    write_events_csv(out, result.events);
  }
  {
    auto out = open("series.csv");
    write_series_csv(out, result.series);
  }
}

}  // namespace sundrop
