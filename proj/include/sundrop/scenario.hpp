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

// Scenario configuration: a JSON document (schema_version 1) that names
// traces, sites, links, jobs and scheduler knobs. See README.md for the
// full dialect. Every validation failure is a ConfigError carrying the path
// of the offending field, e.g. "sites[1].trace".

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sundrop/error.hpp"
#include "sundrop/fleet.hpp"
#include "sundrop/forecast.hpp"
#include "sundrop/network.hpp"
#include "sundrop/scheduler.hpp"
#include "sundrop/site.hpp"
#include "sundrop/trace.hpp"
#include "sundrop/workload.hpp"

namespace sundrop {

inline constexpr int kSchemaVersion = 1;

struct SiteConfig {
  SiteSpec spec;
  ForecastMethod forecast = ForecastMethod::oracle;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  // Simulated span from the common trace start; 0 means the whole trace.
  double duration_s = 0.0;
  std::map<std::string, std::shared_ptr<const PowerTrace>> traces;
  std::vector<SiteConfig> sites;
  std::vector<InterSiteLink> links;
  std::vector<JobSpec> jobs;
  SchedulerPolicy policy;
  // Description of how each trace was obtained, echoed into the report.
  std::map<std::string, nlohmann::json> trace_sources;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Cross-reference and consistency checks shared by the JSON loader and
// programmatic construction.
inline void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported schema version " + std::to_string(cfg.schema_version));
  if (cfg.sites.empty()) throw ConfigError("sites", "at least one site is required");
  if (!(cfg.duration_s >= 0.0)) throw ConfigError("duration_s", "must be >= 0");

  const PowerTrace* first = nullptr;
  for (const auto& [id, tr] : cfg.traces) {
    if (!tr) throw ConfigError("traces." + id, "missing trace");
    if (!first) {
      first = tr.get();
    } else if (tr->start() != first->start() || tr->step() != first->step()) {
      throw ConfigError("traces." + id, "all traces must share start time and step");
    }
  }

  std::set<std::string> site_ids;
  for (std::size_t i = 0; i < cfg.sites.size(); ++i) {
    const std::string path = "sites[" + std::to_string(i) + "]";
    const SiteSpec& s = cfg.sites[i].spec;
    if (!site_ids.insert(s.site_id).second) throw ConfigError(path + ".id", "duplicate site id");
    auto it = cfg.traces.find(s.trace_ref);
    if (it == cfg.traces.end())
      throw ConfigError(path + ".trace", "unknown trace '" + s.trace_ref + "'");
    if (cfg.duration_s > it->second->duration())
      throw ConfigError("duration_s", "exceeds the duration of trace '" + s.trace_ref + "'");
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }

  for (std::size_t i = 0; i < cfg.links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "]";
    const auto& l = cfg.links[i];
    if (!site_ids.count(l.from_site)) throw ConfigError(path + ".from", "unknown site '" + l.from_site + "'");
    if (!site_ids.count(l.to_site)) throw ConfigError(path + ".to", "unknown site '" + l.to_site + "'");
    if (l.from_site == l.to_site) throw ConfigError(path, "link must join two different sites");
    try {
      l.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }

  std::set<std::string> job_ids;
  for (std::size_t i = 0; i < cfg.jobs.size(); ++i) {
    const std::string path = "jobs[" + std::to_string(i) + "]";
    const auto& j = cfg.jobs[i];
    if (!job_ids.insert(j.job_id).second) throw ConfigError(path + ".id", "duplicate job id");
    try {
      j.validate();
      validate_dag(j);
    } catch (const CyclicDependency& e) {
      throw ConfigError(path + ".edges", e.what());
    } catch (const UnknownTask& e) {
      throw ConfigError(path + ".edges", e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
    if (first && (j.arrival_s < first->start()))
      throw ConfigError(path + ".arrival_s", "arrives before the traces begin");
  }

  const auto& p = cfg.policy;
  if (p.lead_window_steps < 2) throw ConfigError("policy.lead_window_steps", "must be >= 2");
  if (p.guard_steps < 1 || p.guard_steps > p.lead_window_steps)
    throw ConfigError("policy.guard_steps", "must lie in [1, lead_window_steps]");
}

namespace detail {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError(sub(key), "required field is missing");
    return j_.at(key);
  }

  double num(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(sub(key), "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

  std::int64_t integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(sub(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::string str(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(sub(key), "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(sub(key), "expected true or false");
    return v.get<bool>();
  }

  const json& array(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(sub(key), "expected an array");
    return v;
  }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (const char* allowed : keys) ok = ok || k == allowed;
      if (!ok) throw ConfigError(sub(k), "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

inline std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline SynthMarket read_market(const Reader& r) {
  SynthMarket m;
  m.grid_price_usd_per_mwh = r.num("grid_price_usd_per_mwh", m.grid_price_usd_per_mwh);
  m.opportunity_price_usd_per_mwh = r.num("opportunity_price_usd_per_mwh", m.opportunity_price_usd_per_mwh);
  m.grid_carbon_gco2_per_kwh = r.num("grid_carbon_gco2_per_kwh", m.grid_carbon_gco2_per_kwh);
  return m;
}

inline std::shared_ptr<const PowerTrace> read_trace(const std::string& id, const Reader& r,
                                                    const std::filesystem::path& base_dir,
                                                    std::uint64_t seed, std::size_t index,
                                                    json& source) {
  const std::string kind = r.str("kind");
  source = json::object();
  source["kind"] = kind;
  try {
    if (kind == "csv") {
      r.only({"kind", "path", "step_s"});
      const auto rel = r.str("path");
      const auto full = base_dir / rel;
      std::ifstream in(full);
      if (!in) throw ConfigError(r.sub("path"), "cannot open '" + full.string() + "'");
      PowerTrace parsed = parse_trace_csv(in, r.num("step_s", kDefaultStepSeconds));
      source["path"] = rel;
      return std::make_shared<const PowerTrace>(id, parsed.start(), parsed.step(),
                                                std::vector<PowerSample>(parsed.samples().begin(),
                                                                         parsed.samples().end()));
    }
    if (kind == "solar") {
      r.only({"kind", "peak_mw", "sunrise_s", "sunset_s", "step_s", "days", "start_s", "market"});
      SolarParams p;
      p.site_id = id;
      p.peak_mw = r.num("peak_mw", p.peak_mw);
      p.sunrise_s = r.num("sunrise_s", p.sunrise_s);
      p.sunset_s = r.num("sunset_s", p.sunset_s);
      p.step_s = r.num("step_s", p.step_s);
      p.days = static_cast<int>(r.integer("days", p.days));
      p.start_epoch = r.num("start_s", p.start_epoch);
      if (r.has("market")) p.market = read_market(Reader(r.raw("market"), r.sub("market")));
      source.update({{"peak_mw", p.peak_mw}, {"sunrise_s", p.sunrise_s}, {"sunset_s", p.sunset_s},
                     {"step_s", p.step_s}, {"days", p.days}, {"start_s", p.start_epoch}});
      return std::make_shared<const PowerTrace>(synth_solar(p));
    }
    if (kind == "wind") {
      r.only({"kind", "mean_mw", "volatility", "reversion", "seed", "step_s", "days", "start_s", "market"});
      WindParams p;
      p.site_id = id;
      p.mean_mw = r.num("mean_mw", p.mean_mw);
      p.volatility = r.num("volatility", p.volatility);
      p.reversion = r.num("reversion", p.reversion);
      p.seed = r.has("seed") ? static_cast<std::uint64_t>(r.integer("seed")) : derive_seed(seed, index);
      p.step_s = r.num("step_s", p.step_s);
      p.days = static_cast<int>(r.integer("days", p.days));
      p.start_epoch = r.num("start_s", p.start_epoch);
      if (r.has("market")) p.market = read_market(Reader(r.raw("market"), r.sub("market")));
      source.update({{"mean_mw", p.mean_mw}, {"volatility", p.volatility}, {"reversion", p.reversion},
                     {"seed", p.seed}, {"step_s", p.step_s}, {"days", p.days}, {"start_s", p.start_epoch}});
      return std::make_shared<const PowerTrace>(synth_wind(p));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(r.path(), e.what());
  }
  throw ConfigError(r.sub("kind"), "expected csv, solar or wind");
}

inline std::vector<ServerSpec> read_servers(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path, "expected an array");
  std::vector<ServerSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader r(arr[i], at(path, i));
    r.only({"id", "vintage_year", "role", "cores", "ram_gb", "idle_watts", "per_core_watts", "nic_gbps",
            "embodied_kgco2e", "amortization_hours", "count"});
    ServerSpec s;
    s.server_id = r.str("id");
    s.vintage_year = static_cast<int>(r.integer("vintage_year", s.vintage_year));
    const auto role = parse_server_role(r.str("role", "legacy_compute"));
    if (!role) throw ConfigError(r.sub("role"), "expected legacy_compute, ram_dense or flash_dense");
    s.role = *role;
    s.core_count = static_cast<int>(r.integer("cores", s.core_count));
    s.ram_gb = r.num("ram_gb", s.ram_gb);
    s.idle_watts = r.num("idle_watts", s.idle_watts);
    s.per_core_watts = r.num("per_core_watts", s.per_core_watts);
    if (r.has("nic_gbps")) {
      for (const auto& g : r.array("nic_gbps")) {
        if (!g.is_number()) throw ConfigError(r.sub("nic_gbps"), "expected numbers");
        s.nic_gbps.push_back(g.get<double>());
      }
    }
    s.embodied_kgco2e = r.num("embodied_kgco2e", s.embodied_kgco2e);
    s.amortization_hours = r.num("amortization_hours", s.amortization_hours);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.path(), e.what());
    }
    const auto count = r.integer("count", 1);
    if (count < 1) throw ConfigError(r.sub("count"), "must be >= 1");
    if (count == 1) {
      out.push_back(s);
    } else {
      for (std::int64_t k = 0; k < count; ++k) {
        ServerSpec copy = s;
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "-%03lld", static_cast<long long>(k));
        copy.server_id += suffix;
        out.push_back(std::move(copy));
      }
    }
  }
  return out;
}

inline JobSpec read_job(const Reader& r) {
  r.only({"id", "arrival_s", "deadline_s", "tier", "slo", "tasks", "edges"});
  JobSpec j;
  j.job_id = r.str("id");
  j.arrival_s = r.num("arrival_s");
  j.deadline_s = r.num("deadline_s");
  const auto tier = parse_tier(r.str("tier", "standard"));
  if (!tier) throw ConfigError(r.sub("tier"), "expected standard or premium");
  j.tier = *tier;
  if (r.has("slo")) {
    Reader slo(r.raw("slo"), r.sub("slo"));
    slo.only({"min_renewable_fraction", "max_kgco2e"});
    j.slo.min_renewable_fraction = slo.num("min_renewable_fraction", 0.0);
    j.slo.max_kgco2e = slo.num("max_kgco2e", j.slo.max_kgco2e);
  }
  const json& tasks = r.array("tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Reader t(tasks[i], at(r.sub("tasks"), i));
    t.only({"id", "cpu_core_seconds", "ram_gb", "state_gb", "max_parallelism"});
    TaskSpec task;
    task.task_id = t.str("id");
    task.cpu_core_seconds = t.num("cpu_core_seconds");
    task.ram_gb = t.num("ram_gb", 0.0);
    task.state_gb = t.num("state_gb", 0.0);
    task.max_parallelism = static_cast<int>(t.integer("max_parallelism", 1));
    j.tasks.push_back(std::move(task));
  }
  if (r.has("edges")) {
    const json& edges = r.array("edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const json& e = edges[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        throw ConfigError(at(r.sub("edges"), i), "expected [\"before\", \"after\"]");
      j.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }
  return j;
}

}  // namespace detail

// Parses a scenario document. Relative CSV paths resolve against `base_dir`.
// `seed_override` replaces the document's seed (and so every derived seed).
inline ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".",
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
  using detail::at;
  using detail::Reader;
  Reader root(doc, "");
  root.only({"schema_version", "seed", "duration_s", "traces", "sites", "links", "jobs", "policy"});

  ScenarioConfig cfg;
  cfg.schema_version = static_cast<int>(root.integer("schema_version"));
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported schema version " + std::to_string(cfg.schema_version));
  cfg.seed = seed_override ? *seed_override : static_cast<std::uint64_t>(root.integer("seed", 0));
  cfg.duration_s = root.num("duration_s", 0.0);

  const auto& traces = root.raw("traces");
  if (!traces.is_object()) throw ConfigError("traces", "expected an object keyed by trace id");
  std::size_t index = 0;
  for (const auto& [id, body] : traces.items()) {
    nlohmann::json source;
    cfg.traces[id] = detail::read_trace(id, Reader(body, "traces." + id), base_dir, cfg.seed, index++, source);
    cfg.trace_sources[id] = std::move(source);
  }

  const auto& sites = root.array("sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Reader r(sites[i], at("sites", i));
    r.only({"id", "iso", "trace", "overhead_fraction", "cold_storage_gb", "fabric", "fabric_gbps_per_core",
            "spill_gbps_per_server", "servers", "forecast"});
    SiteConfig sc;
    sc.spec.site_id = r.str("id");
    sc.spec.iso_id = r.str("iso", "default");
    sc.spec.trace_ref = r.str("trace");
    sc.spec.overhead_fraction = r.num("overhead_fraction", kDefaultOverheadFraction);
    sc.spec.cold_storage_gb = r.num("cold_storage_gb", 0.0);
    sc.spec.fabric_gbps_per_core = r.num("fabric_gbps_per_core", 0.0);
    sc.spec.spill_gbps_per_server = r.num("spill_gbps_per_server", sc.spec.spill_gbps_per_server);
    if (r.has("fabric")) {
      Reader f(r.raw("fabric"), r.sub("fabric"));
      f.only({"switch_count", "watts_per_switch", "gbps_per_switch", "always_on_core_switches"});
      sc.spec.fabric.switch_count = static_cast<int>(f.integer("switch_count", 1));
      sc.spec.fabric.watts_per_switch = f.num("watts_per_switch", 0.0);
      sc.spec.fabric.gbps_per_switch = f.num("gbps_per_switch", 100.0);
      sc.spec.fabric.always_on_core_switches = static_cast<int>(f.integer("always_on_core_switches", 1));
    }
    sc.spec.servers = detail::read_servers(r.raw("servers"), r.sub("servers"));
    const auto method = parse_forecast_method(r.str("forecast", "oracle"));
    if (!method) throw ConfigError(r.sub("forecast"), "expected oracle, persistence or diurnal");
    sc.forecast = *method;
    cfg.sites.push_back(std::move(sc));
  }

  if (root.has("links")) {
    const auto& links = root.array("links");
    for (std::size_t i = 0; i < links.size(); ++i) {
      Reader r(links[i], at("links", i));
      r.only({"from", "to", "gbps", "latency_s", "per_vm_overhead_s"});
      InterSiteLink l;
      l.from_site = r.str("from");
      l.to_site = r.str("to");
      l.gbps = r.num("gbps", l.gbps);
      l.latency_s = r.num("latency_s", l.latency_s);
      l.per_vm_overhead_s = r.num("per_vm_overhead_s", l.per_vm_overhead_s);
      cfg.links.push_back(std::move(l));
    }
  }

  if (root.has("jobs")) {
    const auto& jobs = root.array("jobs");
    for (std::size_t i = 0; i < jobs.size(); ++i) cfg.jobs.push_back(detail::read_job(Reader(jobs[i], at("jobs", i))));
  }

  if (root.has("policy")) {
    Reader p(root.raw("policy"), "policy");
    p.only({"lead_window_steps", "safety_margin_s", "guard_steps", "progress_loss_on_blackout"});
    const auto lead = p.integer("lead_window_steps", static_cast<std::int64_t>(cfg.policy.lead_window_steps));
    const auto guard = p.integer("guard_steps", static_cast<std::int64_t>(cfg.policy.guard_steps));
    if (lead < 0) throw ConfigError("policy.lead_window_steps", "must be >= 2");
    if (guard < 0) throw ConfigError("policy.guard_steps", "must be >= 1");
    cfg.policy.lead_window_steps = static_cast<std::size_t>(lead);
    cfg.policy.guard_steps = static_cast<std::size_t>(guard);
    cfg.policy.safety_margin_s = p.num("safety_margin_s", cfg.policy.safety_margin_s);
    if (p.has("safety_margin_s") && !(cfg.policy.safety_margin_s >= 0.0))
      throw ConfigError("policy.safety_margin_s", "must be >= 0");
    cfg.policy.progress_loss_on_blackout = p.boolean("progress_loss_on_blackout", false);
  }

  validate_scenario(cfg);
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path,
                                    std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc, path.parent_path(), seed_override);
}

// Normalized echo of a scenario, embedded in reports.
inline nlohmann::json scenario_echo(const ScenarioConfig& cfg) {
  using nlohmann::json;
  json out;
  out["schema_version"] = cfg.schema_version;
  out["seed"] = cfg.seed;
  out["duration_s"] = cfg.duration_s;
  json traces = json::object();
  for (const auto& [id, tr] : cfg.traces) {
    json t;
    auto src = cfg.trace_sources.find(id);
    t["source"] = src == cfg.trace_sources.end() ? json("inline") : src->second;
    t["start_s"] = tr->start();
    t["step_s"] = tr->step();
    t["samples"] = tr->size();
    traces[id] = std::move(t);
  }
  out["traces"] = std::move(traces);
  json sites = json::array();
  for (const auto& sc : cfg.sites) {
    const auto& s = sc.spec;
    json servers = json::array();
    for (const auto& v : s.servers) {
      servers.push_back({{"id", v.server_id}, {"role", std::string(to_string(v.role))},
                         {"vintage_year", v.vintage_year}, {"cores", v.core_count}, {"ram_gb", v.ram_gb},
                         {"idle_watts", v.idle_watts}, {"per_core_watts", v.per_core_watts},
                         {"nic_gbps", v.nic_gbps}, {"embodied_kgco2e", v.embodied_kgco2e},
                         {"amortization_hours", v.amortization_hours}});
    }
    sites.push_back({{"id", s.site_id},
                     {"iso", s.iso_id},
                     {"trace", s.trace_ref},
                     {"overhead_fraction", s.overhead_fraction},
                     {"cold_storage_gb", s.cold_storage_gb},
                     {"fabric",
                      {{"switch_count", s.fabric.switch_count},
                       {"watts_per_switch", s.fabric.watts_per_switch},
                       {"gbps_per_switch", s.fabric.gbps_per_switch},
                       {"always_on_core_switches", s.fabric.always_on_core_switches}}},
                     {"fabric_gbps_per_core", s.fabric_gbps_per_core},
                     {"spill_gbps_per_server", s.spill_gbps_per_server},
                     {"forecast", std::string(to_string(sc.forecast))},
                     {"servers", std::move(servers)}});
  }
  out["sites"] = std::move(sites);
  json links = json::array();
  for (const auto& l : cfg.links)
    links.push_back({{"from", l.from_site}, {"to", l.to_site}, {"gbps", l.gbps}, {"latency_s", l.latency_s},
                     {"per_vm_overhead_s", l.per_vm_overhead_s}});
  out["links"] = std::move(links);
  json jobs = json::array();
  for (const auto& j : cfg.jobs) {
    json tasks = json::array();
    for (const auto& t : j.tasks)
      tasks.push_back({{"id", t.task_id}, {"cpu_core_seconds", t.cpu_core_seconds}, {"ram_gb", t.ram_gb},
                       {"state_gb", t.state_gb}, {"max_parallelism", t.max_parallelism}});
    json edges = json::array();
    for (const auto& [a, b] : j.edges) edges.push_back({a, b});
    json slo = {{"min_renewable_fraction", j.slo.min_renewable_fraction}};
    if (std::isfinite(j.slo.max_kgco2e)) slo["max_kgco2e"] = j.slo.max_kgco2e;
    jobs.push_back({{"id", j.job_id}, {"arrival_s", j.arrival_s}, {"deadline_s", j.deadline_s},
                    {"tier", std::string(to_string(j.tier))}, {"slo", std::move(slo)},
                    {"tasks", std::move(tasks)}, {"edges", std::move(edges)}});
  }
  out["jobs"] = std::move(jobs);
  out["policy"] = {{"lead_window_steps", cfg.policy.lead_window_steps},
                   {"safety_margin_s", cfg.policy.safety_margin_s},
                   {"guard_steps", cfg.policy.guard_steps},
                   {"progress_loss_on_blackout", cfg.policy.progress_loss_on_blackout}};
  return out;
}

}  // namespace sundrop
