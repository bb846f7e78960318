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

// Subcommand bodies of the `sundrop` tool. Argument parsing lives in
// tools/sundrop.cpp; these functions take parsed options and return the
// process exit code.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure
// (an internal assertion or an I/O error while writing results).

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sundrop/economics.hpp"
#include "sundrop/engine.hpp"
#include "sundrop/error.hpp"
#include "sundrop/report.hpp"
#include "sundrop/scenario.hpp"
#include "sundrop/siting.hpp"
#include "sundrop/trace.hpp"

namespace sundrop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::vector<std::filesystem::path> configs;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  bool sweep = false;
};

inline int simulate_one(const std::filesystem::path& config, const std::filesystem::path& out_dir,
                        std::optional<std::uint64_t> seed, std::string& message) {
  try {
    const ScenarioConfig cfg = load_scenario(config, seed);
    const SimResult result = run(cfg);
    write_outputs(out_dir, cfg, result);
    return kExitOk;
  } catch (const ConfigError& e) {
    message = config.string() + ": config error at " + e.path() + ": " + e.what();
    return kExitUsage;
  } catch (const std::exception& e) {
    message = config.string() + ": " + e.what();
    return kExitRuntime;
  }
}

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& err) {
  if (opt.configs.empty()) {
    err << "simulate: no config given\n";
    return kExitUsage;
  }
  if (opt.configs.size() > 1 && !opt.sweep) {
    err << "simulate: several configs need --sweep\n";
    return kExitUsage;
  }
  if (!opt.sweep) {
    std::string message;
    const int rc = simulate_one(opt.configs.front(), opt.out_dir, opt.seed, message);
    if (rc != kExitOk) err << message << '\n';
    return rc;
  }

  // Each scenario runs in isolation; results are reported in argument order.
  std::vector<std::future<std::pair<int, std::string>>> runs;
  for (const auto& config : opt.configs) {
    const auto dir = opt.out_dir / config.stem();
    runs.push_back(std::async(std::launch::async, [config, dir, seed = opt.seed] {
      std::string message;
      const int rc = simulate_one(config, dir, seed, message);
      return std::make_pair(rc, message);
    }));
  }
  int worst = kExitOk;
  for (auto& f : runs) {
    auto [rc, message] = f.get();
    if (rc != kExitOk) err << message << '\n';
    worst = std::max(worst, rc);
  }
  return worst;
}

// -------------------------------------------------------------------- econ

struct EconOptions {
  double storage_usd_per_kwh = econ::EconConstants{}.battery_usd_per_kwh;
  std::optional<double> opportunity_twh;
};

struct EconTable {
  econ::Money caiso_storage;
  econ::Money miso_storage;
  double projection_twh = 0.0;
  double coverage_low = 0.0;
  double coverage_high = 0.0;
};

// With `opportunity_twh` set, that single figure replaces every opportunity
// energy input (both grids, the projection base and the coverage band).
inline EconTable econ_table(const EconOptions& opt, const econ::EconConstants& k = {}) {
  k.validate();
  const double caiso = opt.opportunity_twh.value_or(k.caiso_opportunity_twh);
  const double miso = opt.opportunity_twh.value_or(k.miso_opportunity_twh);
  const double low = opt.opportunity_twh.value_or(k.combined_opportunity_twh_low);
  const double high = opt.opportunity_twh.value_or(k.combined_opportunity_twh_high);
  EconTable t;
  t.caiso_storage = econ::one_hour_storage_cost(caiso, opt.storage_usd_per_kwh, k.hours_per_year);
  t.miso_storage = econ::one_hour_storage_cost(miso, opt.storage_usd_per_kwh, k.hours_per_year);
  t.projection_twh = econ::growth_projection(caiso, k.caiso_cagr, k.projection_years);
  t.coverage_low = econ::dc_coverage_fraction(low, k.dc_annual_twh);
  t.coverage_high = econ::dc_coverage_fraction(high, k.dc_annual_twh);
  return t;
}

inline int cmd_econ(const EconOptions& opt, std::ostream& out, std::ostream& err) {
  EconTable t;
  try {
    t = econ_table(opt);
  } catch (const std::invalid_argument& e) {
    err << "econ: " << e.what() << '\n';
    return kExitUsage;
  }
  auto money = [](econ::Money m) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << m.dollars() / 1e6 << " M USD";
    return s.str();
  };
  auto fixed = [](double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  out << std::left << std::setw(44) << "quantity" << "value\n";
  out << std::setw(44) << "caiso_one_hour_storage" << money(t.caiso_storage) << '\n';
  out << std::setw(44) << "miso_one_hour_storage" << money(t.miso_storage) << '\n';
  out << std::setw(44) << "caiso_2025_projection" << fixed(t.projection_twh, 2) << " TWh\n";
  out << std::setw(44) << "datacenter_coverage_low" << fixed(t.coverage_low, 4) << '\n';
  out << std::setw(44) << "datacenter_coverage_high" << fixed(t.coverage_high, 4) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- synth

inline int cmd_synth_solar(const SolarParams& p, const std::filesystem::path& out_path, std::ostream& err) {
  try {
    const PowerTrace trace = synth_solar(p);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      err << "synth: cannot write '" << out_path.string() << "'\n";
      return kExitRuntime;
    }
    write_trace_csv(out, trace);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "synth solar: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline int cmd_synth_wind(const WindParams& p, const std::filesystem::path& out_path, std::ostream& err) {
  try {
    const PowerTrace trace = synth_wind(p);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      err << "synth: cannot write '" << out_path.string() << "'\n";
      return kExitRuntime;
    }
    write_trace_csv(out, trace);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "synth wind: " << e.what() << '\n';
    return kExitUsage;
  }
}

// -------------------------------------------------------------------- site

struct SiteOptions {
  std::filesystem::path candidates_dir;
  int k = 1;
  double demand_mw = 0.0;
  SitingObjective objective = SitingObjective::time_coverage;
};

// Every *.csv file in the directory is one candidate named after its stem.
inline std::vector<CandidateSite> load_candidates(const std::filesystem::path& dir, double min_mw) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<CandidateSite> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    out.push_back(make_candidate(f.stem().string(), parse_trace_csv(in), min_mw));
  }
  return out;
}

inline int cmd_site(const SiteOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<CandidateSite> candidates;
  try {
    candidates = load_candidates(opt.candidates_dir, opt.demand_mw);
  } catch (const std::exception& e) {
    err << "site: " << e.what() << '\n';
    return kExitUsage;
  }
  if (candidates.empty()) {
    err << "site: no *.csv candidates in '" << opt.candidates_dir.string() << "'\n";
    return kExitUsage;
  }
  if (opt.k < 1 || static_cast<std::size_t>(opt.k) > candidates.size()) {
    err << "site: -k must lie in [1, " << candidates.size() << "]\n";
    return kExitUsage;
  }
  SitingResult r;
  try {
    r = greedy_siting(candidates, opt.k, opt.demand_mw, opt.objective);
  } catch (const std::exception& e) {
    err << "site: " << e.what() << '\n';
    return kExitUsage;
  }
  out << std::left << std::setw(24) << "location_id" << std::setw(14) << "duty_factor" << "peak_mw\n";
  for (const auto& id : r.chosen) {
    for (const auto& c : candidates) {
      if (c.location_id != id) continue;
      out << std::setw(24) << id << std::setw(14) << detail::format_double(c.duty_factor)
          << detail::format_double(c.peak_opportunity_mw) << '\n';
    }
  }
  out << "coverage " << detail::format_double(r.coverage) << '\n';
  if (opt.objective == SitingObjective::energy)
    out << "mean_best_opportunity_mw " << detail::format_double(r.objective) << '\n';
  return kExitOk;
}

}  // namespace sundrop::cli
