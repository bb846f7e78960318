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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sundrop/cli.hpp"

int main(int argc, char** argv) {
  using namespace sundrop;
  CLI::App app{"sundrop: simulate compute on opportunity power"};
  app.require_subcommand(1);

  cli::SimulateOptions sim;
  std::vector<std::string> configs;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "run scenario files and write report files");
  simulate->add_option("config", configs, "scenario JSON file(s)")->required();
  simulate->add_option("-o,--out", out_dir, "output directory")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_flag("--sweep", sim.sweep, "run several scenarios concurrently into <out>/<stem>/");

  cli::EconOptions econ;
  double opportunity = 0.0;
  auto* econ_cmd = app.add_subcommand("econ", "print the storage, projection and coverage figures");
  econ_cmd->add_option("--storage-usd-per-kwh", econ.storage_usd_per_kwh, "battery storage cost");
  auto* opp_opt = econ_cmd->add_option("--opportunity-twh", opportunity, "replace every opportunity energy input");

  auto* synth = app.add_subcommand("synth", "write a synthetic trace CSV");
  synth->require_subcommand(1);
  SolarParams solar;
  std::string solar_out;
  auto* solar_cmd = synth->add_subcommand("solar", "half-sine daylight trace");
  solar_cmd->add_option("--peak-mw", solar.peak_mw);
  solar_cmd->add_option("--sunrise-s", solar.sunrise_s, "seconds after midnight");
  solar_cmd->add_option("--sunset-s", solar.sunset_s, "seconds after midnight");
  solar_cmd->add_option("--step-s", solar.step_s);
  solar_cmd->add_option("--days", solar.days);
  solar_cmd->add_option("--site-id", solar.site_id);
  solar_cmd->add_option("-o,--out", solar_out)->required();
  WindParams wind;
  std::string wind_out;
  auto* wind_cmd = synth->add_subcommand("wind", "mean-reverting random wind trace");
  wind_cmd->add_option("--mean-mw", wind.mean_mw);
  wind_cmd->add_option("--volatility", wind.volatility);
  wind_cmd->add_option("--reversion", wind.reversion);
  wind_cmd->add_option("--seed", wind.seed);
  wind_cmd->add_option("--step-s", wind.step_s);
  wind_cmd->add_option("--days", wind.days);
  wind_cmd->add_option("--site-id", wind.site_id);
  wind_cmd->add_option("-o,--out", wind_out)->required();

  cli::SiteOptions site;
  std::string candidates;
  std::string objective = "coverage";
  auto* site_cmd = app.add_subcommand("site", "pick K locations maximizing opportunity coverage");
  site_cmd->add_option("--candidates", candidates, "directory of trace CSV files")->required();
  site_cmd->add_option("-k", site.k, "number of sites")->required();
  site_cmd->add_option("--demand-mw", site.demand_mw, "minimum opportunity power")->required();
  site_cmd->add_option("--objective", objective, "coverage or energy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }

  if (simulate->parsed()) {
    for (const auto& c : configs) sim.configs.emplace_back(c);
    sim.out_dir = out_dir;
    if (seed_opt->count() > 0) sim.seed = seed;
    return cli::cmd_simulate(sim, std::cerr);
  }
  if (econ_cmd->parsed()) {
    if (opp_opt->count() > 0) econ.opportunity_twh = opportunity;
    return cli::cmd_econ(econ, std::cout, std::cerr);
  }
  if (solar_cmd->parsed()) return cli::cmd_synth_solar(solar, solar_out, std::cerr);
  if (wind_cmd->parsed()) return cli::cmd_synth_wind(wind, wind_out, std::cerr);
  if (site_cmd->parsed()) {
    site.candidates_dir = candidates;
    const auto obj = parse_siting_objective(objective);
    if (!obj) {
      std::cerr << "site: --objective must be coverage or energy\n";
      return cli::kExitUsage;
    }
    site.objective = *obj;
    return cli::cmd_site(site, std::cout, std::cerr);
  }
  return cli::kExitUsage;
}
