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

// A SunDrop: fleet + fabric + cold storage behind one power trace.
//
// Power available to the site is split as follows. The overhead fraction is
// reserved for cooling and miscellany. RAM-dense and flash nodes come next
// (they idle whenever the site runs anything). The fabric is sized to the
// activated compute cores. Compute servers get the rest. If the remainder
// cannot light a single core the whole site stays dark.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sundrop/fleet.hpp"
#include "sundrop/network.hpp"
#include "sundrop/trace.hpp"

namespace sundrop {

inline constexpr double kDefaultOverheadFraction = 0.1;

struct SiteSpec {
  std::string site_id;
  std::string iso_id;
  std::vector<ServerSpec> servers;
  FabricSpec fabric;
  double cold_storage_gb = 0.0;
  std::string trace_ref;
  double overhead_fraction = kDefaultOverheadFraction;
  // Fabric demand generated by each activated compute core.
  double fabric_gbps_per_core = 0.0;
  // Sustained spill bandwidth of a compute server towards the RAM nodes.
  double spill_gbps_per_server = 10.0;

  void validate() const {
    if (site_id.empty()) throw std::invalid_argument("site_id must be set");
    if (servers.empty()) throw std::invalid_argument(site_id + ": site needs at least one server");
    if (!(cold_storage_gb >= 0.0)) throw std::invalid_argument(site_id + ": cold_storage_gb must be >= 0");
    if (!(overhead_fraction >= 0.0 && overhead_fraction < 1.0))
      throw std::invalid_argument(site_id + ": overhead_fraction must lie in [0, 1)");
    if (!(fabric_gbps_per_core >= 0.0))
      throw std::invalid_argument(site_id + ": fabric_gbps_per_core must be >= 0");
    fabric.validate();
    std::vector<std::string> ids;
    for (const auto& s : servers) {
      s.validate();
      ids.push_back(s.server_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw std::invalid_argument(site_id + ": duplicate server_id");
  }
};

// Power left for servers once cooling overhead and the fabric are paid.
inline double usable_budget(const SiteSpec& site, const PowerTrace& trace, double t,
                            double fabric_watts) {
  const double raw = power_at(trace, t) * 1e6 * (1.0 - site.overhead_fraction);
  return std::max(0.0, raw - fabric_watts);
}

struct SiteCapacity {
  bool powered = false;
  int active_cores = 0;
  double ram_gb = 0.0;
  // Planned server draw (compute at full activation plus RAM/flash idle).
  double watts_used = 0.0;
  double usable_budget_w = 0.0;
  FabricState fabric;
  // Indexed like Site::compute_servers().
  ActivationPlan plan;
  double infra_watts = 0.0;
};

class Site {
 public:
  Site(SiteSpec spec, std::shared_ptr<const PowerTrace> trace)
      : spec_(std::move(spec)), trace_(std::move(trace)) {
    spec_.validate();
    if (!trace_) throw std::invalid_argument(spec_.site_id + ": missing trace");
    for (const auto& s : spec_.servers) {
      if (s.is_compute()) {
        compute_.push_back(s);
      } else {
        infra_.push_back(s);
        infra_idle_ += s.idle_watts;
      }
    }
    std::sort(compute_.begin(), compute_.end(),
              [](const ServerSpec& a, const ServerSpec& b) { return a.server_id < b.server_id; });
    std::sort(infra_.begin(), infra_.end(),
              [](const ServerSpec& a, const ServerSpec& b) { return a.server_id < b.server_id; });
    table_ = ActivationTable(compute_);
    by_step_.reserve(trace_->size());
    for (const auto& sample : trace_->samples()) by_step_.push_back(capacity_for_power(sample.available_mw));
  }

  const SiteSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return spec_.site_id; }
  const PowerTrace& trace() const noexcept { return *trace_; }
  const std::vector<ServerSpec>& compute_servers() const noexcept { return compute_; }
  const std::vector<ServerSpec>& infra_servers() const noexcept { return infra_; }
  double infra_idle_watts() const noexcept { return infra_idle_; }
  int total_compute_cores() const noexcept { return table_.total_cores(); }

  SiteCapacity capacity_for_power(double available_mw) const {
    SiteCapacity cap;
    const double avail = available_mw * 1e6 * (1.0 - spec_.overhead_fraction);
    cap.usable_budget_w = std::max(0.0, avail);
    const double infra = infra_idle_;
    const auto fabric_watts = [&](int k) {
      try {
        return scale_fabric(spec_.fabric, k * spec_.fabric_gbps_per_core).fabric_watts;
      } catch (const CapacityExceeded&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const int k = table_.max_cores(avail - infra, fabric_watts);
    if (k == 0) {
      cap.plan.active_cores.assign(compute_.size(), 0);
      return cap;
    }
    cap.powered = true;
    cap.active_cores = k;
    cap.plan = table_.plan_for_cores(k);
    cap.fabric = scale_fabric(spec_.fabric, k * spec_.fabric_gbps_per_core);
    cap.infra_watts = infra;
    cap.watts_used = cap.plan.total_watts + infra;
    cap.usable_budget_w = std::max(0.0, avail - cap.fabric.fabric_watts);
    for (std::size_t i = 0; i < compute_.size(); ++i)
      if (cap.plan.active_cores[i] > 0) cap.ram_gb += compute_[i].ram_gb;
    for (const auto& s : infra_)
      if (s.role == ServerRole::ram_dense) cap.ram_gb += s.ram_gb;
    return cap;
  }

  const SiteCapacity& capacity_at_step(std::size_t i) const { return by_step_.at(i); }
  const SiteCapacity& capacity_at(double t) const { return by_step_[trace_->index_at(t)]; }

  // Whether the RAM nodes can serve `attached_servers` compute servers as spill clients.
  bool spill_feasible(int attached_servers) const {
    double nic = 0.0;
    bool any = false;
    for (const auto& s : infra_) {
      if (s.role != ServerRole::ram_dense) continue;
      nic += s.nic_total_gbps();
      any = true;
    }
    if (!any) return true;
    return attached_servers * spec_.spill_gbps_per_server <= nic;
  }

 private:
  SiteSpec spec_;
  std::shared_ptr<const PowerTrace> trace_;
  std::vector<ServerSpec> compute_;
  std::vector<ServerSpec> infra_;
  double infra_idle_ = 0.0;
  ActivationTable table_;
  std::vector<SiteCapacity> by_step_;
};

inline const SiteCapacity& capacity_at(const Site& site, double t) { return site.capacity_at(t); }

}  // namespace sundrop
