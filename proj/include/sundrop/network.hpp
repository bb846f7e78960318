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

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "sundrop/error.hpp"

namespace sundrop {

inline constexpr double kDefaultPerVmOverheadSeconds = 0.05;

// Intra-site fabric treated as one pool of identical switches; a floor of
// core switches stays on whenever the site is powered.
struct FabricSpec {
  int switch_count = 1;
  double watts_per_switch = 0.0;
  double gbps_per_switch = 100.0;
  int always_on_core_switches = 1;

  double capacity_gbps() const noexcept { return switch_count * gbps_per_switch; }
  double max_watts() const noexcept { return switch_count * watts_per_switch; }
  double floor_watts() const noexcept { return always_on_core_switches * watts_per_switch; }

  void validate() const {
    if (switch_count < 1) throw std::invalid_argument("fabric needs at least one switch");
    if (always_on_core_switches < 1 || always_on_core_switches > switch_count)
      throw std::invalid_argument("always_on_core_switches must lie in [1, switch_count]");
    if (!(watts_per_switch >= 0.0)) throw std::invalid_argument("watts_per_switch must be >= 0");
    if (!(gbps_per_switch > 0.0)) throw std::invalid_argument("gbps_per_switch must be > 0");
  }
};

struct FabricState {
  int enabled_switches = 0;
  double fabric_watts = 0.0;
};

inline FabricState scale_fabric(const FabricSpec& fabric, double required_gbps) {
  if (!(required_gbps >= 0.0)) throw std::invalid_argument("required_gbps must be >= 0");
  if (required_gbps > fabric.capacity_gbps())
    throw CapacityExceeded("fabric demand " + std::to_string(required_gbps) + " Gbps exceeds " +
                           std::to_string(fabric.capacity_gbps()) + " Gbps");
  const int needed = static_cast<int>(std::ceil(required_gbps / fabric.gbps_per_switch));
  int enabled = needed > fabric.always_on_core_switches ? needed : fabric.always_on_core_switches;
  if (enabled > fabric.switch_count) enabled = fabric.switch_count;
  return {enabled, enabled * fabric.watts_per_switch};
}

struct InterSiteLink {
  std::string from_site;
  std::string to_site;
  double gbps = 10.0;
  double latency_s = 0.0;
  double per_vm_overhead_s = kDefaultPerVmOverheadSeconds;

  bool connects(const std::string& a, const std::string& b) const noexcept {
    return (from_site == a && to_site == b) || (from_site == b && to_site == a);
  }

  void validate() const {
    if (!(gbps > 0.0)) throw std::invalid_argument("link gbps must be > 0");
    if (!(latency_s >= 0.0)) throw std::invalid_argument("link latency must be >= 0");
    if (!(per_vm_overhead_s >= 0.0)) throw std::invalid_argument("per-VM overhead must be >= 0");
  }
};

// Seconds to move `state_gb` gigabytes and re-home `vm_count` VMs.
inline double transfer_time(double state_gb, const InterSiteLink& link, int vm_count) {
  if (!(state_gb >= 0.0)) throw std::invalid_argument("state_gb must be >= 0");
  if (vm_count < 0) throw std::invalid_argument("vm_count must be >= 0");
  return state_gb * 8.0 / link.gbps + link.latency_s + vm_count * link.per_vm_overhead_s;
}

}  // namespace sundrop
