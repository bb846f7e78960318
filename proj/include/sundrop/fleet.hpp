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

// Server power model, budgeted core activation and embodied-carbon
// amortization.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sundrop/error.hpp"

namespace sundrop {

enum class ServerRole { legacy_compute, ram_dense, flash_dense };

inline std::string_view to_string(ServerRole r) {
  switch (r) {
    case ServerRole::legacy_compute: return "legacy_compute";
    case ServerRole::ram_dense: return "ram_dense";
    case ServerRole::flash_dense: return "flash_dense";
  }
  return "?";
}

inline std::optional<ServerRole> parse_server_role(std::string_view s) {
  if (s == "legacy_compute") return ServerRole::legacy_compute;
  if (s == "ram_dense") return ServerRole::ram_dense;
  if (s == "flash_dense") return ServerRole::flash_dense;
  return std::nullopt;
}

inline constexpr double kDefaultAmortizationHours = 43800.0;  // 5 years

struct ServerSpec {
  std::string server_id;
  int vintage_year = 2012;
  ServerRole role = ServerRole::legacy_compute;
  int core_count = 1;
  double ram_gb = 0.0;
  double idle_watts = 0.0;
  double per_core_watts = 1.0;
  std::vector<double> nic_gbps;
  double embodied_kgco2e = 0.0;
  double amortization_hours = kDefaultAmortizationHours;

  bool is_compute() const noexcept { return role == ServerRole::legacy_compute; }

  double nic_total_gbps() const noexcept {
    return std::accumulate(nic_gbps.begin(), nic_gbps.end(), 0.0);
  }

  void validate() const {
    if (server_id.empty()) throw std::invalid_argument("server_id must be set");
    if (core_count < 1) throw std::invalid_argument(server_id + ": core_count must be >= 1");
    if (!(per_core_watts > 0.0)) throw std::invalid_argument(server_id + ": per_core_watts must be > 0");
    if (!(idle_watts >= 0.0)) throw std::invalid_argument(server_id + ": idle_watts must be >= 0");
    if (!(ram_gb >= 0.0)) throw std::invalid_argument(server_id + ": ram_gb must be >= 0");
    if (!(embodied_kgco2e >= 0.0))
      throw std::invalid_argument(server_id + ": embodied_kgco2e must be >= 0");
    if (!(amortization_hours > 0.0))
      throw std::invalid_argument(server_id + ": amortization_hours must be > 0");
    if (role == ServerRole::legacy_compute && embodied_kgco2e != 0.0)
      throw std::invalid_argument(server_id + ": legacy servers carry no embodied carbon");
    for (double g : nic_gbps)
      if (!(g >= 0.0)) throw std::invalid_argument(server_id + ": NIC capacity must be >= 0");
  }
};

// Affine draw: idle + active_cores * per_core when powered, zero otherwise.
inline double power_draw(const ServerSpec& server, int active_cores, bool powered_on) {
  if (active_cores < 0) throw std::invalid_argument("active_cores must be >= 0");
  if (active_cores > server.core_count)
    throw CoreOverflow(server.server_id + ": " + std::to_string(active_cores) + " cores requested, " +
                       std::to_string(server.core_count) + " available");
  if (!powered_on) {
    if (active_cores > 0) throw std::invalid_argument("active cores on a powered-off server");
    return 0.0;
  }
  return server.idle_watts + active_cores * server.per_core_watts;
}

inline double watts_per_core(const ServerSpec& server, int active_cores) {
  if (active_cores < 1) throw std::invalid_argument("watts per core needs at least one active core");
  return power_draw(server, active_cores, true) / active_cores;
}

inline double embodied_rate(const ServerSpec& server) {
  if (!(server.amortization_hours > 0.0))
    throw std::invalid_argument("amortization_hours must be > 0");
  if (server.role == ServerRole::legacy_compute) return 0.0;
  return server.embodied_kgco2e / server.amortization_hours;
}

// A RAM node can host `attached_count` spilling servers when their combined
// sustained bandwidth fits within its NICs.
inline bool ram_spill_feasible(const ServerSpec& ram_node, int attached_count,
                               double per_server_gbps) {
  if (attached_count < 0) throw std::invalid_argument("attached_count must be >= 0");
  return attached_count * per_server_gbps <= ram_node.nic_total_gbps();
}

struct ActivationPlan {
  // Indexed like the server list the plan was computed for.
  std::vector<int> active_cores;
  double total_watts = 0.0;
  int total_active_cores = 0;
};

// Exact budgeted activation. Precomputes, for every achievable core count k,
// the minimum draw that lights exactly k cores (a grouped knapsack over
// per-server core counts), so repeated budget queries are cheap.
//
// Among plans with the maximum core count, the one with the least draw is
// chosen; remaining ties give each server, in ascending server_id order, as
// many cores as possible.
class ActivationTable {
 public:
  ActivationTable() = default;

  explicit ActivationTable(std::span<const ServerSpec> servers) : count_(servers.size()) {
    order_.resize(servers.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return servers[a].server_id < servers[b].server_id;
    });
    for (std::size_t idx : order_) {
      const auto& s = servers[idx];
      cores_.push_back(s.core_count);
      idle_.push_back(s.idle_watts);
      per_core_.push_back(s.per_core_watts);
      total_cores_ += s.core_count;
    }

    const std::size_t n = order_.size();
    const std::size_t width = static_cast<std::size_t>(total_cores_) + 1;
    best_.assign((n + 1) * width, kInf);
    best_[n * width + 0] = 0.0;
    int suffix_cores = 0;
    for (std::size_t i = n; i-- > 0;) {
      suffix_cores += cores_[i];
      for (int k = 0; k <= suffix_cores; ++k) {
        double best = kInf;
        for (int c = 0; c <= std::min(cores_[i], k); ++c) {
          const double rest = at(i + 1, k - c);
          if (rest == kInf) continue;
          best = std::min(best, cost(i, c) + rest);
        }
        at(i, k) = best;
      }
    }
  }

  int total_cores() const noexcept { return total_cores_; }

  // Minimum draw lighting exactly k cores.
  double min_watts(int k) const {
    if (k < 0 || k > total_cores_) throw std::out_of_range("core count outside fleet");
    return at(0, k);
  }

  // Largest k whose minimum draw fits the budget. `extra` adds a core-count
  // dependent overhead (for example fabric power) to the check.
  template <typename Extra>
  int max_cores(double budget_watts, Extra&& extra) const {
    for (int k = total_cores_; k > 0; --k) {
      const double w = at(0, k);
      if (w == kInf) continue;
      const double e = extra(k);
      if (e == kInf) continue;
      if (w + e <= budget_watts) return k;
    }
    return 0;
  }

  int max_cores(double budget_watts) const {
    return max_cores(budget_watts, [](int) { return 0.0; });
  }

  ActivationPlan plan_for_cores(int k) const {
    ActivationPlan plan;
    plan.active_cores.assign(count_, 0);
    if (k <= 0) return plan;
    (void)min_watts(k);
    int remaining = k;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const double goal = at(i, remaining);
      const double tol = 1e-9 * std::max(1.0, std::abs(goal));
      for (int c = std::min(cores_[i], remaining); c >= 0; --c) {
        const double rest = at(i + 1, remaining - c);
        if (rest == kInf) continue;
        if (cost(i, c) + rest <= goal + tol) {
          plan.active_cores[order_[i]] = c;
          plan.total_watts += cost(i, c);
          remaining -= c;
          break;
        }
      }
    }
    if (remaining != 0) throw std::logic_error("activation reconstruction failed");
    plan.total_active_cores = k;
    return plan;
  }

  ActivationPlan plan_for_budget(double budget_watts) const {
    if (!(budget_watts >= 0.0)) throw std::invalid_argument("budget must be >= 0");
    return plan_for_cores(max_cores(budget_watts));
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double cost(std::size_t i, int c) const {
    return c == 0 ? 0.0 : idle_[i] + c * per_core_[i];
  }
  double& at(std::size_t i, int k) {
    return best_[i * (static_cast<std::size_t>(total_cores_) + 1) + static_cast<std::size_t>(k)];
  }
  double at(std::size_t i, int k) const {
    return best_[i * (static_cast<std::size_t>(total_cores_) + 1) + static_cast<std::size_t>(k)];
  }

  std::size_t count_ = 0;
  std::vector<std::size_t> order_;
  std::vector<int> cores_;
  std::vector<double> idle_;
  std::vector<double> per_core_;
  int total_cores_ = 0;
  std::vector<double> best_{0.0};
};

inline ActivationPlan activate_for_budget(std::span<const ServerSpec> servers, double budget_watts) {
  return ActivationTable(servers).plan_for_budget(budget_watts);
}

}  // namespace sundrop
