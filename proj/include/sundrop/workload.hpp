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

// DAG-structured jobs. Tasks are perfectly parallel up to their
// max_parallelism and can be frozen at any instant without losing completed
// work.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sundrop/error.hpp"

namespace sundrop {

struct TaskSpec {
  std::string task_id;
  double cpu_core_seconds = 1.0;
  double ram_gb = 0.0;
  double state_gb = 0.0;
  int max_parallelism = 1;
};

struct SloSpec {
  double min_renewable_fraction = 0.0;
  double max_kgco2e = std::numeric_limits<double>::infinity();

  bool requires_full_renewable() const noexcept { return min_renewable_fraction >= 1.0; }
};

enum class Tier { standard, premium };

inline std::string_view to_string(Tier t) { return t == Tier::premium ? "premium" : "standard"; }

inline std::optional<Tier> parse_tier(std::string_view s) {
  if (s == "standard") return Tier::standard;
  if (s == "premium") return Tier::premium;
  return std::nullopt;
}

struct JobSpec {
  std::string job_id;
  std::vector<TaskSpec> tasks;
  std::vector<std::pair<std::string, std::string>> edges;  // (before, after)
  double arrival_s = 0.0;
  double deadline_s = 0.0;
  SloSpec slo;
  Tier tier = Tier::standard;

  const TaskSpec* find_task(std::string_view id) const {
    for (const auto& t : tasks)
      if (t.task_id == id) return &t;
    return nullptr;
  }

  double total_core_seconds() const {
    double sum = 0.0;
    for (const auto& t : tasks) sum += t.cpu_core_seconds;
    return sum;
  }

  // Largest per-task RAM footprint; a resident job reserves this much.
  double ram_reservation_gb() const {
    double m = 0.0;
    for (const auto& t : tasks) m = std::max(m, t.ram_gb);
    return m;
  }

  void validate() const {
    if (job_id.empty()) throw std::invalid_argument("job_id must be set");
    if (tasks.empty()) throw std::invalid_argument(job_id + ": job has no tasks");
    std::set<std::string> ids;
    for (const auto& t : tasks) {
      if (!ids.insert(t.task_id).second)
        throw std::invalid_argument(job_id + ": duplicate task '" + t.task_id + "'");
      if (!(t.cpu_core_seconds > 0.0) || !std::isfinite(t.cpu_core_seconds))
        throw std::invalid_argument(job_id + "/" + t.task_id + ": cpu_core_seconds must be > 0");
      if (!(t.ram_gb >= 0.0) || !(t.state_gb >= 0.0))
        throw std::invalid_argument(job_id + "/" + t.task_id + ": ram/state must be >= 0");
      if (t.max_parallelism < 1)
        throw std::invalid_argument(job_id + "/" + t.task_id + ": max_parallelism must be >= 1");
    }
    for (const auto& [a, b] : edges) {
      if (!ids.count(a)) throw UnknownTask(job_id + ": edge references unknown task '" + a + "'");
      if (!ids.count(b)) throw UnknownTask(job_id + ": edge references unknown task '" + b + "'");
    }
    if (!(deadline_s > arrival_s)) throw std::invalid_argument(job_id + ": deadline must follow arrival");
    if (!(slo.min_renewable_fraction >= 0.0 && slo.min_renewable_fraction <= 1.0))
      throw std::invalid_argument(job_id + ": min_renewable_fraction must lie in [0, 1]");
    if (!(slo.max_kgco2e >= 0.0)) throw std::invalid_argument(job_id + ": max_kgco2e must be >= 0");
  }
};

// Topological order with ties broken by ascending task_id.
inline std::vector<std::string> validate_dag(const JobSpec& job) {
  std::map<std::string, std::vector<std::string>> succ;
  std::map<std::string, std::vector<std::string>> pred;
  std::map<std::string, int> indegree;
  for (const auto& t : job.tasks) {
    succ[t.task_id];
    pred[t.task_id];
    indegree[t.task_id] = 0;
  }
  for (const auto& [a, b] : job.edges) {
    if (!indegree.count(a)) throw UnknownTask(job.job_id + ": unknown task '" + a + "'");
    if (!indegree.count(b)) throw UnknownTask(job.job_id + ": unknown task '" + b + "'");
    succ[a].push_back(b);
    pred[b].push_back(a);
    ++indegree[b];
  }

  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.insert(id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& next : succ[id])
      if (--indegree[next] == 0) ready.insert(next);
  }
  if (order.size() == indegree.size()) return order;

  // Every leftover task has a leftover predecessor, so walking predecessors
  // from any of them must revisit a task.
  std::set<std::string> left;
  for (const auto& [id, deg] : indegree)
    if (deg > 0) left.insert(id);
  std::vector<std::string> walk;
  std::map<std::string, std::size_t> seen;
  std::string cur = *left.begin();
  while (!seen.count(cur)) {
    seen[cur] = walk.size();
    walk.push_back(cur);
    std::string next;
    for (const auto& p : pred[cur])
      if (left.count(p) && (next.empty() || p < next)) next = p;
    cur = next;
  }
  std::vector<std::string> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen[cur]), walk.end());
  std::reverse(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
  throw CyclicDependency(std::move(cycle));
}

// Tasks whose predecessors are all complete and that are not complete
// themselves, sorted by task_id.
inline std::vector<std::string> ready_tasks(const JobSpec& job, const std::set<std::string>& completed) {
  for (const auto& id : completed)
    if (!job.find_task(id)) throw UnknownTask(job.job_id + ": unknown task '" + id + "'");
  std::set<std::string> blocked;
  for (const auto& [a, b] : job.edges)
    if (!completed.count(a)) blocked.insert(b);
  std::vector<std::string> out;
  for (const auto& t : job.tasks)
    if (!completed.count(t.task_id) && !blocked.count(t.task_id)) out.push_back(t.task_id);
  std::sort(out.begin(), out.end());
  return out;
}

inline int burst_width(const TaskSpec& task, int available_cores) {
  if (available_cores < 0) throw std::invalid_argument("available_cores must be >= 0");
  return std::min(task.max_parallelism, available_cores);
}

// Wall time for `core_seconds` of work at a fixed width.
inline double wall_time(double core_seconds, int width) {
  if (width <= 0) throw std::invalid_argument("width must be > 0");
  return core_seconds / width;
}

}  // namespace sundrop
