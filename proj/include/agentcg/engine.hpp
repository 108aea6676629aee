// Copyright 2026 The agentcg Authors.
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

// Multi-tenant trace replay. Each workload is a session cgroup under a
// shared root with a physical memory budget; the engine walks all sessions
// forward in fixed virtual ticks and lets the chosen policy decide what a
// shortage costs.
//
// All timing is virtual milliseconds of trace time. The acceleration factor
// only converts results to the *_wall_ms fields of the report.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcg/cgroup_tree.hpp"
#include "agentcg/common.hpp"
#include "agentcg/domains.hpp"
#include "agentcg/intent.hpp"
#include "agentcg/policy.hpp"
#include "agentcg/trace.hpp"
#include "json.hpp"

namespace agentcg::engine {

struct WorkloadSpec {
  std::string name;
  trace::TaskTrace trace;
  Priority priority = Priority::Low;
  Bytes memory_high = kUnlimited;
  Bytes memory_max = kUnlimited;
  Bytes memory_low = 0;
  // Keyed by tool-call index within the trace.
  std::map<std::size_t, intent::ResourceHint> hints;
  // Peaks of earlier runs, used by the predictive policy.
  std::vector<Bytes> history_peaks;
};

struct Scenario {
  std::string name = "scenario";
  Bytes physical_budget = 0;
  double acceleration = 50.0;
  Millis tick_ms = 10;
  double high_watermark = 0.90;
  double contention_slope_ms_per_mb = 0.05;
  Millis stall_timeout_ms = 10000;
  policy::PolicySpec policy;
  std::vector<WorkloadSpec> workloads;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LatencyStats {
  std::size_t count = 0;
  double p50_ms = 0;
  double p95_ms = 0;
};

// Nearest-rank percentile; 0 for an empty set.
double percentile(std::vector<double> values, double p);

struct WorkloadMetrics {
  std::string name;
  Priority priority = Priority::Low;
  bool completed = false;
  bool oom_killed = false;
  std::optional<Millis> completion_ms;
  std::optional<Millis> solo_ms;
  std::optional<double> overhead_frac;
  LatencyStats latency;
  Bytes peak_usage = 0;
  int delay_triggers = 0;
  int freezes = 0;
  int feedbacks = 0;
};

struct Event {
  Millis at_ms = 0;
  std::string workload;
  std::string action;
  std::string detail;
};

struct ReplayMetrics {
  std::string scenario;
  policy::PolicySpec policy;
  Bytes physical_budget = 0;
  double acceleration = 1.0;
  Millis tick_ms = 10;
  double high_watermark = 0.9;
  double contention_slope_ms_per_mb = 0;
  Millis stall_timeout_ms = 0;
  std::uint64_t seed = 0;

  std::vector<WorkloadMetrics> workloads;
  double survival_rate = 0;
  LatencyStats high;
  LatencyStats low;
  int delay_trigger_count = 0;
  int freeze_count = 0;
  int feedback_count = 0;
  int kill_count = 0;
  Bytes peak_global_usage = 0;
  Millis end_ms = 0;
  bool truncated = false;
  std::vector<domains::ToolCallReport> tool_calls;
  std::vector<Event> events;

  const WorkloadMetrics& workload(const std::string& name) const;
};

enum class WorkloadStatus { Running, Completed, Killed };

// Read-only view handed to an observer after every tick.
struct TickView {
  Millis now_ms = 0;
  const cg::CgroupTree* tree = nullptr;
  Bytes physical_budget = 0;
  std::vector<std::optional<cg::NodeId>> sessions;
  std::vector<WorkloadStatus> status;
};

using TickObserver = std::function<void(const TickView&)>;

struct ReplayOptions {
  // Fill solo_ms and overhead_frac by replaying each workload alone.
  bool with_solo = true;
  TickObserver observer;
};

ReplayMetrics replay(const Scenario& scenario, const ReplayOptions& options = {});

// Completion time of the workload replayed alone: unlimited budget, no
// limits, static policy. nullopt if it does not complete within the cap.
std::optional<Millis> solo_baseline(const WorkloadSpec& workload, const Scenario& defaults);

struct PolicyDelta {
  policy::PolicyKind baseline;
  policy::PolicyKind policy;
  // (baseline - policy) / baseline; nullopt when the baseline value is 0.
  std::optional<double> high_p95_reduction_frac;
  std::optional<double> low_p95_reduction_frac;
  double survival_delta = 0;
  int kill_delta = 0;
};

struct ComparisonReport {
  std::string scenario;
  std::vector<ReplayMetrics> runs;
  // Every later policy against the first.
  std::vector<PolicyDelta> deltas;
};

ComparisonReport run_comparison(const Scenario& scenario, const std::vector<policy::PolicyKind>& policies);

// Scenario files. Trace paths are resolved against base_dir.
Scenario parse_scenario(std::string_view json, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

nlohmann::ordered_json policy_to_json(const policy::PolicySpec& spec);
nlohmann::ordered_json to_json(const ReplayMetrics& m);
nlohmann::ordered_json to_json(const ComparisonReport& r);

// One row per workload followed by one aggregate row.
std::string csv_header();
std::string to_csv_rows(const ReplayMetrics& m);
std::string to_csv(const ReplayMetrics& m);
std::string to_csv(const ComparisonReport& r);

// Rebuilds CSV rows from a metrics or comparison JSON document.
std::string csv_rows_from_json(const nlohmann::ordered_json& doc);

}  // namespace agentcg::engine
