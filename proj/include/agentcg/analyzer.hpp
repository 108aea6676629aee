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

// Workload characterization metrics over agent task traces. Every function is
// pure; traces are never modified.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agentcg/trace.hpp"
#include "json.hpp"

namespace agentcg::analyzer {

using trace::BashCategory;
using trace::TaskTrace;
using trace::ToolCallEvent;
using trace::ToolType;

struct PhaseShares {
  double init_frac = 0;
  double tool_frac = 0;
  double llm_frac = 0;
};

PhaseShares phase_breakdown(const TaskTrace& trace);

// max(mem) / mean(mem). Throws ConfigError on an empty trace or zero mean.
double peak_to_avg(const TaskTrace& trace);

struct BurstAttribution {
  double tool_time_frac = 0;
  double tool_burst_frac = 0;
  std::size_t burst_count = 0;
};

// A burst is a post-initialization sample with mem >= threshold. With no
// bursts the burst fraction is reported as 0.
BurstAttribution burst_attribution(const TaskTrace& trace, Bytes threshold_bytes);

inline constexpr Bytes kDefaultBurstThreshold = 300 * kMiB;

struct RateHistogram {
  // Bucket edges in MB/s; bucket i covers [edges[i-1], edges[i]), with open
  // ends below the first and above the last edge.
  static constexpr std::array<double, 8> kEdgesMbPerS = {-1000, -100, -50, -20, 20, 50, 100, 1000};
  std::array<std::size_t, kEdgesMbPerS.size() + 1> counts{};
};

struct ChangeRateStats {
  double cpu_burst_frac = 0;
  double mem_burst_frac = 0;
  // Largest |dmem/dt| in bytes per second.
  double max_mem_rate = 0;
  double max_cpu_rate = 0;
  RateHistogram mem_histogram;
};

// Rates are per interval between consecutive samples; a burst is an interval
// whose |rate| reaches the threshold.
ChangeRateStats change_rate_stats(const TaskTrace& trace, double cpu_thr_pct_per_s = 20.0,
                                  double mem_thr_bytes_per_s = 50.0 * kMiB);

struct RetryGroup {
  std::string command;
  // Positions in the Bash-only call sequence.
  std::size_t start_index = 0;
  std::size_t length = 0;
  double retained_mb = 0;
};

// Collapses whitespace and drops trailing shell redirections.
std::string normalize_command(std::string_view command);

std::vector<RetryGroup> detect_retry_groups(std::span<const ToolCallEvent> calls, const TaskTrace& trace);

// Pearson correlation of per-sample (cpu, mem); nullopt when either series
// has no variance.
std::optional<double> cpu_mem_correlation(const TaskTrace& trace);

std::map<ToolType, double> tool_time_shares(std::span<const ToolCallEvent> calls);
std::map<BashCategory, double> bash_category_shares(std::span<const ToolCallEvent> calls);

BashCategory categorize_bash(std::string_view command);

struct CrossTaskStats {
  double peak_cv = 0;
  Bytes peak_min = 0;
  Bytes peak_max = 0;
  double mean_cpu = 0;
};

CrossTaskStats cross_task_stats(std::span<const TaskTrace> traces);

// Tool-call starts per tool type, bucketed by progress decile of the task.
using ProgressHistogram = std::map<ToolType, std::array<std::size_t, 10>>;
ProgressHistogram tool_progress_histogram(const TaskTrace& trace);

// Report documents for the analyze command: one object per task plus, for two
// or more tasks, an aggregate block.
nlohmann::ordered_json task_report(const TaskTrace& trace, Bytes burst_threshold = kDefaultBurstThreshold);
nlohmann::ordered_json analysis_report(std::span<const TaskTrace> traces,
                                       Bytes burst_threshold = kDefaultBurstThreshold);
std::string analysis_csv(const nlohmann::ordered_json& report);

}  // namespace agentcg::analyzer
