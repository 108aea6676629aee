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

// Agent task traces: the data model, the line-delimited JSON file format and
// a synthesizer for baseline-plus-burst memory profiles.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agentcg/common.hpp"

namespace agentcg::trace {

enum class ToolType { Bash, Read, Edit, Write, SubAgent, WebSearch, Other };
enum class BashCategory { Test, PackageInstall, PythonSnippet, FileExploration, Git, Other };

inline constexpr ToolType kAllToolTypes[] = {ToolType::Bash,     ToolType::Read,      ToolType::Edit,
                                             ToolType::Write,    ToolType::SubAgent,  ToolType::WebSearch,
                                             ToolType::Other};
inline constexpr BashCategory kAllBashCategories[] = {
    BashCategory::Test, BashCategory::PackageInstall, BashCategory::PythonSnippet,
    BashCategory::FileExploration, BashCategory::Git, BashCategory::Other};

std::string_view to_string(ToolType t);
std::string_view to_string(BashCategory c);
std::optional<ToolType> parse_tool_type(std::string_view s);
std::optional<BashCategory> parse_bash_category(std::string_view s);

struct Sample {
  Millis ts_ms = 0;
  Bytes mem_bytes = 0;
  // Percent of one core; 100 is one saturated core.
  double cpu_pct = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct ToolCallEvent {
  ToolType tool_type = ToolType::Other;
  Millis start_ms = 0;
  Millis end_ms = 0;
  std::optional<std::string> command;
  // Present exactly when tool_type is Bash.
  std::optional<BashCategory> category;

  Millis duration_ms() const { return end_ms - start_ms; }
  bool contains(Millis t) const { return t >= start_ms && t <= end_ms; }

  friend bool operator==(const ToolCallEvent&, const ToolCallEvent&) = default;
};

struct TaskTrace {
  std::string task_id;
  Millis init_end_ms = 0;
  Millis total_ms = 0;
  std::vector<Sample> samples;
  std::vector<ToolCallEvent> tool_calls;

  friend bool operator==(const TaskTrace&, const TaskTrace&) = default;
};

// Throws ConfigError describing the first violated invariant.
void validate(const TaskTrace& trace);

// Parses the line-delimited format. Malformed input is rejected with a
// ParseError carrying the offending 1-based line number.
TaskTrace parse_trace(std::string_view content);
TaskTrace load_trace(const std::string& path);

std::string serialize_trace(const TaskTrace& trace);
void save_trace(const TaskTrace& trace, const std::string& path);

// Piecewise-linear interpolation of the memory series, exact at sample
// points and held flat outside the sampled range. Requires
// 0 <= t_ms <= total_ms.
Bytes demand_at(const TaskTrace& trace, Millis t_ms);

struct RetryGroupParams {
  std::string command;
  int repetitions = 3;
  double retained_mb_per_retry = 0.0;
};

struct SynthParams {
  std::string task_id = "synthetic";
  double baseline_mb = 185.0;
  double duration_s = 60.0;
  double init_s = 0.0;
  std::vector<std::pair<BashCategory, int>> tool_schedule;
  // Peak memory a burst of the category reaches when it starts from the
  // framework baseline. Values at or below the baseline are increments.
  std::map<BashCategory, double> burst_peak_mb = default_burst_peaks();
  double burst_min_s = 1.0;
  double burst_max_s = 2.0;
  std::vector<RetryGroupParams> retry_groups;
  std::uint64_t seed = 0;

  static std::map<BashCategory, double> default_burst_peaks();
};

// Gap left between consecutive tool windows (and around the schedule) so that
// each inter-call gap holds at least one 1-second sample.
inline constexpr Millis kMinSynthGapMs = 1000;

// Builds a two-layer trace: flat framework baseline plus one symmetric
// triangular burst per tool call. Identical params give identical traces.
// Throws ConfigError when the schedule does not fit the duration.
TaskTrace synthesize_trace(const SynthParams& params);

SynthParams parse_synth_params(std::string_view json);

// Command a synthesized call of the given category carries.
std::string_view default_command(BashCategory c);

}  // namespace agentcg::trace
