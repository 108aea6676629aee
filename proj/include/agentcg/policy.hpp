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

// Enforcement strategies compared by the replay engine, and the pure decision
// functions behind them. Per-node state is owned by the engine.

#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "agentcg/cgroup_tree.hpp"
#include "agentcg/common.hpp"
#include "agentcg/intent.hpp"

namespace agentcg::policy {

enum class PolicyKind { StaticLimits, ReactiveUserSpace, Predictive, GraduatedInKernel, IntentDriven };

// Short names used in scenario files and on the command line:
// static, reactive, predictive, graduated, intent.
std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct GraduatedParams {
  double delay_slope_ms_per_mb = 10.0;
  double max_delay_ms = 2000.0;
  int freeze_after_consecutive_throttles = 20;
  Millis feedback_after_frozen_ms = 5000;
  bool kill_as_last_resort = true;
};

struct ReactiveParams {
  Millis reaction_latency_ms = 50;
  double pressure_threshold = 0.95;
  Millis window_ms = 1000;
};

struct PredictiveParams {
  double percentile = 95.0;
  // Peaks of earlier runs; a workload's own history overrides this.
  std::vector<Bytes> history_peaks;
};

struct IntentParams {
  double reduction_factor = 0.5;
  int max_retries = 2;
  intent::HintPolicyConfig hints;
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::StaticLimits;
  GraduatedParams graduated;
  ReactiveParams reactive;
  PredictiveParams predictive;
  IntentParams intent;

  bool has_delay_mechanism() const {
    return kind == PolicyKind::GraduatedInKernel || kind == PolicyKind::IntentDriven;
  }
  void validate() const;
};

struct PressureSignal {
  double global_utilization = 0;
  std::optional<cg::NodeId> breaching_node;
  Bytes overshoot_bytes = 0;
  bool high_priority_stalled = false;
};

// The memory.high breach delay. Zero for policies without a delay hook and
// for High priority; otherwise linear in the overshoot, clamped to
// max_delay_ms, and pinned to max_delay_ms while a High session stalls.
double throttle_delay(const PolicySpec& spec, Priority priority, const PressureSignal& signal);

enum class Action { None, Throttle, Freeze, Feedback, Kill };

std::string_view to_string(Action a);

struct EscalationState {
  // Includes the throttle being decided on.
  int consecutive_throttles = 0;
  bool frozen = false;
  Millis frozen_for_ms = 0;
  int feedback_retries_used = 0;
};

struct FeedbackBudget {
  bool enabled = false;
  int max_retries = 0;
};

// Throttle -> Freeze -> (Feedback) -> Kill. Kill is only reachable from the
// frozen state and only when kill_as_last_resort is set.
Action graduated_step(const EscalationState& state, const GraduatedParams& params, const FeedbackBudget& feedback);

struct UtilizationSample {
  Millis ts_ms = 0;
  double utilization = 0;
};

struct ScheduledAction {
  Millis observed_at_ms = 0;
  Millis execute_at_ms = 0;
};

// oomd-style daemon decision: when the window mean reaches the threshold, a
// kill of the lowest-priority session is scheduled reaction_latency_ms later.
// Returns nothing while the history does not yet span window_ms.
std::optional<ScheduledAction> reactive_decide(std::span<const UtilizationSample> history,
                                               const ReactiveParams& params, Millis now_ms);

// Re-validation at execution time: the action is skipped once utilization has
// dropped below the threshold.
bool reactive_still_valid(double current_utilization, const ReactiveParams& params);

// Nearest-rank percentile of historical peaks (rank = ceil(p/100 * n)).
Bytes predictive_limit(std::span<const Bytes> history_peaks, double percentile);

}  // namespace agentcg::policy
