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

#include "agentcg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace agentcg::policy {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::StaticLimits: return "static";
    case PolicyKind::ReactiveUserSpace: return "reactive";
    case PolicyKind::Predictive: return "predictive";
    case PolicyKind::GraduatedInKernel: return "graduated";
    case PolicyKind::IntentDriven: return "intent";
  }
  return "static";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::StaticLimits, PolicyKind::ReactiveUserSpace, PolicyKind::Predictive,
                       PolicyKind::GraduatedInKernel, PolicyKind::IntentDriven}) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::None: return "none";
    case Action::Throttle: return "throttle";
    case Action::Freeze: return "freeze";
    case Action::Feedback: return "feedback";
    case Action::Kill: return "kill";
  }
  return "none";
}

void PolicySpec::validate() const {
  if (graduated.delay_slope_ms_per_mb < 0) throw ConfigError("policy: delay_slope_ms_per_mb must be >= 0");
  if (!(graduated.max_delay_ms > 0)) throw ConfigError("policy: max_delay_ms must be > 0");
  if (graduated.freeze_after_consecutive_throttles < 1) throw ConfigError("policy: freeze threshold must be >= 1");
  if (graduated.feedback_after_frozen_ms < 0) throw ConfigError("policy: feedback_after_frozen_ms must be >= 0");
  if (reactive.reaction_latency_ms < 0 || reactive.window_ms < 0) throw ConfigError("policy: negative reactive duration");
  if (!(predictive.percentile > 0 && predictive.percentile <= 100)) {
    throw ConfigError("policy: percentile must lie in (0, 100]");
  }
  if (!(intent.reduction_factor > 0 && intent.reduction_factor < 1)) {
    throw ConfigError("policy: reduction_factor must lie in (0, 1)");
  }
  if (intent.max_retries < 0) throw ConfigError("policy: max_retries must be >= 0");
  intent.hints.validate();
}

double throttle_delay(const PolicySpec& spec, Priority priority, const PressureSignal& signal) {
  if (!spec.has_delay_mechanism() || priority == Priority::High) return 0.0;
  const GraduatedParams& g = spec.graduated;
  if (signal.high_priority_stalled) return g.max_delay_ms;
  const double delay = g.delay_slope_ms_per_mb * to_mib(std::max<Bytes>(signal.overshoot_bytes, 0));
  return std::clamp(delay, 0.0, g.max_delay_ms);
}

Action graduated_step(const EscalationState& s, const GraduatedParams& p, const FeedbackBudget& fb) {
  if (s.frozen) {
    if (s.frozen_for_ms < p.feedback_after_frozen_ms) return Action::Freeze;
    if (fb.enabled && s.feedback_retries_used < fb.max_retries) return Action::Feedback;
    return p.kill_as_last_resort ? Action::Kill : Action::Freeze;
  }
  if (s.consecutive_throttles <= 0) return Action::None;
  if (s.consecutive_throttles < p.freeze_after_consecutive_throttles) return Action::Throttle;
  return Action::Freeze;
}

std::optional<ScheduledAction> reactive_decide(std::span<const UtilizationSample> history,
                                               const ReactiveParams& params, Millis now_ms) {
  if (history.empty() || history.front().ts_ms > now_ms - params.window_ms) return std::nullopt;
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : history) {
    if (s.ts_ms > now_ms - params.window_ms && s.ts_ms <= now_ms) {
      sum += s.utilization;
      ++n;
    }
  }
  if (n == 0 || sum / static_cast<double>(n) < params.pressure_threshold) return std::nullopt;
  return ScheduledAction{now_ms, now_ms + params.reaction_latency_ms};
}

bool reactive_still_valid(double current_utilization, const ReactiveParams& params) {
  return current_utilization >= params.pressure_threshold;
}

Bytes predictive_limit(std::span<const Bytes> history_peaks, double percentile) {
  if (history_peaks.empty()) throw ConfigError("predictive_limit: empty history");
  if (!(percentile > 0 && percentile <= 100)) throw ConfigError("predictive_limit: percentile must lie in (0, 100]");
  std::vector<Bytes> sorted(history_peaks.begin(), history_peaks.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Small epsilon keeps exact products like 0.95 * 20 from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace agentcg::policy
