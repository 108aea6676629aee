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

// Agent <-> controller intent channel. Upward: a per-tool-call resource hint
// ("memory:low") that maps to a memory.high value. Downward: a fixed-format
// message written to the tool's stderr when a call is killed or throttled,
// and the simulated agent's response to it.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agentcg/common.hpp"
#include "agentcg/trace.hpp"

namespace agentcg::intent {

inline constexpr std::string_view kHintEnvVar = "AGENT_RESOURCE_HINT";

enum class Resource { Memory };
enum class HintLevel { Low, Medium, High };

std::string_view to_string(HintLevel level);

struct ResourceHint {
  Resource resource = Resource::Memory;
  HintLevel level = HintLevel::Medium;

  friend bool operator==(const ResourceHint&, const ResourceHint&) = default;
};

// "<resource>:<level>", case-insensitive. Throws ParseError on anything else;
// callers treat a bad hint as no hint.
ResourceHint parse_hint(std::string_view value);
std::optional<ResourceHint> try_parse_hint(std::string_view value);

struct HintPolicyConfig {
  Bytes low = 64 * kMiB;
  Bytes medium = 512 * kMiB;
  Bytes high = kUnlimited;

  // Low <= Medium <= High (Unlimited compares greatest).
  void validate() const;
};

Bytes hint_to_limits(const ResourceHint& hint, const HintPolicyConfig& config = {});

enum class FeedbackKind { OomKilled, Throttled };

struct FeedbackMessage {
  std::int64_t peak_mb = 0;
  std::int64_t limit_mb = 0;
  std::string suggestion;
  std::string rendered;
};

// Bytes to whole MiB, rounding half up.
std::int64_t round_mib(Bytes b);

FeedbackMessage render_feedback(Bytes peak_bytes, Bytes limit_bytes, FeedbackKind kind);

struct ParsedFeedback {
  FeedbackKind kind;
  std::int64_t peak_mb;
  std::int64_t limit_mb;
};

// Inverse of render_feedback; nullopt if the text is not a feedback line.
std::optional<ParsedFeedback> parse_feedback(std::string_view rendered);

// The simulated agent's retry of a tool window: demand above the window's
// starting level is scaled by rho, the starting level itself is kept.
std::vector<trace::Sample> adapt_on_feedback(std::span<const trace::Sample> window, double rho);

// Peak demand after a retry: baseline + rho * (peak - baseline).
Bytes scaled_peak(Bytes peak, Bytes baseline, double rho);

struct RetryPlan {
  std::vector<Bytes> retry_peaks;
  // True when the last attempt (original or retry) fits under the limit.
  bool fits = false;
};

// Walks the feedback ladder: the original attempt, then up to max_retries
// scaled retries, stopping at the first attempt that fits.
RetryPlan plan_feedback_retries(Bytes peak, Bytes baseline, double rho, int max_retries, Bytes limit);

}  // namespace agentcg::intent
