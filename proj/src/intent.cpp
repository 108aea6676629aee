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

#include "agentcg/intent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

namespace agentcg::intent {

namespace {

constexpr std::string_view kPrefix = "[agentcgroup] tool call ";
constexpr std::string_view kSuggestion =
    "reduce scope (e.g., run a subset of tests or lower parallelism) and retry.";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(HintLevel level) {
  switch (level) {
    case HintLevel::Low: return "low";
    case HintLevel::Medium: return "medium";
    case HintLevel::High: return "high";
  }
  return "medium";
}

ResourceHint parse_hint(std::string_view value) {
  const auto colon = value.find(':');
  if (colon == std::string_view::npos || value.find(':', colon + 1) != std::string_view::npos) {
    throw ParseError("malformed resource hint '" + std::string(value) + "'");
  }
  const std::string resource = lower(value.substr(0, colon));
  const std::string level = lower(value.substr(colon + 1));
  if (resource != "memory") throw ParseError("unknown resource '" + resource + "' in hint");
  ResourceHint hint;
  if (level == "low") {
    hint.level = HintLevel::Low;
  } else if (level == "medium") {
    hint.level = HintLevel::Medium;
  } else if (level == "high") {
    hint.level = HintLevel::High;
  } else {
    throw ParseError("unknown level '" + level + "' in hint");
  }
  return hint;
}

std::optional<ResourceHint> try_parse_hint(std::string_view value) {
  try {
    return parse_hint(value);
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

void HintPolicyConfig::validate() const {
  if (low < 0 || medium < 0 || high < 0) throw ConfigError("hint config: negative limit");
  if (low > medium) throw ConfigError("hint config: low must not exceed medium");
  if (high < medium) throw ConfigError("hint config: high must be unlimited or >= medium");
}

Bytes hint_to_limits(const ResourceHint& hint, const HintPolicyConfig& config) {
  switch (hint.level) {
    case HintLevel::Low: return config.low;
    case HintLevel::Medium: return config.medium;
    case HintLevel::High: return config.high;
  }
  return config.medium;
}

std::int64_t round_mib(Bytes b) {
  return (b + kMiB / 2) / kMiB;
}

FeedbackMessage render_feedback(Bytes peak_bytes, Bytes limit_bytes, FeedbackKind kind) {
  if (peak_bytes < 0 || limit_bytes < 0) throw ConfigError("render_feedback: negative size");
  FeedbackMessage m;
  m.peak_mb = round_mib(peak_bytes);
  m.limit_mb = round_mib(limit_bytes);
  m.suggestion = std::string(kSuggestion);
  m.rendered = std::string(kPrefix) + (kind == FeedbackKind::OomKilled ? "killed" : "throttled") +
               ": peak=" + std::to_string(m.peak_mb) + " MiB exceeded limit=" + std::to_string(m.limit_mb) +
               " MiB. Suggestion: " + m.suggestion;
  return m;
}

std::optional<ParsedFeedback> parse_feedback(std::string_view rendered) {
  static const std::regex re(
      R"(^\[agentcgroup\] tool call (killed|throttled): peak=(\d+) MiB exceeded limit=(\d+) MiB\. Suggestion: (.*)$)");
  std::cmatch m;
  if (!std::regex_match(rendered.begin(), rendered.end(), m, re)) return std::nullopt;
  if (m[4].str() != kSuggestion) return std::nullopt;
  return ParsedFeedback{m[1].str() == "killed" ? FeedbackKind::OomKilled : FeedbackKind::Throttled,
                        std::stoll(m[2].str()), std::stoll(m[3].str())};
}

Bytes scaled_peak(Bytes peak, Bytes baseline, double rho) {
  if (peak <= baseline) return peak;
  return baseline + std::llround(rho * static_cast<double>(peak - baseline));
}

std::vector<trace::Sample> adapt_on_feedback(std::span<const trace::Sample> window, double rho) {
  if (!(rho > 0 && rho < 1)) throw ConfigError("adapt_on_feedback: rho must lie in (0, 1)");
  std::vector<trace::Sample> out(window.begin(), window.end());
  if (out.empty()) return out;
  const Bytes baseline = out.front().mem_bytes;
  for (auto& s : out) s.mem_bytes = scaled_peak(s.mem_bytes, baseline, rho);
  return out;
}

RetryPlan plan_feedback_retries(Bytes peak, Bytes baseline, double rho, int max_retries, Bytes limit) {
  if (!(rho > 0 && rho < 1)) throw ConfigError("plan_feedback_retries: rho must lie in (0, 1)");
  if (max_retries < 0) throw ConfigError("plan_feedback_retries: max_retries must be >= 0");
  RetryPlan plan;
  Bytes current = peak;
  plan.fits = current <= limit;
  for (int i = 0; i < max_retries && !plan.fits; ++i) {
    current = scaled_peak(current, baseline, rho);
    plan.retry_peaks.push_back(current);
    plan.fits = current <= limit;
  }
  return plan;
}

}  // namespace agentcg::intent
