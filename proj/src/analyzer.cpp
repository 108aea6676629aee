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

#include "agentcg/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

namespace agentcg::analyzer {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string basename_of(const std::string& tok) {
  std::string t = tok;
  t.erase(std::remove(t.begin(), t.end(), '"'), t.end());
  t.erase(std::remove(t.begin(), t.end(), '\''), t.end());
  auto slash = t.rfind('/');
  return slash == std::string::npos ? t : t.substr(slash + 1);
}

bool is_python(const std::string& name) {
  static const std::regex re(R"(python(\d+(\.\d+)?)?)");
  return std::regex_match(name, re);
}

bool is_env_assignment(const std::string& tok) {
  static const std::regex re(R"([A-Za-z_][A-Za-z0-9_]*=.*)");
  return std::regex_match(tok, re);
}

// Splits on the shell list and pipe operators. Quoting is not interpreted.
std::vector<std::vector<std::string>> split_segments(std::string_view command) {
  std::string s(command);
  for (const char* op : {"&&", "||"}) {
    for (auto p = s.find(op); p != std::string::npos; p = s.find(op, p + 1)) s.replace(p, 2, " ; ");
  }
  std::replace(s.begin(), s.end(), '|', ';');
  std::vector<std::vector<std::string>> segments;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto semi = s.find(';', start);
    auto toks = split_ws(std::string_view(s).substr(start, semi == std::string::npos ? std::string::npos : semi - start));
    if (!toks.empty()) segments.push_back(std::move(toks));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return segments;
}

std::string leader_of(const std::vector<std::string>& seg) {
  for (const auto& tok : seg) {
    if (!is_env_assignment(tok)) return basename_of(tok);
  }
  return {};
}

Bytes min_memory_between(const TaskTrace& trace, Millis a, Millis b) {
  a = std::clamp<Millis>(a, 0, trace.total_ms);
  b = std::clamp<Millis>(b, a, trace.total_ms);
  Bytes m = std::min(trace::demand_at(trace, a), trace::demand_at(trace, b));
  for (const auto& s : trace.samples) {
    if (s.ts_ms >= a && s.ts_ms <= b) m = std::min(m, s.mem_bytes);
  }
  return m;
}

}  // namespace

PhaseShares phase_breakdown(const TaskTrace& trace) {
  if (trace.total_ms <= 0) throw ConfigError("phase_breakdown: trace has zero duration");
  Millis tool_ms = 0;
  for (const auto& c : trace.tool_calls) tool_ms += c.duration_ms();
  const double total = static_cast<double>(trace.total_ms);
  PhaseShares p;
  p.init_frac = static_cast<double>(trace.init_end_ms) / total;
  p.tool_frac = static_cast<double>(tool_ms) / total;
  p.llm_frac = static_cast<double>(trace.total_ms - trace.init_end_ms - tool_ms) / total;
  return p;
}

double peak_to_avg(const TaskTrace& trace) {
  if (trace.samples.empty()) throw ConfigError("peak_to_avg: trace has no samples");
  long double sum = 0;
  Bytes peak = 0;
  for (const auto& s : trace.samples) {
    sum += s.mem_bytes;
    peak = std::max(peak, s.mem_bytes);
  }
  const long double mean = sum / static_cast<long double>(trace.samples.size());
  if (mean <= 0) throw ConfigError("peak_to_avg: mean memory is zero");
  return static_cast<double>(static_cast<long double>(peak) / mean);
}

BurstAttribution burst_attribution(const TaskTrace& trace, Bytes threshold_bytes) {
  if (threshold_bytes <= 0) throw ConfigError("burst_attribution: threshold must be positive");
  std::size_t considered = 0, in_tool = 0, bursts = 0, bursts_in_tool = 0;
  auto call = trace.tool_calls.begin();
  for (const auto& s : trace.samples) {
    if (s.ts_ms < trace.init_end_ms) continue;
    while (call != trace.tool_calls.end() && call->end_ms < s.ts_ms) ++call;
    const bool inside = call != trace.tool_calls.end() && call->contains(s.ts_ms);
    ++considered;
    in_tool += inside;
    if (s.mem_bytes >= threshold_bytes) {
      ++bursts;
      bursts_in_tool += inside;
    }
  }
  BurstAttribution r;
  r.burst_count = bursts;
  r.tool_time_frac = considered ? static_cast<double>(in_tool) / static_cast<double>(considered) : 0.0;
  r.tool_burst_frac = bursts ? static_cast<double>(bursts_in_tool) / static_cast<double>(bursts) : 0.0;
  return r;
}

ChangeRateStats change_rate_stats(const TaskTrace& trace, double cpu_thr_pct_per_s, double mem_thr_bytes_per_s) {
  ChangeRateStats st;
  const auto& s = trace.samples;
  if (s.size() < 2) return st;
  std::size_t cpu_bursts = 0, mem_bursts = 0;
  const auto& edges = RateHistogram::kEdgesMbPerS;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = static_cast<double>(s[i].ts_ms - s[i - 1].ts_ms) / 1000.0;
    const double mem_rate = static_cast<double>(s[i].mem_bytes - s[i - 1].mem_bytes) / dt;
    const double cpu_rate = (s[i].cpu_pct - s[i - 1].cpu_pct) / dt;
    cpu_bursts += std::abs(cpu_rate) >= cpu_thr_pct_per_s;
    mem_bursts += std::abs(mem_rate) >= mem_thr_bytes_per_s;
    st.max_mem_rate = std::max(st.max_mem_rate, std::abs(mem_rate));
    st.max_cpu_rate = std::max(st.max_cpu_rate, std::abs(cpu_rate));
    const double mb_per_s = mem_rate / static_cast<double>(kMiB);
    const auto bucket = std::upper_bound(edges.begin(), edges.end(), mb_per_s) - edges.begin();
    ++st.mem_histogram.counts[static_cast<std::size_t>(bucket)];
  }
  const double n = static_cast<double>(s.size() - 1);
  st.cpu_burst_frac = static_cast<double>(cpu_bursts) / n;
  st.mem_burst_frac = static_cast<double>(mem_bursts) / n;
  return st;
}

std::string normalize_command(std::string_view command) {
  static const std::regex with_target(R"(^(\d*|&)(>>?|<)(&\d+|&-|\S+)$)");
  static const std::regex bare(R"(^(\d*|&)(>>?|<)$)");
  auto toks = split_ws(command);
  bool changed = true;
  while (changed && !toks.empty()) {
    changed = false;
    if (toks.size() >= 2 && std::regex_match(toks[toks.size() - 2], bare)) {
      toks.resize(toks.size() - 2);
      changed = true;
    } else if (std::regex_match(toks.back(), with_target)) {
      toks.pop_back();
      changed = true;
    }
  }
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<RetryGroup> detect_retry_groups(std::span<const ToolCallEvent> calls, const TaskTrace& trace) {
  std::vector<std::size_t> bash;  // indexes into calls
  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (calls[i].tool_type == ToolType::Bash) bash.push_back(i);
  }
  auto key = [&](std::size_t b) -> std::optional<std::string> {
    const auto& c = calls[bash[b]];
    if (c.category != BashCategory::Test || !c.command) return std::nullopt;
    return normalize_command(*c.command);
  };

  std::vector<RetryGroup> groups;
  std::size_t i = 0;
  while (i < bash.size()) {
    const auto k = key(i);
    std::size_t j = i + 1;
    if (k) {
      while (j < bash.size() && key(j) == k) ++j;
    }
    if (k && j - i >= 3) {
      const std::size_t first = bash[i], last = bash[j - 1];
      const Millis before_lo = first == 0 ? trace.init_end_ms : calls[first - 1].end_ms;
      const Millis after_hi = last + 1 < calls.size() ? calls[last + 1].start_ms : trace.total_ms;
      const Bytes before = min_memory_between(trace, before_lo, calls[first].start_ms);
      const Bytes after = min_memory_between(trace, calls[last].end_ms, after_hi);
      groups.push_back({*k, i, j - i, to_mib(after - before)});
    }
    i = j;
  }
  return groups;
}

std::optional<double> cpu_mem_correlation(const TaskTrace& trace) {
  const auto& s = trace.samples;
  if (s.size() < 2) return std::nullopt;
  const double n = static_cast<double>(s.size());
  double mx = 0, my = 0;
  for (const auto& x : s) {
    mx += x.cpu_pct;
    my += static_cast<double>(x.mem_bytes);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& x : s) {
    const double dx = x.cpu_pct - mx;
    const double dy = static_cast<double>(x.mem_bytes) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

template <typename Key, typename KeyFn>
std::map<Key, double> duration_shares(std::span<const ToolCallEvent> calls, KeyFn key_of) {
  std::map<Key, Millis> totals;
  Millis all = 0;
  for (const auto& c : calls) {
    auto k = key_of(c);
    if (!k) continue;
    totals[*k] += c.duration_ms();
    all += c.duration_ms();
  }
  std::map<Key, double> shares;
  if (all == 0) return shares;
  for (const auto& [k, v] : totals) shares[k] = static_cast<double>(v) / static_cast<double>(all);
  return shares;
}

}  // namespace

std::map<ToolType, double> tool_time_shares(std::span<const ToolCallEvent> calls) {
  return duration_shares<ToolType>(calls, [](const ToolCallEvent& c) { return std::optional(c.tool_type); });
}

std::map<BashCategory, double> bash_category_shares(std::span<const ToolCallEvent> calls) {
  return duration_shares<BashCategory>(calls, [](const ToolCallEvent& c) -> std::optional<BashCategory> {
    if (c.tool_type != ToolType::Bash) return std::nullopt;
    return c.category.value_or(BashCategory::Other);
  });
}

BashCategory categorize_bash(std::string_view command) {
  const auto segments = split_segments(command);
  std::vector<std::string> names;
  for (const auto& seg : segments)
    for (const auto& t : seg) names.push_back(basename_of(t));
  auto has = [&](std::initializer_list<std::string_view> set) {
    return std::any_of(names.begin(), names.end(), [&](const std::string& n) {
      return std::find(set.begin(), set.end(), n) != set.end();
    });
  };

  if (has({"pytest", "py.test", "unittest", "tox"})) return BashCategory::Test;
  if (has({"pip", "pip3", "poetry", "conda"}) && has({"install"})) return BashCategory::PackageInstall;
  if (std::any_of(names.begin(), names.end(), is_python)) return BashCategory::PythonSnippet;

  std::string leader;
  for (const auto& seg : segments) {
    leader = leader_of(seg);
    if (leader != "cd" && !leader.empty()) break;
  }
  if (leader == "git") return BashCategory::Git;
  for (std::string_view fe : {"ls", "cat", "find", "grep", "head", "tail"}) {
    if (leader == fe) return BashCategory::FileExploration;
  }
  return BashCategory::Other;
}

CrossTaskStats cross_task_stats(std::span<const TaskTrace> traces) {
  if (traces.size() < 2) throw ConfigError("cross_task_stats: need at least two traces");
  std::vector<double> peaks;
  double cpu_sum = 0;
  CrossTaskStats st;
  st.peak_min = kUnlimited;
  for (const auto& t : traces) {
    Bytes peak = 0;
    double cpu = 0;
    for (const auto& s : t.samples) {
      peak = std::max(peak, s.mem_bytes);
      cpu += s.cpu_pct;
    }
    peaks.push_back(static_cast<double>(peak));
    st.peak_min = std::min(st.peak_min, peak);
    st.peak_max = std::max(st.peak_max, peak);
    cpu_sum += t.samples.empty() ? 0.0 : cpu / static_cast<double>(t.samples.size());
  }
  const double n = static_cast<double>(peaks.size());
  double mean = 0;
  for (double p : peaks) mean += p;
  mean /= n;
  double var = 0;
  for (double p : peaks) var += (p - mean) * (p - mean);
  var /= n;
  st.peak_cv = mean > 0 ? std::sqrt(var) / mean : 0.0;
  st.mean_cpu = cpu_sum / n;
  return st;
}

ProgressHistogram tool_progress_histogram(const TaskTrace& trace) {
  ProgressHistogram h;
  if (trace.total_ms <= 0) return h;
  for (const auto& c : trace.tool_calls) {
    auto decile = static_cast<std::size_t>(10 * c.start_ms / trace.total_ms);
    ++h[c.tool_type][std::min<std::size_t>(decile, 9)];
  }
  return h;
}

}  // namespace agentcg::analyzer
