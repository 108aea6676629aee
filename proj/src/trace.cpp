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

#include "agentcg/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace agentcg::trace {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::pair<ToolType, std::string_view> kToolNames[] = {
    {ToolType::Bash, "Bash"},         {ToolType::Read, "Read"},
    {ToolType::Edit, "Edit"},         {ToolType::Write, "Write"},
    {ToolType::SubAgent, "SubAgent"}, {ToolType::WebSearch, "WebSearch"},
    {ToolType::Other, "Other"},
};

constexpr std::pair<BashCategory, std::string_view> kCategoryNames[] = {
    {BashCategory::Test, "Test"},
    {BashCategory::PackageInstall, "PackageInstall"},
    {BashCategory::PythonSnippet, "PythonSnippet"},
    {BashCategory::FileExploration, "FileExploration"},
    {BashCategory::Git, "Git"},
    {BashCategory::Other, "Other"},
};

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

Millis get_ms(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_number_integer()) throw ParseError(line, std::string("field '") + key + "' must be an integer");
  return it->get<Millis>();
}

std::string get_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

void check_call_shape(const ToolCallEvent& e, std::size_t line) {
  if (e.start_ms >= e.end_ms) throw ParseError(line, "tool call must have start_ms < end_ms");
  if (e.tool_type == ToolType::Bash && !e.category) throw ParseError(line, "Bash tool call requires 'cat'");
  if (e.tool_type != ToolType::Bash && e.category) throw ParseError(line, "'cat' is only valid on Bash tool calls");
}

}  // namespace

std::string_view to_string(ToolType t) {
  for (const auto& [k, v] : kToolNames)
    if (k == t) return v;
  return "Other";
}

std::string_view to_string(BashCategory c) {
  for (const auto& [k, v] : kCategoryNames)
    if (k == c) return v;
  return "Other";
}

std::optional<ToolType> parse_tool_type(std::string_view s) {
  for (const auto& [k, v] : kToolNames)
    if (v == s) return k;
  return std::nullopt;
}

std::optional<BashCategory> parse_bash_category(std::string_view s) {
  for (const auto& [k, v] : kCategoryNames)
    if (v == s) return k;
  return std::nullopt;
}

void validate(const TaskTrace& trace) {
  if (trace.init_end_ms < 0 || trace.init_end_ms > trace.total_ms) {
    throw ConfigError("init_end_ms must lie in [0, total_ms]");
  }
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const Sample& s = trace.samples[i];
    if (s.ts_ms < 0 || s.ts_ms > trace.total_ms) throw ConfigError("sample timestamp outside [0, total_ms]");
    if (s.mem_bytes < 0 || s.cpu_pct < 0) throw ConfigError("negative sample value");
    if (i > 0 && s.ts_ms <= trace.samples[i - 1].ts_ms) throw ConfigError("non-monotonic timestamp");
  }
  for (std::size_t i = 0; i < trace.tool_calls.size(); ++i) {
    const ToolCallEvent& e = trace.tool_calls[i];
    if (e.start_ms >= e.end_ms) throw ConfigError("tool call must have start_ms < end_ms");
    if (e.start_ms < trace.init_end_ms) throw ConfigError("tool call starts before init_end_ms");
    if (e.end_ms > trace.total_ms) throw ConfigError("tool call ends after total_ms");
    if ((e.tool_type == ToolType::Bash) != e.category.has_value()) {
      throw ConfigError("category must be present exactly on Bash tool calls");
    }
    if (i > 0 && e.start_ms < trace.tool_calls[i - 1].end_ms) throw ConfigError("overlapping tool calls");
  }
}

TaskTrace parse_trace(std::string_view content) {
  TaskTrace trace;
  bool have_meta = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    if (is_blank(line)) continue;

    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) throw ParseError(line_no, "malformed line");
    const std::string type = get_string(obj, "t", line_no);

    if (type == "meta") {
      if (have_meta) throw ParseError(line_no, "duplicate meta record");
      trace.task_id = get_string(obj, "task_id", line_no);
      trace.init_end_ms = get_ms(obj, "init_end_ms", line_no);
      trace.total_ms = get_ms(obj, "total_ms", line_no);
      if (trace.total_ms < 0 || trace.init_end_ms < 0 || trace.init_end_ms > trace.total_ms) {
        throw ParseError(line_no, "init_end_ms must lie in [0, total_ms]");
      }
      have_meta = true;
      continue;
    }
    if (!have_meta) throw ParseError(line_no, "missing meta record (must be the first line)");

    if (type == "s") {
      Sample s;
      s.ts_ms = get_ms(obj, "ms", line_no);
      auto mem = obj.find("mem");
      if (mem == obj.end() || !mem->is_number_integer()) throw ParseError(line_no, "field 'mem' must be an integer");
      s.mem_bytes = mem->get<Bytes>();
      auto cpu = obj.find("cpu");
      if (cpu == obj.end() || !cpu->is_number()) throw ParseError(line_no, "field 'cpu' must be a number");
      s.cpu_pct = cpu->get<double>();
      if (s.ts_ms < 0 || s.ts_ms > trace.total_ms) throw ParseError(line_no, "sample timestamp outside [0, total_ms]");
      if (s.mem_bytes < 0 || s.cpu_pct < 0) throw ParseError(line_no, "negative sample value");
      if (!trace.samples.empty() && s.ts_ms <= trace.samples.back().ts_ms) {
        throw ParseError(line_no, "non-monotonic timestamp");
      }
      trace.samples.push_back(s);
    } else if (type == "tc") {
      ToolCallEvent e;
      const std::string tool = get_string(obj, "tool", line_no);
      auto tt = parse_tool_type(tool);
      if (!tt) throw ParseError(line_no, "unknown tool type '" + tool + "'");
      e.tool_type = *tt;
      e.start_ms = get_ms(obj, "start_ms", line_no);
      e.end_ms = get_ms(obj, "end_ms", line_no);
      if (obj.contains("cmd")) e.command = get_string(obj, "cmd", line_no);
      if (obj.contains("cat")) {
        const std::string cat = get_string(obj, "cat", line_no);
        auto bc = parse_bash_category(cat);
        if (!bc) throw ParseError(line_no, "unknown bash category '" + cat + "'");
        e.category = *bc;
      }
      check_call_shape(e, line_no);
      if (e.start_ms < trace.init_end_ms) throw ParseError(line_no, "tool call starts before init_end_ms");
      if (e.end_ms > trace.total_ms) throw ParseError(line_no, "tool call ends after total_ms");
      if (!trace.tool_calls.empty() && e.start_ms < trace.tool_calls.back().end_ms) {
        throw ParseError(line_no, "overlapping tool calls");
      }
      trace.tool_calls.push_back(std::move(e));
    } else {
      throw ParseError(line_no, "unknown record type '" + type + "'");
    }
  }
  if (!have_meta) throw ParseError("missing meta record");
  return trace;
}

TaskTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_trace(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

std::string serialize_trace(const TaskTrace& trace) {
  std::string out;
  ordered_json meta;
  meta["t"] = "meta";
  meta["task_id"] = trace.task_id;
  meta["init_end_ms"] = trace.init_end_ms;
  meta["total_ms"] = trace.total_ms;
  out += meta.dump();
  out += '\n';
  for (const Sample& s : trace.samples) {
    ordered_json j;
    j["t"] = "s";
    j["ms"] = s.ts_ms;
    j["mem"] = s.mem_bytes;
    j["cpu"] = s.cpu_pct;
    out += j.dump();
    out += '\n';
  }
  for (const ToolCallEvent& e : trace.tool_calls) {
    ordered_json j;
    j["t"] = "tc";
    j["tool"] = to_string(e.tool_type);
    j["start_ms"] = e.start_ms;
    j["end_ms"] = e.end_ms;
    if (e.command) j["cmd"] = *e.command;
    if (e.category) j["cat"] = to_string(*e.category);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_trace(const TaskTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write trace file '" + path + "'");
  out << serialize_trace(trace);
}

Bytes demand_at(const TaskTrace& trace, Millis t_ms) {
  if (t_ms < 0 || t_ms > trace.total_ms) throw std::out_of_range("demand_at: time outside [0, total_ms]");
  const auto& s = trace.samples;
  if (s.empty()) return 0;
  if (t_ms <= s.front().ts_ms) return s.front().mem_bytes;
  if (t_ms >= s.back().ts_ms) return s.back().mem_bytes;
  auto hi = std::upper_bound(s.begin(), s.end(), t_ms,
                             [](Millis t, const Sample& x) { return t < x.ts_ms; });
  auto lo = std::prev(hi);
  if (lo->ts_ms == t_ms) return lo->mem_bytes;
  // Exact rational interpolation, rounded half away from zero.
  const __int128 dv = static_cast<__int128>(hi->mem_bytes - lo->mem_bytes) * (t_ms - lo->ts_ms);
  const __int128 dt = hi->ts_ms - lo->ts_ms;
  __int128 q = dv / dt;
  const __int128 r = dv % dt;
  if (2 * (r < 0 ? -r : r) >= dt) q += dv < 0 ? -1 : 1;
  return lo->mem_bytes + static_cast<Bytes>(q);
}

std::map<BashCategory, double> SynthParams::default_burst_peaks() {
  return {
      {BashCategory::Test, 518.0},          {BashCategory::PackageInstall, 233.0},
      {BashCategory::PythonSnippet, 50.0},  {BashCategory::FileExploration, 4.5},
      {BashCategory::Git, 13.5},            {BashCategory::Other, 0.0},
  };
}

std::string_view default_command(BashCategory c) {
  switch (c) {
    case BashCategory::Test: return "python -m pytest tests/ -x";
    case BashCategory::PackageInstall: return "pip install -e .";
    case BashCategory::PythonSnippet: return "python -c 'import pkg; print(pkg.__version__)'";
    case BashCategory::FileExploration: return "ls -la src/";
    case BashCategory::Git: return "git status";
    case BashCategory::Other: return "echo done";
  }
  return "echo done";
}

namespace {

struct PlannedCall {
  BashCategory category;
  std::string command;
  double amplitude_mb;
  double retained_mb;
  Millis start = 0;
  Millis duration = 0;
  double base_before_mb = 0;

  Millis mid() const { return start + duration / 2; }
  Millis end() const { return start + duration; }
};

double memory_mb_at(const std::vector<PlannedCall>& calls, double baseline_mb, Millis t) {
  double base = baseline_mb;
  for (const PlannedCall& c : calls) {
    if (t < c.start) return base;
    if (t <= c.end()) {
      const double peak = c.base_before_mb + c.amplitude_mb;
      const double after = c.base_before_mb + c.retained_mb;
      if (t <= c.mid()) {
        return c.base_before_mb + (peak - c.base_before_mb) * static_cast<double>(t - c.start) /
                                      static_cast<double>(c.mid() - c.start);
      }
      return peak + (after - peak) * static_cast<double>(t - c.mid()) / static_cast<double>(c.end() - c.mid());
    }
    base = c.base_before_mb + c.retained_mb;
  }
  return base;
}

}  // namespace

TaskTrace synthesize_trace(const SynthParams& p) {
  if (p.baseline_mb < 0 || p.duration_s <= 0 || p.init_s < 0 || p.init_s > p.duration_s) {
    throw ConfigError("synth: baseline must be >= 0 and 0 <= init_s <= duration_s > 0");
  }
  if (p.burst_min_s <= 0 || p.burst_max_s < p.burst_min_s) throw ConfigError("synth: invalid burst duration range");

  auto amplitude = [&](BashCategory c) {
    auto it = p.burst_peak_mb.find(c);
    const double peak = it == p.burst_peak_mb.end() ? 0.0 : it->second;
    if (peak < 0) throw ConfigError("synth: negative burst peak");
    return peak > p.baseline_mb ? peak - p.baseline_mb : peak;
  };

  std::vector<PlannedCall> calls;
  for (const auto& [cat, count] : p.tool_schedule) {
    if (count < 0) throw ConfigError("synth: negative tool count");
    for (int i = 0; i < count; ++i) calls.push_back({cat, std::string(default_command(cat)), amplitude(cat), 0.0});
  }
  for (const RetryGroupParams& g : p.retry_groups) {
    if (g.repetitions < 0 || g.retained_mb_per_retry < 0) throw ConfigError("synth: invalid retry group");
    for (int i = 0; i < g.repetitions; ++i) {
      calls.push_back({BashCategory::Test, g.command, amplitude(BashCategory::Test), g.retained_mb_per_retry});
    }
  }

  // Durations come in 100 ms steps so every burst has an integral midpoint.
  const Millis min_ms = std::max<Millis>(100, std::llround(p.burst_min_s * 10.0) * 100);
  const Millis max_ms = std::max<Millis>(min_ms, std::llround(p.burst_max_s * 10.0) * 100);
  const std::uint64_t steps = static_cast<std::uint64_t>((max_ms - min_ms) / 100) + 1;
  std::mt19937_64 rng(p.seed);
  Millis busy = 0;
  for (PlannedCall& c : calls) {
    c.duration = min_ms + 100 * static_cast<Millis>(rng() % steps);
    busy += c.duration;
  }

  const Millis total = std::llround(p.duration_s * 1000.0);
  const Millis init = std::llround(p.init_s * 1000.0);
  if (!calls.empty()) {
    const Millis n = static_cast<Millis>(calls.size());
    const Millis gap = (total - init - busy) / (n + 1);
    if (total - init - busy < 0 || gap < kMinSynthGapMs) {
      throw ConfigError("synth: schedule does not fit duration");
    }
    Millis t = init;
    double base = p.baseline_mb;
    for (PlannedCall& c : calls) {
      t += gap;
      c.start = t;
      c.base_before_mb = base;
      base += c.retained_mb;
      t += c.duration;
    }
  }

  std::set<Millis> stamps;
  for (Millis t = 0; t <= total; t += 1000) stamps.insert(t);
  stamps.insert(total);
  for (const PlannedCall& c : calls) {
    stamps.insert(c.start);
    stamps.insert(c.mid());
    stamps.insert(c.end());
  }

  TaskTrace trace;
  trace.task_id = p.task_id;
  trace.init_end_ms = init;
  trace.total_ms = total;
  trace.samples.reserve(stamps.size());
  for (Millis t : stamps) {
    double cpu = 5.0;
    for (const PlannedCall& c : calls) {
      if (c.category == BashCategory::Test && t >= c.start && t < c.end()) cpu += 3.2;
    }
    trace.samples.push_back({t, mib(memory_mb_at(calls, p.baseline_mb, t)), cpu});
  }
  for (const PlannedCall& c : calls) {
    trace.tool_calls.push_back({ToolType::Bash, c.start, c.end(), c.command, c.category});
  }
  return trace;
}

SynthParams parse_synth_params(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("synth params: malformed JSON");
  SynthParams p;
  try {
    p.task_id = j.value("task_id", p.task_id);
    p.baseline_mb = j.value("baseline_mb", p.baseline_mb);
    p.duration_s = j.value("duration_s", p.duration_s);
    p.init_s = j.value("init_s", p.init_s);
    p.seed = j.value("seed", p.seed);
    if (j.contains("burst_duration_s")) {
      const auto& r = j.at("burst_duration_s");
      if (!r.is_array() || r.size() != 2) throw ParseError("synth params: burst_duration_s must be [min, max]");
      p.burst_min_s = r[0].get<double>();
      p.burst_max_s = r[1].get<double>();
    }
    for (const auto& item : j.value("tool_schedule", json::array())) {
      const std::string name = item.at("category").get<std::string>();
      auto cat = parse_bash_category(name);
      if (!cat) throw ParseError("synth params: unknown category '" + name + "'");
      p.tool_schedule.emplace_back(*cat, item.at("count").get<int>());
    }
    const json peaks = j.value("burst_peak_mb", json::object());
    for (const auto& [name, value] : peaks.items()) {
      auto cat = parse_bash_category(name);
      if (!cat) throw ParseError("synth params: unknown category '" + name + "'");
      p.burst_peak_mb[*cat] = value.get<double>();
    }
    for (const auto& item : j.value("retry_groups", json::array())) {
      RetryGroupParams g;
      g.command = item.at("command").get<std::string>();
      g.repetitions = item.at("repetitions").get<int>();
      g.retained_mb_per_retry = item.value("retained_mb_per_retry", 0.0);
      p.retry_groups.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth params: ") + e.what());
  }
  return p;
}

}  // namespace agentcg::trace
