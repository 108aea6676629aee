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

// Scenario files in, metrics documents out.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "agentcg/engine.hpp"

namespace agentcg::engine {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kLatencyDefinition =
    "virtual ms from an allocation request to its successful charge, including throttle, stall and "
    "contention time; one request per tick with positive demand growth";

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

Bytes memory_value(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<Bytes>();
  if (v.is_string()) {
    try {
      return parse_memory_size(v.get<std::string>());
    } catch (const ParseError& e) {
      throw ConfigError(what + ": " + e.what());
    }
  }
  throw ConfigError(what + ": expected bytes or a size string");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_memory(const json& j, const char* key, Bytes& out, const std::string& where) {
  if (j.contains(key)) out = memory_value(j.at(key), where + "." + key);
}

policy::PolicySpec parse_policy(const json& j) {
  check_keys(j, "policy", {"kind", "graduated", "reactive", "predictive", "intent"});
  policy::PolicySpec p;
  p.kind = policy::parse_policy_kind(j.value("kind", std::string("static")));
  if (j.contains("graduated")) {
    const json& g = j.at("graduated");
    check_keys(g, "policy.graduated",
               {"delay_slope_ms_per_mb", "max_delay_ms", "freeze_after_consecutive_throttles",
                "feedback_after_frozen_ms", "kill_as_last_resort"});
    read(g, "delay_slope_ms_per_mb", p.graduated.delay_slope_ms_per_mb);
    read(g, "max_delay_ms", p.graduated.max_delay_ms);
    read(g, "freeze_after_consecutive_throttles", p.graduated.freeze_after_consecutive_throttles);
    read(g, "feedback_after_frozen_ms", p.graduated.feedback_after_frozen_ms);
    read(g, "kill_as_last_resort", p.graduated.kill_as_last_resort);
  }
  if (j.contains("reactive")) {
    const json& r = j.at("reactive");
    check_keys(r, "policy.reactive", {"reaction_latency_ms", "pressure_threshold", "window_ms", "action"});
    read(r, "reaction_latency_ms", p.reactive.reaction_latency_ms);
    read(r, "pressure_threshold", p.reactive.pressure_threshold);
    read(r, "window_ms", p.reactive.window_ms);
    if (r.contains("action") && r.at("action") != "kill_lowest_priority") {
      throw ConfigError("policy.reactive.action: only kill_lowest_priority is supported");
    }
  }
  if (j.contains("predictive")) {
    const json& pr = j.at("predictive");
    check_keys(pr, "policy.predictive", {"percentile", "history_peaks"});
    read(pr, "percentile", p.predictive.percentile);
    for (const auto& v : pr.value("history_peaks", json::array())) {
      p.predictive.history_peaks.push_back(memory_value(v, "policy.predictive.history_peaks"));
    }
  }
  if (j.contains("intent")) {
    const json& in = j.at("intent");
    check_keys(in, "policy.intent", {"reduction_factor", "max_retries", "hints"});
    read(in, "reduction_factor", p.intent.reduction_factor);
    read(in, "max_retries", p.intent.max_retries);
    if (in.contains("hints")) {
      const json& h = in.at("hints");
      check_keys(h, "policy.intent.hints", {"low", "medium", "high"});
      read_memory(h, "low", p.intent.hints.low, "policy.intent.hints");
      read_memory(h, "medium", p.intent.hints.medium, "policy.intent.hints");
      read_memory(h, "high", p.intent.hints.high, "policy.intent.hints");
    }
  }
  return p;
}

WorkloadSpec parse_workload(const json& j, std::size_t index, const std::filesystem::path& base) {
  const std::string where = "workloads[" + std::to_string(index) + "]";
  check_keys(j, where,
             {"name", "trace", "synth", "priority", "memory_high", "memory_max", "memory_low", "hints",
              "history_peaks"});
  WorkloadSpec w;
  w.name = j.value("name", "w" + std::to_string(index));
  if (j.contains("trace") == j.contains("synth")) {
    throw ConfigError(where + ": exactly one of 'trace' or 'synth' is required");
  }
  if (j.contains("trace")) {
    const std::filesystem::path p(j.at("trace").get<std::string>());
    w.trace = trace::load_trace((p.is_absolute() ? p : base / p).string());
  } else {
    w.trace = trace::synthesize_trace(trace::parse_synth_params(j.at("synth").dump()));
  }
  w.priority = parse_priority(j.value("priority", std::string("low")));
  read_memory(j, "memory_high", w.memory_high, where);
  read_memory(j, "memory_max", w.memory_max, where);
  read_memory(j, "memory_low", w.memory_low, where);
  const json hints = j.value("hints", json::object());
  for (const auto& [k, v] : hints.items()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(k);
    } catch (const std::exception&) {
      throw ConfigError(where + ".hints: key '" + k + "' is not a tool-call index");
    }
    // Hints are advisory: an unparseable one is the same as none.
    if (auto h = intent::try_parse_hint(v.get<std::string>())) w.hints[idx] = *h;
  }
  for (const auto& v : j.value("history_peaks", json::array())) {
    w.history_peaks.push_back(memory_value(v, where + ".history_peaks"));
  }
  return w;
}

ojson nullable(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }
ojson nullable(const std::optional<Millis>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson latency_json(const LatencyStats& s) {
  ojson j;
  j["count"] = s.count;
  j["p50_ms"] = s.p50_ms;
  j["p95_ms"] = s.p95_ms;
  return j;
}

std::string cell(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(10) << v.get<double>();
    return os.str();
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

ojson mb_or_null(const ojson& v) {
  if (!v.is_number()) return nullptr;
  return to_mib(v.get<Bytes>());
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& base_dir) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("scenario: malformed JSON");
  Scenario s;
  try {
    check_keys(j, "scenario",
               {"name", "physical_budget", "acceleration", "tick_ms", "high_watermark", "contention_slope_ms_per_mb",
                "stall_timeout_ms", "seed", "policy", "workloads"});
    read(j, "name", s.name);
    if (!j.contains("physical_budget")) throw ConfigError("scenario: physical_budget is required");
    s.physical_budget = memory_value(j.at("physical_budget"), "physical_budget");
    read(j, "acceleration", s.acceleration);
    read(j, "tick_ms", s.tick_ms);
    read(j, "high_watermark", s.high_watermark);
    read(j, "contention_slope_ms_per_mb", s.contention_slope_ms_per_mb);
    read(j, "stall_timeout_ms", s.stall_timeout_ms);
    read(j, "seed", s.seed);
    if (j.contains("policy")) s.policy = parse_policy(j.at("policy"));
    const json& ws = j.value("workloads", json::array());
    if (!ws.is_array()) throw ConfigError("scenario: workloads must be an array");
    for (std::size_t i = 0; i < ws.size(); ++i) s.workloads.push_back(parse_workload(ws[i], i, base_dir));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

ojson policy_to_json(const policy::PolicySpec& p) {
  ojson j;
  j["kind"] = policy::to_string(p.kind);
  j["graduated"] = {{"delay_slope_ms_per_mb", p.graduated.delay_slope_ms_per_mb},
                    {"max_delay_ms", p.graduated.max_delay_ms},
                    {"freeze_after_consecutive_throttles", p.graduated.freeze_after_consecutive_throttles},
                    {"feedback_after_frozen_ms", p.graduated.feedback_after_frozen_ms},
                    {"kill_as_last_resort", p.graduated.kill_as_last_resort}};
  j["reactive"] = {{"reaction_latency_ms", p.reactive.reaction_latency_ms},
                   {"pressure_threshold", p.reactive.pressure_threshold},
                   {"window_ms", p.reactive.window_ms},
                   {"action", "kill_lowest_priority"}};
  j["predictive"] = {{"percentile", p.predictive.percentile}, {"history_peaks", p.predictive.history_peaks}};
  j["intent"] = {{"reduction_factor", p.intent.reduction_factor},
                 {"max_retries", p.intent.max_retries},
                 {"hints",
                  {{"low", format_memory_size(p.intent.hints.low)},
                   {"medium", format_memory_size(p.intent.hints.medium)},
                   {"high", format_memory_size(p.intent.hints.high)}}}};
  return j;
}

ojson to_json(const ReplayMetrics& m) {
  const auto wall = [&](Millis v) { return static_cast<double>(v) / m.acceleration; };
  ojson j;
  ojson& h = j["header"];
  h["scenario"] = m.scenario;
  h["policy"] = policy_to_json(m.policy);
  h["physical_budget"] = format_memory_size(m.physical_budget);
  h["acceleration"] = m.acceleration;
  h["tick_ms"] = m.tick_ms;
  h["high_watermark"] = m.high_watermark;
  h["contention_slope_ms_per_mb"] = m.contention_slope_ms_per_mb;
  h["stall_timeout_ms"] = m.stall_timeout_ms;
  h["seed"] = m.seed;
  h["time_unit"] = "virtual trace ms; *_wall_ms = virtual / acceleration";
  h["latency_definition"] = kLatencyDefinition;

  ojson rows = ojson::array();
  for (const auto& w : m.workloads) {
    ojson r;
    r["name"] = w.name;
    r["priority"] = to_string(w.priority);
    r["completed"] = w.completed;
    r["oom_killed"] = w.oom_killed;
    r["completion_ms"] = nullable(w.completion_ms);
    r["completion_wall_ms"] = w.completion_ms ? ojson(wall(*w.completion_ms)) : ojson(nullptr);
    r["solo_ms"] = nullable(w.solo_ms);
    r["overhead_frac"] = nullable(w.overhead_frac);
    r["latency"] = latency_json(w.latency);
    r["peak_usage_bytes"] = w.peak_usage;
    r["delay_triggers"] = w.delay_triggers;
    r["freezes"] = w.freezes;
    r["feedbacks"] = w.feedbacks;
    rows.push_back(std::move(r));
  }
  j["workloads"] = std::move(rows);

  ojson& a = j["aggregate"];
  a["survival_rate"] = m.survival_rate;
  a["latency_high"] = latency_json(m.high);
  a["latency_low"] = latency_json(m.low);
  a["delay_trigger_count"] = m.delay_trigger_count;
  a["freeze_count"] = m.freeze_count;
  a["feedback_count"] = m.feedback_count;
  a["kill_count"] = m.kill_count;
  a["peak_global_usage_bytes"] = m.peak_global_usage;
  a["end_ms"] = m.end_ms;
  a["end_wall_ms"] = wall(m.end_ms);
  a["truncated"] = m.truncated;

  ojson calls = ojson::array();
  for (const auto& c : m.tool_calls) calls.push_back(c.to_json());
  j["tool_calls"] = std::move(calls);
  ojson events = ojson::array();
  for (const auto& e : m.events) {
    events.push_back({{"at_ms", e.at_ms}, {"workload", e.workload}, {"action", e.action}, {"detail", e.detail}});
  }
  j["events"] = std::move(events);
  return j;
}

ojson to_json(const ComparisonReport& r) {
  ojson j;
  j["scenario"] = r.scenario;
  ojson kinds = ojson::array();
  for (const auto& m : r.runs) kinds.push_back(policy::to_string(m.policy.kind));
  j["policies"] = std::move(kinds);
  ojson deltas = ojson::array();
  for (const auto& d : r.deltas) {
    deltas.push_back({{"baseline", policy::to_string(d.baseline)},
                      {"policy", policy::to_string(d.policy)},
                      {"high_p95_reduction_frac", nullable(d.high_p95_reduction_frac)},
                      {"low_p95_reduction_frac", nullable(d.low_p95_reduction_frac)},
                      {"survival_delta", d.survival_delta},
                      {"kill_delta", d.kill_delta}});
  }
  j["deltas"] = std::move(deltas);
  ojson runs = ojson::array();
  for (const auto& m : r.runs) runs.push_back(to_json(m));
  j["runs"] = std::move(runs);
  return j;
}

std::string csv_header() {
  return "scenario,policy,workload,priority,completed,oom_killed,completion_ms,completion_wall_ms,solo_ms,"
         "overhead_frac,requests,p50_latency_ms,p95_latency_ms,delay_triggers,freezes,feedbacks,peak_mb,"
         "survival_rate,kill_count,high_p50_latency_ms,high_p95_latency_ms,low_p50_latency_ms,low_p95_latency_ms\n";
}

std::string csv_rows_from_json(const ojson& doc) {
  if (doc.contains("runs")) {
    std::string out;
    for (const auto& run : doc.at("runs")) out += csv_rows_from_json(run);
    return out;
  }
  if (!doc.contains("header") || !doc.contains("workloads") || !doc.contains("aggregate")) {
    throw ConfigError("not a replay metrics document");
  }
  const ojson& h = doc.at("header");
  const ojson& a = doc.at("aggregate");
  const std::string prefix = cell(h.at("scenario")) + "," + cell(h.at("policy").at("kind")) + ",";
  std::string out;
  std::size_t completed = 0, killed = 0, requests = 0;
  for (const auto& w : doc.at("workloads")) {
    const ojson& lat = w.at("latency");
    const std::vector<ojson> cells = {w.at("name"), w.at("priority"), w.at("completed"), w.at("oom_killed"),
                                      w.at("completion_ms"), w.at("completion_wall_ms"), w.at("solo_ms"),
                                      w.at("overhead_frac"), lat.at("count"), lat.at("p50_ms"), lat.at("p95_ms"),
                                      w.at("delay_triggers"), w.at("freezes"), w.at("feedbacks"),
                                      mb_or_null(w.at("peak_usage_bytes")), nullptr, w.at("oom_killed").get<bool>() ? 1 : 0,
                                      nullptr, nullptr, nullptr, nullptr};
    out += prefix;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cell(cells[i]);
    out += "\n";
    completed += w.at("completed").get<bool>() ? 1 : 0;
    killed += w.at("oom_killed").get<bool>() ? 1 : 0;
    requests += lat.at("count").get<std::size_t>();
  }
  const ojson& hi = a.at("latency_high");
  const ojson& lo = a.at("latency_low");
  const std::vector<ojson> agg = {"ALL", nullptr, completed, killed, a.at("end_ms"), a.at("end_wall_ms"), nullptr,
                                  nullptr, requests, nullptr, nullptr, a.at("delay_trigger_count"),
                                  a.at("freeze_count"), a.at("feedback_count"),
                                  mb_or_null(a.at("peak_global_usage_bytes")), a.at("survival_rate"),
                                  a.at("kill_count"), hi.at("p50_ms"), hi.at("p95_ms"), lo.at("p50_ms"),
                                  lo.at("p95_ms")};
  out += prefix;
  for (std::size_t i = 0; i < agg.size(); ++i) out += (i ? "," : "") + cell(agg[i]);
  out += "\n";
  return out;
}

std::string to_csv_rows(const ReplayMetrics& m) { return csv_rows_from_json(to_json(m)); }

std::string to_csv(const ReplayMetrics& m) { return csv_header() + to_csv_rows(m); }

std::string to_csv(const ComparisonReport& r) { return csv_header() + csv_rows_from_json(to_json(r)); }

}  // namespace agentcg::engine
