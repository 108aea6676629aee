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

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "agentcg/analyzer.hpp"

namespace agentcg::analyzer {

using ojson = nlohmann::ordered_json;

namespace {

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string num(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  std::ostringstream os;
  os << std::setprecision(10) << v.get<double>();
  return os.str();
}

}  // namespace

ojson task_report(const TaskTrace& t, Bytes burst_threshold) {
  ojson j;
  j["task_id"] = t.task_id;
  j["total_ms"] = t.total_ms;
  j["samples"] = t.samples.size();
  j["tool_calls"] = t.tool_calls.size();

  const PhaseShares ph = phase_breakdown(t);
  j["phases"] = {{"init_frac", ph.init_frac}, {"tool_frac", ph.tool_frac}, {"llm_frac", ph.llm_frac}};

  if (!t.samples.empty()) {
    Bytes peak = 0;
    double sum = 0;
    for (const auto& s : t.samples) {
      peak = std::max(peak, s.mem_bytes);
      sum += static_cast<double>(s.mem_bytes);
    }
    j["peak_mb"] = to_mib(peak);
    j["mean_mb"] = sum / static_cast<double>(t.samples.size()) / static_cast<double>(kMiB);
    j["peak_to_avg"] = sum > 0 ? ojson(peak_to_avg(t)) : ojson(nullptr);
  }

  const BurstAttribution ba = burst_attribution(t, burst_threshold);
  j["bursts"] = {{"threshold_mb", to_mib(burst_threshold)},
                 {"count", ba.burst_count},
                 {"tool_time_frac", ba.tool_time_frac},
                 {"tool_burst_frac", ba.tool_burst_frac}};

  const ChangeRateStats cr = change_rate_stats(t);
  j["change_rate"] = {{"cpu_burst_frac", cr.cpu_burst_frac},
                      {"mem_burst_frac", cr.mem_burst_frac},
                      {"max_mem_rate_mb_per_s", cr.max_mem_rate / static_cast<double>(kMiB)},
                      {"max_cpu_rate_pct_per_s", cr.max_cpu_rate},
                      {"mem_rate_histogram_edges_mb_per_s", RateHistogram::kEdgesMbPerS},
                      {"mem_rate_histogram", cr.mem_histogram.counts}};

  ojson groups = ojson::array();
  for (const auto& g : detect_retry_groups(t.tool_calls, t)) {
    groups.push_back({{"command", g.command},
                      {"start_index", g.start_index},
                      {"length", g.length},
                      {"retained_mb", g.retained_mb}});
  }
  j["retry_groups"] = std::move(groups);
  j["cpu_mem_correlation"] = optional_json(cpu_mem_correlation(t));

  ojson tools = ojson::object();
  for (const auto& [k, v] : tool_time_shares(t.tool_calls)) tools[std::string(trace::to_string(k))] = v;
  j["tool_time_shares"] = std::move(tools);
  ojson cats = ojson::object();
  for (const auto& [k, v] : bash_category_shares(t.tool_calls)) cats[std::string(trace::to_string(k))] = v;
  j["bash_category_shares"] = std::move(cats);
  ojson prog = ojson::object();
  for (const auto& [k, v] : tool_progress_histogram(t)) prog[std::string(trace::to_string(k))] = v;
  j["tool_progress_deciles"] = std::move(prog);
  return j;
}

ojson analysis_report(std::span<const TaskTrace> traces, Bytes burst_threshold) {
  ojson j;
  ojson tasks = ojson::array();
  for (const auto& t : traces) tasks.push_back(task_report(t, burst_threshold));
  j["tasks"] = tasks;
  if (traces.size() >= 2) {
    const CrossTaskStats cs = cross_task_stats(traces);
    auto mean_of = [&](auto get) {
      double s = 0;
      std::size_t n = 0;
      for (const auto& t : tasks) {
        const ojson v = get(t);
        if (v.is_number()) {
          s += v.get<double>();
          ++n;
        }
      }
      return n ? ojson(s / static_cast<double>(n)) : ojson(nullptr);
    };
    j["aggregate"] = {
        {"tasks", traces.size()},
        {"peak_cv", cs.peak_cv},
        {"peak_min_mb", to_mib(cs.peak_min)},
        {"peak_max_mb", to_mib(cs.peak_max)},
        {"mean_cpu_pct", cs.mean_cpu},
        {"mean_init_frac", mean_of([](const ojson& t) { return t["phases"]["init_frac"]; })},
        {"mean_tool_frac", mean_of([](const ojson& t) { return t["phases"]["tool_frac"]; })},
        {"mean_peak_to_avg", mean_of([](const ojson& t) { return t.value("peak_to_avg", ojson(nullptr)); })},
        {"mean_tool_burst_frac", mean_of([](const ojson& t) { return t["bursts"]["tool_burst_frac"]; })},
        {"mean_cpu_mem_correlation", mean_of([](const ojson& t) { return t["cpu_mem_correlation"]; })},
        {"retry_groups", std::accumulate(tasks.begin(), tasks.end(), std::size_t{0},
                                         [](std::size_t a, const ojson& t) { return a + t["retry_groups"].size(); })}};
  }
  return j;
}

std::string analysis_csv(const ojson& report) {
  std::string out =
      "task_id,total_ms,samples,tool_calls,init_frac,tool_frac,llm_frac,peak_mb,mean_mb,peak_to_avg,burst_count,"
      "tool_burst_frac,mem_burst_frac,cpu_burst_frac,retry_groups,cpu_mem_correlation\n";
  for (const auto& t : report.at("tasks")) {
    const std::string id = t.at("task_id").get<std::string>();
    out += id.find_first_of(",\"\n") == std::string::npos ? id : "\"" + id + "\"";
    for (const ojson& v : {t.at("total_ms"), t.at("samples"), t.at("tool_calls"), t["phases"]["init_frac"],
                           t["phases"]["tool_frac"], t["phases"]["llm_frac"], t.value("peak_mb", ojson(nullptr)),
                           t.value("mean_mb", ojson(nullptr)), t.value("peak_to_avg", ojson(nullptr)),
                           t["bursts"]["count"], t["bursts"]["tool_burst_frac"], t["change_rate"]["mem_burst_frac"],
                           t["change_rate"]["cpu_burst_frac"], ojson(t.at("retry_groups").size()),
                           t.at("cpu_mem_correlation")}) {
      out += "," + num(v);
    }
    out += "\n";
  }
  return out;
}

}  // namespace agentcg::analyzer
