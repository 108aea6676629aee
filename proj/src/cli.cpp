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

#include "agentcg/cli.hpp"

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "agentcg/analyzer.hpp"
#include "agentcg/engine.hpp"
#include "agentcg/trace.hpp"

namespace agentcg::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Options {
  std::vector<std::string> inputs;
  std::string input;
  std::string out_path;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::string policies = "static,graduated";
  std::string burst_threshold = "300M";
  bool no_solo = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

// Machine output to --out if given (and then a summary to stdout), otherwise
// the machine output itself goes to stdout.
void emit(const Options& o, const std::string& machine, const std::string& summary, std::ostream& out) {
  if (o.out_path.empty()) {
    out << machine;
    return;
  }
  write_file(o.out_path, machine);
  out << summary << "wrote " << o.out_path << "\n";
}

std::string fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::vector<policy::PolicyKind> parse_policy_list(const std::string& list) {
  std::vector<policy::PolicyKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(policy::parse_policy_kind(item));
  }
  return out;
}

std::string replay_summary(const engine::ReplayMetrics& m) {
  std::ostringstream os;
  os << "scenario " << m.scenario << " policy " << policy::to_string(m.policy.kind) << ": survival "
     << fixed(100.0 * m.survival_rate, 1) << "%, kills " << m.kill_count << ", delay triggers "
     << m.delay_trigger_count << ", freezes " << m.freeze_count << ", feedback " << m.feedback_count
     << ", HIGH P95 " << fixed(m.high.p95_ms, 3) << " ms, LOW P95 " << fixed(m.low.p95_ms, 3) << " ms"
     << (m.truncated ? " (truncated at the runtime cap)" : "") << "\n";
  for (const auto& w : m.workloads) {
    os << "  " << std::left << std::setw(12) << w.name << " " << std::setw(4) << to_string(w.priority) << " "
       << (w.completed ? "completed" : w.oom_killed ? "killed   " : "stuck    ");
    if (w.completion_ms) os << " at " << *w.completion_ms << " ms";
    if (w.overhead_frac) os << " overhead " << fixed(100.0 * *w.overhead_frac, 2) << "%";
    os << "\n";
  }
  return os.str();
}

int cmd_analyze(const Options& o, std::ostream& out) {
  std::vector<trace::TaskTrace> traces;
  for (const auto& p : o.inputs) traces.push_back(trace::load_trace(p));
  const Bytes thr = parse_memory_size(o.burst_threshold);
  const ojson report = analyzer::analysis_report(traces, thr);
  std::ostringstream sum;
  for (const auto& t : report.at("tasks")) {
    sum << t.at("task_id").get<std::string>() << ": peak/avg "
        << (t.value("peak_to_avg", ojson(nullptr)).is_number() ? fixed(t.at("peak_to_avg").get<double>(), 2) : "-")
        << ", tool time " << fixed(100.0 * t["phases"]["tool_frac"].get<double>(), 1) << "%, bursts in tools "
        << fixed(100.0 * t["bursts"]["tool_burst_frac"].get<double>(), 1) << "%, retry groups "
        << t.at("retry_groups").size() << "\n";
  }
  const std::string machine = o.format == "csv" ? analyzer::analysis_csv(report) : report.dump(2) + "\n";
  emit(o, machine, sum.str(), out);
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  trace::SynthParams p = trace::parse_synth_params(read_file(o.input));
  if (o.seed) p.seed = *o.seed;
  const trace::TaskTrace t = trace::synthesize_trace(p);
  std::ostringstream sum;
  sum << "synthesized " << t.task_id << ": " << t.samples.size() << " samples, " << t.tool_calls.size()
      << " tool calls, " << t.total_ms << " ms\n";
  emit(o, trace::serialize_trace(t), sum.str(), out);
  return kExitOk;
}

int cmd_replay(const Options& o, std::ostream& out) {
  engine::Scenario sc = engine::load_scenario(o.input);
  if (o.seed) sc.seed = *o.seed;
  const engine::ReplayMetrics m = engine::replay(sc, {!o.no_solo, {}});
  const std::string machine = o.format == "csv" ? engine::to_csv(m) : engine::to_json(m).dump(2) + "\n";
  emit(o, machine, replay_summary(m), out);
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  engine::Scenario sc = engine::load_scenario(o.input);
  if (o.seed) sc.seed = *o.seed;
  const auto kinds = parse_policy_list(o.policies);
  if (kinds.size() < 2) throw ConfigError("compare: --policies needs at least two entries");
  const engine::ComparisonReport r = engine::run_comparison(sc, kinds);
  std::ostringstream sum;
  for (const auto& m : r.runs) sum << replay_summary(m);
  for (const auto& d : r.deltas) {
    sum << policy::to_string(d.policy) << " vs " << policy::to_string(d.baseline) << ": HIGH P95 reduction "
        << (d.high_p95_reduction_frac ? fixed(100.0 * *d.high_p95_reduction_frac, 1) + "%" : std::string("n/a"))
        << ", survival delta " << fixed(100.0 * d.survival_delta, 1) << " pp, kill delta " << d.kill_delta << "\n";
  }
  const std::string machine = o.format == "csv" ? engine::to_csv(r) : engine::to_json(r).dump(2) + "\n";
  emit(o, machine, sum.str(), out);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  std::string csv = engine::csv_header();
  std::size_t rows = 0;
  for (const auto& p : o.inputs) {
    const ojson doc = ojson::parse(read_file(p), nullptr, false);
    if (doc.is_discarded()) throw ParseError(p + ": malformed JSON");
    const std::string part = engine::csv_rows_from_json(doc);
    rows += static_cast<std::size_t>(std::count(part.begin(), part.end(), '\n'));
    csv += part;
  }
  emit(o, csv, std::to_string(rows) + " rows from " + std::to_string(o.inputs.size()) + " file(s)\n", out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"agentcg: memory traces of sandboxed agent tasks, analyzed and replayed through a cgroup v2 model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "agentcg 1.0.0");

  auto add_out = [&](CLI::App* c) { c->add_option("--out,-o", o.out_path, "Write machine-readable output here"); };
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  };
  auto add_seed = [&](CLI::App* c, const char* help) { c->add_option("--seed", o.seed, help); };

  auto* analyze = app.add_subcommand("analyze", "Characterization metrics for one or more trace files");
  analyze->add_option("traces", o.inputs, "Trace files (line-delimited JSON)")->required();
  analyze->add_option("--burst-threshold", o.burst_threshold, "Memory level counted as a burst (bytes, K/M/G)")
      ->capture_default_str();
  add_out(analyze);
  add_format(analyze);

  auto* synth = app.add_subcommand("synth", "Synthesize a baseline-plus-burst trace");
  synth->add_option("params", o.input, "Synthesis parameter file (JSON)")->required();
  add_seed(synth, "Override the seed in the parameter file");
  add_out(synth);

  auto* replay = app.add_subcommand("replay", "Replay a scenario under its configured policy");
  replay->add_option("scenario", o.input, "Scenario file (JSON)")->required();
  replay->add_flag("--no-solo", o.no_solo, "Skip the solo baselines (overhead_frac stays null)");
  add_seed(replay, "Override the scenario seed");
  add_out(replay);
  add_format(replay);

  auto* compare = app.add_subcommand("compare", "Replay a scenario once per policy and diff the results");
  compare->add_option("scenario", o.input, "Scenario file (JSON)")->required();
  compare->add_option("--policies", o.policies,
                      "Comma-separated: static, reactive, predictive, graduated, intent (first is the baseline)")
      ->capture_default_str();
  add_seed(compare, "Override the scenario seed");
  add_out(compare);
  add_format(compare);

  auto* report = app.add_subcommand("report", "Flatten replay or compare JSON outputs into one CSV");
  report->add_option("metrics", o.inputs, "Metrics files written by replay or compare")->required();
  add_out(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analyze) return cmd_analyze(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*replay) return cmd_replay(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*report) return cmd_report(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitUsage;
}

}  // namespace agentcg::cli
