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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../support/cg_property.hpp"
#include "../support/scenarios.hpp"
#include "agentcg/analyzer.hpp"
#include "agentcg/engine.hpp"

namespace {

using namespace agentcg;
using policy::PolicyKind;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::size_t completed(const engine::ReplayMetrics& m) {
  std::size_t n = 0;
  for (const auto& w : m.workloads) n += w.completed ? 1 : 0;
  return n;
}

Outcome s1_survival() {
  const auto st = engine::replay(testing::s1(PolicyKind::StaticLimits), {false, {}});
  const auto gr = engine::replay(testing::s1(PolicyKind::GraduatedInKernel), {false, {}});
  std::vector<trace::TaskTrace> traces;
  for (const auto& w : testing::s1(PolicyKind::StaticLimits).workloads) traces.push_back(w.trace);
  const Bytes coincident = testing::max_coincident_demand(traces, 10);

  int low_kills = 0, high_kills = 0;
  for (const auto& w : st.workloads) {
    if (w.oom_killed) (w.priority == Priority::Low ? low_kills : high_kills)++;
  }
  const bool oracle = coincident > mib(1100);
  const bool static_ok = completed(st) == 2 && st.kill_count == 1 && low_kills == 1 && high_kills == 0;
  const bool grad_ok = completed(gr) == 3 && gr.kill_count == 0 && gr.delay_trigger_count > 0;
  return {oracle && static_ok && grad_ok,
          "coincident demand " + fmt(to_mib(coincident), 1) + " MB > 1100 MB; static " +
              std::to_string(completed(st)) + "/3 with " + std::to_string(low_kills) + " LOW kill(s); graduated " +
              std::to_string(completed(gr)) + "/3, " + std::to_string(gr.kill_count) + " kills, " +
              std::to_string(gr.delay_trigger_count) + " delay triggers"};
}

Outcome s2_latency() {
  const auto r = engine::run_comparison(testing::s2(PolicyKind::StaticLimits),
                                        {PolicyKind::StaticLimits, PolicyKind::GraduatedInKernel});
  const double st = r.runs[0].high.p95_ms;
  const double gr = r.runs[1].high.p95_ms;
  const bool ok = st > 0 && gr <= 0.9 * st;
  return {ok, "HIGH P95 static " + fmt(st) + " ms, graduated " + fmt(gr) + " ms, reduction " +
                  (st > 0 ? fmt(100.0 * (st - gr) / st, 1) + "%" : std::string("n/a"))};
}

Outcome high_overhead() {
  const auto m = engine::replay(testing::s1(PolicyKind::GraduatedInKernel));
  const auto& h = m.workload("high");
  const bool ok = h.completed && h.overhead_frac && *h.overhead_frac <= 0.05;
  return {ok, "HIGH completion " + (h.completion_ms ? std::to_string(*h.completion_ms) : std::string("-")) +
                  " ms vs solo " + (h.solo_ms ? std::to_string(*h.solo_ms) : std::string("-")) + " ms, overhead " +
                  (h.overhead_frac ? fmt(100.0 * *h.overhead_frac, 2) + "%" : std::string("n/a"))};
}

Outcome delay_fidelity() {
  const Millis configured = 2000;
  const auto sc = testing::fidelity(configured);
  const auto m = engine::replay(sc, {false, {}});
  const auto& w = m.workloads.front();
  const double measured = w.latency.p50_ms;
  const bool ok = w.latency.count == 1 && m.delay_trigger_count == 1 &&
                  std::abs(measured - static_cast<double>(configured)) <= static_cast<double>(sc.tick_ms);
  return {ok, "configured " + std::to_string(configured) + " ms, measured " + fmt(measured, 1) + " ms over " +
                  std::to_string(w.latency.count) + " allocation(s), error " +
                  fmt(100.0 * std::abs(measured - configured) / configured, 2) + "%"};
}

Outcome analyzer_fixtures() {
  const double ratio = analyzer::peak_to_avg(testing::peak_fixture());
  const auto t3 = testing::retry_fixture(3);
  const auto t2 = testing::retry_fixture(2);
  const auto g3 = analyzer::detect_retry_groups(t3.tool_calls, t3);
  const auto g2 = analyzer::detect_retry_groups(t2.tool_calls, t2);

  // Synthesis conformance over a spread of schedules and seeds.
  std::size_t traces = 0, bursty = 0;
  bool conform = true;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    trace::SynthParams p;
    p.seed = seed;
    p.duration_s = 120;
    p.init_s = static_cast<double>(seed % 3) * 5;
    p.tool_schedule = {{trace::BashCategory::Test, 1 + static_cast<int>(seed % 3)},
                       {trace::BashCategory::PackageInstall, 1},
                       {trace::BashCategory::FileExploration, 2},
                       {trace::BashCategory::Git, 1}};
    double retained = 0;
    if (seed % 2 == 0) {
      p.retry_groups.push_back({"python -m pytest tests/ -x", 3, 40.0});
      retained = 3 * 40.0;
    }
    const auto t = trace::synthesize_trace(p);
    const auto a = analyzer::burst_attribution(t, mib(p.baseline_mb + retained + 50));
    ++traces;
    if (a.burst_count > 0) {
      ++bursty;
      conform = conform && a.tool_burst_frac == 1.0;
    }
  }
  const bool ok = std::abs(ratio - 15.38) <= 0.01 && g3.size() == 1 && g3.front().length == 3 && g2.empty() &&
                  conform && bursty > 0;
  return {ok, "peak_to_avg " + fmt(ratio, 4) + "; retry groups 3x=" + std::to_string(g3.size()) +
                  " 2x=" + std::to_string(g2.size()) + "; tool attribution 100% on " + std::to_string(bursty) + "/" +
                  std::to_string(traces) + " synthesized traces with bursts" + (conform ? "" : " (VIOLATED)")};
}

Outcome cgroup_properties() {
  const auto r = testing::run_cgroup_properties(10000, 40, 20260101);
  return {r.ok() && r.sequences == 10000 && r.oom_events > 0 && r.group_kills > 0 && r.frozen_rejections > 0,
          std::to_string(r.sequences) + " sequences, " + std::to_string(r.operations) + " ops, " +
              std::to_string(r.oom_events) + " OOMs, " + std::to_string(r.group_kills) + " group kills, " +
              std::to_string(r.frozen_rejections) + " frozen rejections" +
              (r.ok() ? "" : "; " + r.first_violation)};
}

Outcome determinism() {
  bool identical = true;
  bool invariant = true;
  for (PolicyKind k : {PolicyKind::StaticLimits, PolicyKind::ReactiveUserSpace, PolicyKind::Predictive,
                       PolicyKind::GraduatedInKernel, PolicyKind::IntentDriven}) {
    auto sc = testing::s1(k);
    sc.seed = 42;
    const std::string a = engine::to_json(engine::replay(sc)).dump();
    const std::string b = engine::to_json(engine::replay(sc)).dump();
    identical = identical && a == b && engine::to_csv(engine::replay(sc)) == engine::to_csv(engine::replay(sc));
    auto fast = sc;
    fast.acceleration = 50;
    auto slow = sc;
    slow.acceleration = 1;
    const auto mf = engine::replay(fast);
    const auto ms = engine::replay(slow);
    invariant = invariant && mf.survival_rate == ms.survival_rate && mf.high.p50_ms == ms.high.p50_ms &&
                mf.high.p95_ms == ms.high.p95_ms && mf.low.p50_ms == ms.low.p50_ms &&
                mf.low.p95_ms == ms.low.p95_ms && mf.end_ms == ms.end_ms;
    for (std::size_t i = 0; i < mf.workloads.size(); ++i) {
      invariant = invariant && mf.workloads[i].completion_ms == ms.workloads[i].completion_ms &&
                  mf.workloads[i].latency.p95_ms == ms.workloads[i].latency.p95_ms;
    }
  }
  return {identical && invariant, std::string("byte-identical reruns: ") + (identical ? "yes" : "NO") +
                                      "; acceleration 50 vs 1 leaves virtual metrics unchanged: " +
                                      (invariant ? "yes" : "NO")};
}

std::vector<std::string> actions(const engine::ReplayMetrics& m) {
  std::vector<std::string> out;
  for (const auto& e : m.events) out.push_back(e.action);
  return out;
}

bool in_order(const std::vector<std::string>& seq, const std::vector<std::string>& wanted) {
  std::size_t k = 0;
  for (const auto& a : seq) {
    if (k < wanted.size() && a == wanted[k]) ++k;
  }
  return k == wanted.size();
}

Outcome intent_loop() {
  const auto fits = engine::replay(testing::intent_loop(mib(400), 2), {false, {}});
  const auto fails = engine::replay(testing::intent_loop(mib(100), 2), {false, {}});
  const auto a1 = actions(fits);
  const auto a2 = actions(fails);
  const bool ladder = in_order(a1, {"throttle", "freeze", "feedback"});
  const bool recovers = fits.kill_count == 0 && fits.feedback_count >= 1 && completed(fits) == 1;
  const bool ends_in_kill = fails.kill_count == 1 && fails.feedback_count == 2 && !a2.empty() && a2.back() == "kill" &&
                            in_order(a2, {"throttle", "freeze", "feedback", "freeze", "feedback", "freeze", "kill"});
  std::string feedback;
  for (const auto& e : fits.events) {
    if (e.action == "feedback") {
      feedback = e.detail;
      break;
    }
  }
  return {ladder && recovers && ends_in_kill,
          "limit 400 MB: feedback " + std::to_string(fits.feedback_count) + ", kills " +
              std::to_string(fits.kill_count) + ", completed " + std::to_string(completed(fits)) +
              "; limit 100 MB R=2: feedback " + std::to_string(fails.feedback_count) + ", kills " +
              std::to_string(fails.kill_count) + "; first feedback: " + feedback};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "S1 survival flip", 5, s1_survival},
      {2, "S2 HIGH P95 latency direction", 5, s2_latency},
      {3, "HIGH overhead bound", 5, high_overhead},
      {4, "throttle-delay fidelity", 1, delay_fidelity},
      {5, "analyzer fixtures", 1, analyzer_fixtures},
      {6, "cgroup model property suite", 30, cgroup_properties},
      {7, "determinism and acceleration invariance", 10, determinism},
      {8, "intent feedback loop", 2, intent_loop},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << o.detail << " ("
              << fmt(secs, 2) << " s, budget " << fmt(c.budget_s, 0) << " s" << (in_time ? "" : ", OVER BUDGET")
              << ")\n";
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}
