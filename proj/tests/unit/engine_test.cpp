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

#include <gtest/gtest.h>

#include "agentcg/engine.hpp"
#include "scenarios.hpp"

namespace agentcg::engine {
namespace {

using policy::PolicyKind;

constexpr PolicyKind kAllPolicies[] = {PolicyKind::StaticLimits, PolicyKind::ReactiveUserSpace,
                                       PolicyKind::Predictive, PolicyKind::GraduatedInKernel,
                                       PolicyKind::IntentDriven};

Scenario single(PolicyKind kind) {
  Scenario s;
  s.name = "single";
  s.physical_budget = 16 * kGiB;
  s.policy.kind = kind;
  WorkloadSpec w;
  w.name = "only";
  w.trace = testing::burst_trace("only", 518);
  w.history_peaks = {mib(600)};
  s.workloads.push_back(w);
  return s;
}

TEST(Replay, SingleWorkloadIsUncontended) {
  for (PolicyKind k : kAllPolicies) {
    const ReplayMetrics m = replay(single(k));
    ASSERT_EQ(m.workloads.size(), 1u);
    const auto& w = m.workloads[0];
    EXPECT_TRUE(w.completed) << policy::to_string(k);
    ASSERT_TRUE(w.overhead_frac.has_value());
    EXPECT_DOUBLE_EQ(*w.overhead_frac, 0.0);
    EXPECT_DOUBLE_EQ(w.latency.p50_ms, 0.0);
    EXPECT_DOUBLE_EQ(w.latency.p95_ms, 0.0);
    EXPECT_EQ(m.kill_count, 0);
  }
}

TEST(Replay, SoloEqualsTraceDuration) {
  const Scenario s = single(PolicyKind::StaticLimits);
  EXPECT_EQ(solo_baseline(s.workloads[0], s), s.workloads[0].trace.total_ms);
  const ReplayMetrics m = replay(s);
  EXPECT_EQ(m.workloads[0].solo_ms, s.workloads[0].trace.total_ms);
}

TEST(Replay, S1Outcomes) {
  const ReplayMetrics st = replay(testing::s1(PolicyKind::StaticLimits));
  EXPECT_NEAR(st.survival_rate, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(st.kill_count, 1);
  EXPECT_TRUE(st.workload("high").completed);
  EXPECT_EQ(st.delay_trigger_count, 0);

  const ReplayMetrics gr = replay(testing::s1(PolicyKind::GraduatedInKernel));
  EXPECT_DOUBLE_EQ(gr.survival_rate, 1.0);
  EXPECT_EQ(gr.kill_count, 0);
  EXPECT_GT(gr.delay_trigger_count, 0);
}

TEST(Replay, Deterministic) {
  for (PolicyKind k : kAllPolicies) {
    const auto a = to_json(replay(testing::s2(k))).dump();
    const auto b = to_json(replay(testing::s2(k))).dump();
    EXPECT_EQ(a, b) << policy::to_string(k);
  }
}

TEST(Replay, AccelerationOnlyScalesWallTime) {
  Scenario fast = testing::s1(PolicyKind::GraduatedInKernel);
  Scenario slow = fast;
  slow.acceleration = 1;
  const ReplayMetrics a = replay(fast);
  const ReplayMetrics b = replay(slow);
  EXPECT_EQ(a.survival_rate, b.survival_rate);
  EXPECT_EQ(a.high.p95_ms, b.high.p95_ms);
  EXPECT_EQ(a.low.p95_ms, b.low.p95_ms);
  EXPECT_EQ(a.end_ms, b.end_ms);
  const auto ja = to_json(a);
  const auto jb = to_json(b);
  EXPECT_EQ(jb["aggregate"]["end_wall_ms"].get<double>(), 50 * ja["aggregate"]["end_wall_ms"].get<double>());
}

TEST(Replay, ConservationEveryTick) {
  for (PolicyKind k : kAllPolicies) {
    Scenario s = testing::s1(k);
    std::size_t ticks = 0;
    ReplayOptions opt;
    opt.with_solo = false;
    opt.observer = [&](const TickView& v) {
      ++ticks;
      Bytes sum = 0;
      for (std::size_t i = 0; i < v.sessions.size(); ++i) {
        if (v.sessions[i] && v.tree->alive(*v.sessions[i])) sum += v.tree->node(*v.sessions[i]).usage_bytes;
      }
      const Bytes global = v.tree->node(v.tree->root()).usage_bytes;
      ASSERT_EQ(global, sum) << "at " << v.now_ms;
      ASSERT_LE(global, v.physical_budget) << "at " << v.now_ms;
    };
    replay(s, opt);
    EXPECT_GT(ticks, 1000u);
  }
}

TEST(Replay, MonotonePressure) {
  for (PolicyKind k : kAllPolicies) {
    double prev = 0;
    for (Bytes budget = mib(900); budget <= mib(1700); budget += mib(50)) {
      ReplayOptions opt;
      opt.with_solo = false;
      const double surv = replay(testing::three_tenant(budget, k), opt).survival_rate;
      EXPECT_GE(surv, prev) << policy::to_string(k) << " at " << to_mib(budget) << " MiB";
      prev = surv;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
  }
}

TEST(Replay, HighIsNeverKilledBeforeLows) {
  for (Bytes budget = mib(700); budget <= mib(1300); budget += mib(100)) {
    for (PolicyKind k : {PolicyKind::GraduatedInKernel, PolicyKind::IntentDriven}) {
      ReplayOptions opt;
      opt.with_solo = false;
      opt.observer = [&](const TickView& v) {
        if (v.status[0] != WorkloadStatus::Killed) return;
        for (std::size_t i = 1; i < v.status.size(); ++i) {
          ASSERT_NE(v.status[i], WorkloadStatus::Running) << "HIGH killed while a LOW runs, budget "
                                                           << to_mib(budget);
        }
      };
      replay(testing::three_tenant(budget, k), opt);
    }
  }
}

TEST(Replay, ThrottleFidelity) {
  for (Millis d : {100, 500, 2000}) {
    const ReplayMetrics m = replay(testing::fidelity(d));
    ASSERT_EQ(m.delay_trigger_count, 1);
    const Millis measured = *m.workloads[0].completion_ms - *m.workloads[0].solo_ms;
    EXPECT_LE(std::abs(measured - d), m.tick_ms) << d;
  }
}

TEST(Replay, HardCapTruncates) {
  Scenario s = testing::s1(PolicyKind::GraduatedInKernel);
  s.physical_budget = mib(300);
  s.policy.graduated.kill_as_last_resort = false;
  ReplayOptions opt;
  opt.with_solo = false;
  const ReplayMetrics m = replay(s, opt);
  EXPECT_TRUE(m.truncated);
  EXPECT_EQ(m.end_ms, 100 * s.workloads[0].trace.total_ms);
  EXPECT_LT(m.survival_rate, 1.0);
}

TEST(Replay, IntentLadder) {
  const ReplayMetrics fits = replay(testing::intent_loop(mib(400), 2));
  EXPECT_EQ(fits.kill_count, 0);
  EXPECT_EQ(fits.feedback_count, 1);
  EXPECT_EQ(fits.survival_rate, 1.0);
  const ReplayMetrics kills = replay(testing::intent_loop(mib(100), 2));
  EXPECT_EQ(kills.kill_count, 1);
  EXPECT_EQ(kills.feedback_count, 2);
}

TEST(Scenario, Validation) {
  Scenario s = testing::s1(PolicyKind::StaticLimits);
  s.physical_budget = 0;
  EXPECT_THROW(replay(s), ConfigError);
  s = testing::s1(PolicyKind::StaticLimits);
  s.high_watermark = 1.5;
  EXPECT_THROW(replay(s), ConfigError);
  s.high_watermark = 0.9;
  s.workloads.clear();
  EXPECT_THROW(replay(s), ConfigError);
  s = testing::s1(PolicyKind::Predictive);
  s.workloads[0].history_peaks.clear();
  EXPECT_THROW(replay(s), ConfigError);
}

TEST(Scenario, ParseRejectsUnknownKeysAndBadJson) {
  EXPECT_THROW(parse_scenario(R"({"physical_budget":"1G","workloads":[],"bogus":1})"), ConfigError);
  EXPECT_THROW(parse_scenario("{"), ParseError);
}

TEST(Scenario, ShippedFilesMatchBuilders) {
  const std::string dir = AGENTCG_SOURCE_DIR "/scenarios/";
  for (const char* name : {"s1", "s2"}) {
    Scenario shipped = load_scenario(dir + name + ".json");
    Scenario built = std::string(name) == "s1" ? testing::s1(PolicyKind::GraduatedInKernel)
                                               : testing::s2(PolicyKind::GraduatedInKernel);
    EXPECT_EQ(to_json(replay(shipped)).dump(), to_json(replay(built)).dump()) << name;
  }
  Scenario loop = load_scenario(dir + "intent_loop.json");
  EXPECT_EQ(to_json(replay(loop)).dump(), to_json(replay(testing::intent_loop(mib(400), 3))).dump());
}

TEST(Comparison, DeltasMatchIndependentReplays) {
  const Scenario s = testing::s2(PolicyKind::StaticLimits);
  const ComparisonReport r = run_comparison(s, {PolicyKind::StaticLimits, PolicyKind::GraduatedInKernel});
  ASSERT_EQ(r.runs.size(), 2u);
  const ReplayMetrics st = replay(testing::s2(PolicyKind::StaticLimits));
  const ReplayMetrics gr = replay(testing::s2(PolicyKind::GraduatedInKernel));
  EXPECT_EQ(to_json(r.runs[0]).dump(), to_json(st).dump());
  EXPECT_EQ(to_json(r.runs[1]).dump(), to_json(gr).dump());
  ASSERT_EQ(r.deltas.size(), 1u);
  ASSERT_TRUE(r.deltas[0].high_p95_reduction_frac.has_value());
  EXPECT_DOUBLE_EQ(*r.deltas[0].high_p95_reduction_frac, (st.high.p95_ms - gr.high.p95_ms) / st.high.p95_ms);
  EXPECT_GE(*r.deltas[0].high_p95_reduction_frac, 0.10);
  EXPECT_THROW(run_comparison(s, {PolicyKind::StaticLimits}), ConfigError);
}

TEST(Comparison, SamePolicyTwiceIsIdentical) {
  const ComparisonReport r =
      run_comparison(testing::s1(PolicyKind::StaticLimits), {PolicyKind::StaticLimits, PolicyKind::StaticLimits});
  EXPECT_EQ(to_json(r.runs[0]).dump(), to_json(r.runs[1]).dump());
  EXPECT_EQ(r.deltas[0].kill_delta, 0);
}

TEST(Output, CsvIsDerivedFromJson) {
  const ReplayMetrics m = replay(testing::s1(PolicyKind::StaticLimits));
  EXPECT_EQ(to_csv(m), csv_header() + csv_rows_from_json(to_json(m)));
  const std::string csv = to_csv(m);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find("\ns1,static,ALL,"), std::string::npos);
}

TEST(Percentile, NearestRank) {
  EXPECT_DOUBLE_EQ(percentile({}, 95), 0.0);
  EXPECT_DOUBLE_EQ(percentile({5, 1, 3, 2, 4}, 50), 3.0);
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  EXPECT_DOUBLE_EQ(percentile(v, 95), 95.0);
}

}  // namespace
}  // namespace agentcg::engine
