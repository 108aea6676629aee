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

#include "agentcg/cgroup_tree.hpp"
#include "cg_property.hpp"

namespace agentcg::cg {
namespace {

TEST(CgroupTree, CreateChild) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "session");
  const NodeId c = t.create_child(s, "tool", Limits{mib(400), kUnlimited, 0});
  EXPECT_EQ(t.node(c).usage_bytes, 0);
  EXPECT_EQ(t.node(s).usage_bytes, 0);
  EXPECT_EQ(t.node(c).limits.high, mib(400));
  EXPECT_EQ(t.path(c), "/session/tool");
  EXPECT_THROW(t.create_child(s, "tool"), Error);
}

TEST(CgroupTree, ChargePropagatesToAncestors) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s");
  const NodeId c = t.create_child(s, "c");
  EXPECT_EQ(t.charge(c, mib(100)).kind, ChargeOutcome::Kind::Ok);
  EXPECT_EQ(t.node(c).usage_bytes, mib(100));
  EXPECT_EQ(t.node(s).usage_bytes, mib(100));
  EXPECT_EQ(t.node(t.root()).usage_bytes, mib(100));
}

TEST(CgroupTree, OverHighReportsOvershoot) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s", Limits{mib(400), kUnlimited, 0});
  t.charge(s, mib(390));
  const ChargeOutcome o = t.charge(s, mib(20));
  EXPECT_EQ(o.kind, ChargeOutcome::Kind::OverHigh);
  EXPECT_EQ(o.overshoot_bytes, mib(10));
  EXPECT_EQ(o.breaching_node, s);
  EXPECT_EQ(t.node(s).usage_bytes, mib(410));
}

TEST(CgroupTree, OomGroupKillsWholeSubtree) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s", Limits{kUnlimited, mib(400), 0}, Priority::Low, true);
  const NodeId a = t.create_child(s, "a");
  const NodeId b = t.create_child(s, "b");
  t.charge(a, mib(390));
  const ChargeOutcome o = t.charge(b, mib(20));
  EXPECT_EQ(o.kind, ChargeOutcome::Kind::Oom);
  EXPECT_EQ(o.victims, (std::vector<NodeId>{s, a, b}));
  EXPECT_FALSE(t.alive(s) || t.alive(a) || t.alive(b));
  EXPECT_EQ(t.node(t.root()).usage_bytes, 0);
}

TEST(CgroupTree, UnchargeAndPeak) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s");
  t.charge(s, mib(100));
  t.uncharge(s, mib(100));
  EXPECT_EQ(t.node(s).usage_bytes, 0);
  EXPECT_EQ(t.node(s).peak_bytes, mib(100));
  EXPECT_THROW(t.uncharge(s, 1), Error);

  const NodeId u = t.create_child(t.root(), "u");
  t.charge(u, mib(300));
  t.uncharge(u, mib(200));
  t.charge(u, mib(50));
  EXPECT_EQ(t.node(u).usage_bytes, mib(150));
  EXPECT_EQ(t.node(u).peak_bytes, mib(300));
}

TEST(CgroupTree, Freeze) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s");
  const NodeId c = t.create_child(s, "c");
  t.freeze(c, true);
  EXPECT_THROW(t.charge(c, 1), StateError);
  t.freeze(c, false);
  EXPECT_TRUE(t.charge(c, 1).ok());
  t.freeze(s, true);
  EXPECT_THROW(t.charge(c, 1), StateError);
  EXPECT_EQ(t.node(c).usage_bytes, 1);
}

TEST(CgroupTree, KillSubtree) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s");
  const NodeId leaf = t.create_child(s, "leaf");
  t.charge(leaf, mib(300));
  t.kill_subtree(leaf);
  EXPECT_EQ(t.node(s).usage_bytes, 0);
  EXPECT_THROW(t.kill_subtree(leaf), StateError);

  const NodeId r = t.create_child(t.root(), "r");
  t.create_child(t.create_child(r, "x"), "y");
  EXPECT_EQ(t.kill_subtree(r).size(), 3u);
  EXPECT_THROW(t.kill_subtree(t.root()), StateError);
}

TEST(CgroupTree, RootLimitsAreRejected) {
  CgroupTree t;
  EXPECT_THROW(t.set_limits(t.root(), Limits{kUnlimited, mib(1), 0}), ConfigError);
}

TEST(CgroupTree, RemoveReparentsResidualCharge) {
  CgroupTree t;
  const NodeId s = t.create_child(t.root(), "s");
  const NodeId c = t.create_child(s, "c");
  t.charge(c, mib(100));
  EXPECT_EQ(t.remove(c), mib(100));
  EXPECT_EQ(t.node(s).self_bytes, mib(100));
  EXPECT_EQ(t.node(s).usage_bytes, mib(100));
  EXPECT_FALSE(t.find_child(s, "c").has_value());
}

TEST(CgroupTree, VictimSelection) {
  CgroupTree t;
  const NodeId a = t.create_child(t.root(), "a", Limits{kUnlimited, kUnlimited, mib(600)});
  const NodeId b = t.create_child(t.root(), "b");
  const NodeId c = t.create_child(t.root(), "c");
  t.charge(a, mib(500));
  t.charge(b, mib(300));
  t.charge(c, mib(200));
  EXPECT_EQ(t.select_oom_victim(), b);

  CgroupTree p;
  const NodeId x = p.create_child(p.root(), "x", Limits{kUnlimited, kUnlimited, mib(600)});
  const NodeId y = p.create_child(p.root(), "y", Limits{kUnlimited, kUnlimited, mib(600)});
  p.charge(x, mib(100));
  p.charge(y, mib(200));
  EXPECT_EQ(p.select_oom_victim(), y);

  CgroupTree q;
  const NodeId m = q.create_child(q.root(), "m");
  const NodeId n = q.create_child(q.root(), "n");
  q.charge(n, mib(300));
  q.charge(m, mib(300));
  EXPECT_EQ(q.select_oom_victim(n), m);
}

TEST(CgroupProperties, ShortRandomRun) {
  const testing::PropertyReport r = testing::run_cgroup_properties(300, 40, 99);
  EXPECT_TRUE(r.ok()) << r.first_violation;
  EXPECT_EQ(r.sequences, 300u);
  EXPECT_GT(r.oom_events, 0u);
  EXPECT_GT(r.frozen_rejections, 0u);
}

}  // namespace
}  // namespace agentcg::cg
