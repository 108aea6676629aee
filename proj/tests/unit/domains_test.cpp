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

#include <filesystem>
#include <fstream>

#include "agentcg/cgroup_tree.hpp"
#include "agentcg/domains.hpp"

namespace agentcg::domains {
namespace {

struct Fixture : ::testing::Test {
  cg::CgroupTree tree;
  SimBackend backend{tree};
  ToolDomainManager mgr{backend};
  cg::NodeId session = tree.create_child(tree.root(), "session", cg::Limits{kUnlimited, mib(2048), 0});

  OpenRequest request(std::optional<intent::ResourceHint> hint = std::nullopt) {
    OpenRequest r;
    r.session = SimBackend::handle_of(session);
    r.session_name = "session";
    r.pid = 1234;
    r.ts_ms = 5000;
    r.hint = hint;
    r.now_ms = 100;
    return r;
  }
};

TEST(DomainName, PidAndTimestamp) { EXPECT_EQ(domain_name(1234, 5000), "tool_1234_5000"); }

TEST_F(Fixture, HintSetsChildHigh) {
  const Handle h = mgr.open_tool_domain(request(intent::parse_hint("memory:low")));
  EXPECT_EQ(tree.node(SimBackend::node_of(h)).name, "tool_1234_5000");
  EXPECT_EQ(backend.limits(h).high, mib(64));
}

TEST_F(Fixture, NoHintLeavesChildUnlimited) {
  const Handle h = mgr.open_tool_domain(request());
  EXPECT_EQ(backend.limits(h).high, kUnlimited);
  EXPECT_EQ(backend.limits(h).max, kUnlimited);
}

TEST_F(Fixture, HintIsClampedToSessionMax) {
  tree.set_limits(session, cg::Limits{kUnlimited, mib(32), 0});
  const Handle h = mgr.open_tool_domain(request(intent::parse_hint("memory:high")));
  EXPECT_EQ(backend.limits(h).high, mib(32));
}

TEST_F(Fixture, OneOpenDomainPerSession) {
  mgr.open_tool_domain(request());
  EXPECT_THROW(mgr.open_tool_domain(request()), StateError);
  EXPECT_EQ(mgr.open_count(), 1u);
}

TEST_F(Fixture, CloseReportsPeak) {
  const Handle h = mgr.open_tool_domain(request());
  tree.charge(SimBackend::node_of(h), mib(518));
  tree.uncharge(SimBackend::node_of(h), mib(518));
  const ToolCallReport r = mgr.close_tool_domain(h, 1600);
  EXPECT_EQ(r.peak_bytes, mib(518));
  EXPECT_EQ(r.duration_ms, 1500);
  EXPECT_EQ(r.domain_name, "tool_1234_5000");
  EXPECT_EQ(r.outcome, ToolOutcome::Completed);
  EXPECT_FALSE(backend.alive(h));
  EXPECT_EQ(mgr.open_count(), 0u);
}

TEST_F(Fixture, CloseWithoutChargesHasZeroPeak) {
  const Handle h = mgr.open_tool_domain(request());
  EXPECT_EQ(mgr.close_tool_domain(h, 100).peak_bytes, 0);
}

TEST_F(Fixture, ResidualMigratesToSession) {
  const Handle h = mgr.open_tool_domain(request());
  tree.charge(SimBackend::node_of(h), mib(100));
  const Bytes before = tree.node(session).self_bytes;
  mgr.close_tool_domain(h, 200);
  EXPECT_EQ(tree.node(session).self_bytes, before + mib(100));
  EXPECT_EQ(tree.node(session).usage_bytes, mib(100));
}

TEST_F(Fixture, SessionLimitAppliesThroughChild) {
  tree.set_limits(session, cg::Limits{kUnlimited, mib(100), 0});
  const Handle h = mgr.open_tool_domain(request());
  const cg::ChargeOutcome o = tree.charge(SimBackend::node_of(h), mib(150));
  EXPECT_EQ(o.kind, cg::ChargeOutcome::Kind::Oom);
  EXPECT_EQ(o.breaching_node, session);
}

TEST(CgroupFsBackend, WritesInterfaceFiles) {
  const auto root = std::filesystem::temp_directory_path() / "agentcg_fs_backend_test";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);
  {
    CgroupFsBackend fs(root);
    const Handle s = fs.create_child(fs.root_handle(), "session", cg::Limits{mib(400), kUnlimited, 0});
    auto read = [&](const char* file) {
      std::ifstream in(fs.path_of(s) / file);
      std::string v;
      in >> v;
      return v;
    };
    EXPECT_EQ(read("memory.high"), std::to_string(mib(400)));
    EXPECT_EQ(read("memory.max"), "max");
    EXPECT_EQ(fs.read_peak(s), 0);
    std::ofstream(fs.path_of(s) / "memory.peak") << mib(7) << "\n";
    EXPECT_EQ(fs.read_peak(s), mib(7));
    fs.kill(s);
    EXPECT_EQ(read("cgroup.kill"), "1");
    fs.remove(s);
    EXPECT_FALSE(std::filesystem::exists(root / "session"));
    fs.remove(s);
  }
  std::filesystem::remove_all(root);
}

TEST(ToolOutcome, Names) {
  EXPECT_EQ(to_string(ToolOutcome::FeedbackRetried), "feedback_retried");
  EXPECT_EQ(to_string(ToolOutcome::OomKilled), "oom_killed");
}

}  // namespace
}  // namespace agentcg::domains
