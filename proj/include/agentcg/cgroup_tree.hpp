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

// In-memory model of the cgroup v2 memory controller: hierarchical charging,
// memory.high / memory.max / memory.low, cgroup.freeze, cgroup.kill and
// memory.oom.group.
//
// Accounting follows the kernel: a charge lands on one node and is added to
// the usage of that node and every ancestor. A node's usage is therefore its
// own (self) charge plus the usage of its live children. Crossing memory.high
// is reported but never reclaimed here; callers decide what a breach costs.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agentcg/common.hpp"
#include "json.hpp"

namespace agentcg::cg {

enum class NodeId : std::uint32_t {};

constexpr std::uint32_t index_of(NodeId id) { return static_cast<std::uint32_t>(id); }

struct Limits {
  Bytes high = kUnlimited;
  Bytes max = kUnlimited;
  // Protection floor; 0 means unprotected.
  Bytes low = 0;

  friend bool operator==(const Limits&, const Limits&) = default;
};

struct CgroupNode {
  NodeId id{};
  std::string name;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  Bytes usage_bytes = 0;
  Bytes self_bytes = 0;
  Bytes peak_bytes = 0;
  Limits limits;
  bool frozen = false;
  bool oom_group = false;
  Priority priority = Priority::Low;
  bool alive = true;
};

struct ChargeOutcome {
  enum class Kind { Ok, OverHigh, Oom };

  Kind kind = Kind::Ok;
  // OverHigh: largest usage-above-high on the charged path after the charge.
  // Oom: bytes by which the breaching node's max would have been exceeded.
  Bytes overshoot_bytes = 0;
  std::optional<NodeId> breaching_node;
  std::vector<NodeId> victims;

  bool ok() const { return kind != Kind::Oom; }
};

class CgroupTree {
 public:
  CgroupTree();

  NodeId root() const { return NodeId{0}; }

  NodeId create_child(NodeId parent, const std::string& name, const Limits& limits = {},
                      Priority priority = Priority::Low, bool oom_group = false);

  // Charges delta (> 0) to node. If any node on the path to the root would
  // exceed its max, nothing is charged and the OOM victims are killed.
  ChargeOutcome charge(NodeId node, Bytes delta);
  void uncharge(NodeId node, Bytes delta);

  // Read-only previews of what charge() would do.
  std::optional<NodeId> max_breach(NodeId node, Bytes delta) const;
  // Largest (usage + delta - high) over the path, with the node that has it.
  std::pair<Bytes, std::optional<NodeId>> high_overshoot(NodeId node, Bytes delta) const;

  void set_limits(NodeId node, const Limits& limits);
  void set_oom_group(NodeId node, bool on);

  void freeze(NodeId node, bool on);
  // True if the node or any ancestor is frozen.
  bool effectively_frozen(NodeId node) const;

  // Marks the node and all descendants dead and removes their usage from the
  // ancestors. Returns the killed nodes, subtree root first.
  std::vector<NodeId> kill_subtree(NodeId node);

  // Removes a live leaf. Usage still charged to it is moved into the parent's
  // self charge, the way the kernel reparents page cache on rmdir. Returns the
  // moved byte count.
  Bytes remove(NodeId node);

  // Largest-usage live child of the root whose usage exceeds its memory.low;
  // when all are protected, the largest overall. Ties go to the smallest id.
  // The requesting node does not influence the choice.
  NodeId select_oom_victim(std::optional<NodeId> requesting = std::nullopt) const;

  const CgroupNode& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool alive(NodeId id) const { return node(id).alive; }
  std::optional<NodeId> find_child(NodeId parent, const std::string& name) const;
  std::string path(NodeId id) const;

  // Debug/golden dump of the live tree.
  nlohmann::ordered_json snapshot() const;

 private:
  CgroupNode& mut(NodeId id);
  void require_alive(NodeId id, const char* op) const;
  std::vector<NodeId> path_to_root(NodeId id) const;
  std::vector<NodeId> subtree(NodeId id) const;
  std::vector<NodeId> oom_victims(NodeId oom_domain) const;

  std::vector<CgroupNode> nodes_;
};

}  // namespace agentcg::cg
