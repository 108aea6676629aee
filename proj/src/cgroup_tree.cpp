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

#include "agentcg/cgroup_tree.hpp"

#include <algorithm>
#include <utility>

namespace agentcg::cg {

namespace {

bool exceeds(Bytes usage, Bytes delta, Bytes limit) {
  return limit != kUnlimited && usage + delta > limit;
}

nlohmann::ordered_json limit_json(Bytes b) {
  if (b == kUnlimited) return "max";
  return b;
}

}  // namespace

CgroupTree::CgroupTree() {
  CgroupNode root;
  root.id = NodeId{0};
  root.name = "";
  root.priority = Priority::High;
  nodes_.push_back(std::move(root));
}

const CgroupNode& CgroupTree::node(NodeId id) const {
  if (index_of(id) >= nodes_.size()) throw StateError("unknown cgroup id " + std::to_string(index_of(id)));
  return nodes_[index_of(id)];
}

CgroupNode& CgroupTree::mut(NodeId id) {
  return const_cast<CgroupNode&>(std::as_const(*this).node(id));
}

void CgroupTree::require_alive(NodeId id, const char* op) const {
  if (!node(id).alive) throw StateError(std::string(op) + ": cgroup '" + path(id) + "' is dead");
}

std::string CgroupTree::path(NodeId id) const {
  const CgroupNode& n = node(id);
  if (!n.parent) return "/";
  std::string parent = path(*n.parent);
  return parent == "/" ? "/" + n.name : parent + "/" + n.name;
}

std::optional<NodeId> CgroupTree::find_child(NodeId parent, const std::string& name) const {
  for (NodeId c : node(parent).children) {
    if (node(c).alive && node(c).name == name) return c;
  }
  return std::nullopt;
}

NodeId CgroupTree::create_child(NodeId parent, const std::string& name, const Limits& limits, Priority priority,
                                bool oom_group) {
  require_alive(parent, "create_child");
  if (effectively_frozen(parent)) throw StateError("create_child: parent '" + path(parent) + "' is frozen");
  if (name.empty() || name.find('/') != std::string::npos) throw ConfigError("create_child: invalid name '" + name + "'");
  if (find_child(parent, name)) throw StateError("create_child: duplicate name '" + name + "' under " + path(parent));
  CgroupNode n;
  n.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
  n.name = name;
  n.parent = parent;
  n.limits = limits;
  n.priority = priority;
  n.oom_group = oom_group;
  const NodeId id = n.id;
  nodes_.push_back(std::move(n));
  mut(parent).children.push_back(id);
  return id;
}

std::vector<NodeId> CgroupTree::path_to_root(NodeId id) const {
  std::vector<NodeId> path;
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent) path.push_back(*cur);
  return path;
}

std::vector<NodeId> CgroupTree::subtree(NodeId id) const {
  std::vector<NodeId> out{id};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (NodeId c : node(out[i]).children) {
      if (node(c).alive) out.push_back(c);
    }
  }
  return out;
}

bool CgroupTree::effectively_frozen(NodeId id) const {
  for (NodeId n : path_to_root(id)) {
    if (node(n).frozen) return true;
  }
  return false;
}

std::optional<NodeId> CgroupTree::max_breach(NodeId id, Bytes delta) const {
  // The first failing counter from the bottom defines the OOM domain.
  for (NodeId n : path_to_root(id)) {
    const CgroupNode& c = node(n);
    if (exceeds(c.usage_bytes, delta, c.limits.max)) return n;
  }
  return std::nullopt;
}

std::pair<Bytes, std::optional<NodeId>> CgroupTree::high_overshoot(NodeId id, Bytes delta) const {
  Bytes worst = 0;
  std::optional<NodeId> where;
  for (NodeId n : path_to_root(id)) {
    const CgroupNode& c = node(n);
    if (exceeds(c.usage_bytes, delta, c.limits.high)) {
      const Bytes over = c.usage_bytes + delta - c.limits.high;
      if (over > worst) {
        worst = over;
        where = n;
      }
    }
  }
  return {worst, where};
}

std::vector<NodeId> CgroupTree::oom_victims(NodeId oom_domain) const {
  // Badness is the node's own charge, standing in for process RSS.
  NodeId victim = oom_domain;
  Bytes best = -1;
  for (NodeId n : subtree(oom_domain)) {
    if (node(n).self_bytes > best) {
      best = node(n).self_bytes;
      victim = n;
    }
  }
  // memory.oom.group: the highest ancestor up to the OOM domain with the flag
  // set is killed as a unit.
  NodeId kill_root = victim;
  for (NodeId n : path_to_root(victim)) {
    if (node(n).oom_group) kill_root = n;
    if (n == oom_domain) break;
  }
  return subtree(kill_root);
}

ChargeOutcome CgroupTree::charge(NodeId id, Bytes delta) {
  require_alive(id, "charge");
  if (delta <= 0) throw ConfigError("charge: delta must be positive");
  if (effectively_frozen(id)) throw StateError("charge: cgroup '" + path(id) + "' is frozen");

  ChargeOutcome out;
  if (auto breach = max_breach(id, delta)) {
    out.kind = ChargeOutcome::Kind::Oom;
    out.breaching_node = breach;
    out.overshoot_bytes = node(*breach).usage_bytes + delta - node(*breach).limits.max;
    const auto victims = oom_victims(*breach);
    kill_subtree(victims.front());
    out.victims = victims;
    return out;
  }

  auto [over, where] = high_overshoot(id, delta);
  CgroupNode& target = mut(id);
  target.self_bytes += delta;
  for (NodeId n : path_to_root(id)) {
    CgroupNode& c = mut(n);
    c.usage_bytes += delta;
    c.peak_bytes = std::max(c.peak_bytes, c.usage_bytes);
  }
  if (where) {
    out.kind = ChargeOutcome::Kind::OverHigh;
    out.overshoot_bytes = over;
    out.breaching_node = where;
  }
  return out;
}

void CgroupTree::uncharge(NodeId id, Bytes delta) {
  require_alive(id, "uncharge");
  if (delta < 0) throw ConfigError("uncharge: delta must be non-negative");
  if (delta > node(id).self_bytes) throw StateError("uncharge: underflow on '" + path(id) + "'");
  mut(id).self_bytes -= delta;
  for (NodeId n : path_to_root(id)) mut(n).usage_bytes -= delta;
}

void CgroupTree::set_limits(NodeId id, const Limits& limits) {
  require_alive(id, "set_limits");
  if (id == root()) throw ConfigError("set_limits: the root cgroup has no memory limits");
  if (limits.high < 0 || limits.max < 0 || limits.low < 0) throw ConfigError("set_limits: negative limit");
  mut(id).limits = limits;
}

void CgroupTree::set_oom_group(NodeId id, bool on) {
  require_alive(id, "set_oom_group");
  mut(id).oom_group = on;
}

void CgroupTree::freeze(NodeId id, bool on) {
  require_alive(id, "freeze");
  mut(id).frozen = on;
}

std::vector<NodeId> CgroupTree::kill_subtree(NodeId id) {
  require_alive(id, "kill_subtree");
  if (id == root()) throw StateError("kill_subtree: cannot kill the root cgroup");
  const std::vector<NodeId> doomed = subtree(id);
  const Bytes released = node(id).usage_bytes;
  if (const auto parent = node(id).parent) {
    for (NodeId n : path_to_root(*parent)) mut(n).usage_bytes -= released;
  }
  for (NodeId n : doomed) {
    CgroupNode& c = mut(n);
    c.alive = false;
    c.frozen = false;
    c.usage_bytes = 0;
    c.self_bytes = 0;
  }
  return doomed;
}

Bytes CgroupTree::remove(NodeId id) {
  require_alive(id, "remove");
  const CgroupNode& n = node(id);
  if (!n.parent) throw StateError("remove: cannot remove the root cgroup");
  for (NodeId c : n.children) {
    if (node(c).alive) throw StateError("remove: cgroup '" + path(id) + "' has live children");
  }
  const Bytes moved = n.self_bytes;
  mut(*n.parent).self_bytes += moved;
  CgroupNode& m = mut(id);
  m.self_bytes = 0;
  m.usage_bytes = 0;
  m.alive = false;
  return moved;
}

NodeId CgroupTree::select_oom_victim(std::optional<NodeId>) const {
  std::optional<NodeId> best_unprotected, best_any;
  for (NodeId c : node(root()).children) {
    const CgroupNode& n = node(c);
    if (!n.alive) continue;
    auto better = [&](std::optional<NodeId> cur) {
      return !cur || n.usage_bytes > node(*cur).usage_bytes;
    };
    if (better(best_any)) best_any = c;
    if (n.usage_bytes > n.limits.low && better(best_unprotected)) best_unprotected = c;
  }
  if (!best_any) throw StateError("select_oom_victim: no live session cgroups");
  return best_unprotected ? *best_unprotected : *best_any;
}

nlohmann::ordered_json CgroupTree::snapshot() const {
  auto dump = [&](auto&& self, NodeId id) -> nlohmann::ordered_json {
    const CgroupNode& n = node(id);
    nlohmann::ordered_json j;
    j["id"] = index_of(id);
    j["name"] = path(id);
    j["usage"] = n.usage_bytes;
    j["self"] = n.self_bytes;
    j["peak"] = n.peak_bytes;
    j["high"] = limit_json(n.limits.high);
    j["max"] = limit_json(n.limits.max);
    j["low"] = n.limits.low;
    j["frozen"] = n.frozen;
    j["oom_group"] = n.oom_group;
    j["priority"] = to_string(n.priority);
    auto kids = nlohmann::ordered_json::array();
    for (NodeId c : n.children) {
      if (node(c).alive) kids.push_back(self(self, c));
    }
    j["children"] = std::move(kids);
    return j;
  };
  return dump(dump, root());
}

}  // namespace agentcg::cg
