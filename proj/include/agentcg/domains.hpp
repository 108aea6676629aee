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

// Ephemeral per-tool-call cgroups. Every tool call of a session runs in its
// own child "tool_<pid>_<ts>" that is created when the call starts and
// removed when it ends; whatever it still holds then is reparented to the
// session.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcg/cgroup_tree.hpp"
#include "agentcg/common.hpp"
#include "agentcg/intent.hpp"
#include "json.hpp"

namespace agentcg::domains {

using Handle = std::uint32_t;

class DomainBackend {
 public:
  virtual ~DomainBackend() = default;

  virtual Handle create_child(Handle parent, const std::string& name, const cg::Limits& limits) = 0;
  virtual void set_limits(Handle h, const cg::Limits& limits) = 0;
  virtual cg::Limits limits(Handle h) const = 0;
  virtual Bytes read_peak(Handle h) const = 0;
  virtual bool alive(Handle h) const = 0;
  virtual void kill(Handle h) = 0;
  // No-op on a domain that is already gone.
  virtual void remove(Handle h) = 0;
};

// In-process backend over a CgroupTree. Charges go straight to the tree;
// handles are node indices.
class SimBackend final : public DomainBackend {
 public:
  explicit SimBackend(cg::CgroupTree& tree) : tree_(tree) {}

  static Handle handle_of(cg::NodeId id) { return cg::index_of(id); }
  static cg::NodeId node_of(Handle h) { return cg::NodeId{h}; }

  Handle create_child(Handle parent, const std::string& name, const cg::Limits& limits) override;
  void set_limits(Handle h, const cg::Limits& limits) override;
  cg::Limits limits(Handle h) const override;
  Bytes read_peak(Handle h) const override;
  bool alive(Handle h) const override;
  void kill(Handle h) override;
  void remove(Handle h) override;

 private:
  cg::CgroupTree& tree_;
};

// Writes the cgroup v2 interface files under a directory: mkdir per domain,
// memory.high / memory.max / memory.low, cgroup.kill, memory.peak, rmdir.
// Pointed at a delegated cgroupfs subtree it drives real cgroups; pointed at
// a plain directory it only records the writes.
class CgroupFsBackend final : public DomainBackend {
 public:
  explicit CgroupFsBackend(std::filesystem::path root);

  Handle root_handle() const { return 0; }
  const std::filesystem::path& path_of(Handle h) const;

  Handle create_child(Handle parent, const std::string& name, const cg::Limits& limits) override;
  void set_limits(Handle h, const cg::Limits& limits) override;
  cg::Limits limits(Handle h) const override;
  Bytes read_peak(Handle h) const override;
  bool alive(Handle h) const override;
  void kill(Handle h) override;
  void remove(Handle h) override;

 private:
  std::vector<std::filesystem::path> paths_;
};

enum class ToolOutcome { Completed, OomKilled, Frozen, FeedbackRetried };

std::string_view to_string(ToolOutcome o);

struct ToolCallReport {
  std::string session;
  std::string domain_name;
  std::size_t call_index = 0;
  int attempt = 0;
  Bytes peak_bytes = 0;
  Millis duration_ms = 0;
  ToolOutcome outcome = ToolOutcome::Completed;
  std::string feedback;

  nlohmann::ordered_json to_json() const;
};

std::string domain_name(std::uint64_t pid, Millis ts_ms);

struct OpenRequest {
  Handle session = 0;
  std::string session_name;
  std::uint64_t pid = 0;
  Millis ts_ms = 0;
  std::optional<intent::ResourceHint> hint;
  Millis now_ms = 0;
  std::size_t call_index = 0;
  int attempt = 0;
};

// At most one open domain per session.
class ToolDomainManager {
 public:
  explicit ToolDomainManager(DomainBackend& backend, intent::HintPolicyConfig hints = {})
      : backend_(backend), hints_(hints) {}

  // memory.high of the child comes from the hint, clamped to the session's
  // memory.max; without a hint the child has no limits of its own.
  Handle open_tool_domain(const OpenRequest& req);

  // Removes the domain (if still alive) and reports on it.
  ToolCallReport close_tool_domain(Handle domain, Millis now_ms, ToolOutcome outcome = ToolOutcome::Completed,
                                   std::string feedback = {});

  std::optional<Handle> open_domain_of(Handle session) const;
  std::size_t open_count() const { return open_.size(); }

 private:
  struct OpenDomain {
    Handle session;
    std::string session_name;
    std::string name;
    std::size_t call_index;
    int attempt;
    Millis opened_at;
  };

  DomainBackend& backend_;
  intent::HintPolicyConfig hints_;
  std::map<Handle, OpenDomain> open_;
};

}  // namespace agentcg::domains
