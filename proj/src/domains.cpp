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

#include "agentcg/domains.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

namespace agentcg::domains {

namespace fs = std::filesystem;

Handle SimBackend::create_child(Handle parent, const std::string& name, const cg::Limits& limits) {
  const cg::CgroupNode& p = tree_.node(node_of(parent));
  return handle_of(tree_.create_child(node_of(parent), name, limits, p.priority));
}

void SimBackend::set_limits(Handle h, const cg::Limits& limits) { tree_.set_limits(node_of(h), limits); }

cg::Limits SimBackend::limits(Handle h) const { return tree_.node(node_of(h)).limits; }

Bytes SimBackend::read_peak(Handle h) const { return tree_.node(node_of(h)).peak_bytes; }

bool SimBackend::alive(Handle h) const { return tree_.alive(node_of(h)); }

void SimBackend::kill(Handle h) {
  if (tree_.alive(node_of(h))) tree_.kill_subtree(node_of(h));
}

void SimBackend::remove(Handle h) {
  if (tree_.alive(node_of(h))) tree_.remove(node_of(h));
}

namespace {

void write_file(const fs::path& p, const std::string& value) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw StateError("cannot write " + p.string());
  out << value << '\n';
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::string s;
  std::getline(in, s);
  return s;
}

std::string limit_text(Bytes b) { return b == kUnlimited ? "max" : std::to_string(b); }

Bytes parse_limit_text(const std::optional<std::string>& s, Bytes fallback) {
  if (!s || s->empty()) return fallback;
  return *s == "max" ? kUnlimited : std::stoll(*s);
}

}  // namespace

CgroupFsBackend::CgroupFsBackend(fs::path root) {
  if (!fs::is_directory(root)) throw ConfigError("cgroup root " + root.string() + " is not a directory");
  paths_.push_back(std::move(root));
}

const fs::path& CgroupFsBackend::path_of(Handle h) const {
  if (h >= paths_.size()) throw StateError("unknown domain handle " + std::to_string(h));
  return paths_[h];
}

Handle CgroupFsBackend::create_child(Handle parent, const std::string& name, const cg::Limits& limits) {
  const fs::path p = path_of(parent) / name;
  std::error_code ec;
  if (!fs::create_directory(p, ec) || ec) throw StateError("mkdir " + p.string() + " failed");
  paths_.push_back(p);
  const auto h = static_cast<Handle>(paths_.size() - 1);
  set_limits(h, limits);
  return h;
}

void CgroupFsBackend::set_limits(Handle h, const cg::Limits& limits) {
  const fs::path& p = path_of(h);
  write_file(p / "memory.high", limit_text(limits.high));
  write_file(p / "memory.max", limit_text(limits.max));
  write_file(p / "memory.low", std::to_string(limits.low));
}

cg::Limits CgroupFsBackend::limits(Handle h) const {
  const fs::path& p = path_of(h);
  cg::Limits l;
  l.high = parse_limit_text(read_file(p / "memory.high"), kUnlimited);
  l.max = parse_limit_text(read_file(p / "memory.max"), kUnlimited);
  l.low = parse_limit_text(read_file(p / "memory.low"), 0);
  return l;
}

Bytes CgroupFsBackend::read_peak(Handle h) const {
  const auto s = read_file(path_of(h) / "memory.peak");
  return s && !s->empty() ? std::stoll(*s) : 0;
}

bool CgroupFsBackend::alive(Handle h) const { return fs::is_directory(path_of(h)); }

void CgroupFsBackend::kill(Handle h) {
  if (alive(h)) write_file(path_of(h) / "cgroup.kill", "1");
}

void CgroupFsBackend::remove(Handle h) {
  const fs::path& p = path_of(h);
  if (!fs::exists(p)) return;
  std::error_code ec;
  // cgroupfs accepts rmdir with interface files present; a plain directory
  // does not.
  if (!fs::remove(p, ec)) fs::remove_all(p);
}

std::string_view to_string(ToolOutcome o) {
  switch (o) {
    case ToolOutcome::Completed: return "completed";
    case ToolOutcome::OomKilled: return "oom_killed";
    case ToolOutcome::Frozen: return "frozen";
    case ToolOutcome::FeedbackRetried: return "feedback_retried";
  }
  return "completed";
}

nlohmann::ordered_json ToolCallReport::to_json() const {
  nlohmann::ordered_json j;
  j["session"] = session;
  j["domain"] = domain_name;
  j["call_index"] = call_index;
  j["attempt"] = attempt;
  j["peak_bytes"] = peak_bytes;
  j["duration_ms"] = duration_ms;
  j["outcome"] = to_string(outcome);
  if (!feedback.empty()) j["feedback"] = feedback;
  return j;
}

std::string domain_name(std::uint64_t pid, Millis ts_ms) {
  return "tool_" + std::to_string(pid) + "_" + std::to_string(ts_ms);
}

Handle ToolDomainManager::open_tool_domain(const OpenRequest& req) {
  if (!backend_.alive(req.session)) throw StateError("open_tool_domain: session '" + req.session_name + "' is dead");
  if (open_domain_of(req.session)) {
    throw StateError("open_tool_domain: session '" + req.session_name + "' already has an open tool domain");
  }
  cg::Limits limits;
  if (req.hint) {
    limits.high = std::min(intent::hint_to_limits(*req.hint, hints_), backend_.limits(req.session).max);
  }
  const std::string name = domain_name(req.pid, req.ts_ms);
  const Handle h = backend_.create_child(req.session, name, limits);
  open_.emplace(h, OpenDomain{req.session, req.session_name, name, req.call_index, req.attempt, req.now_ms});
  return h;
}

ToolCallReport ToolDomainManager::close_tool_domain(Handle domain, Millis now_ms, ToolOutcome outcome,
                                                    std::string feedback) {
  const auto it = open_.find(domain);
  if (it == open_.end()) throw StateError("close_tool_domain: unknown domain " + std::to_string(domain));
  const OpenDomain d = it->second;
  open_.erase(it);
  ToolCallReport r;
  r.session = d.session_name;
  r.domain_name = d.name;
  r.call_index = d.call_index;
  r.attempt = d.attempt;
  r.peak_bytes = backend_.read_peak(domain);
  r.duration_ms = std::max<Millis>(0, now_ms - d.opened_at);
  r.outcome = outcome;
  r.feedback = std::move(feedback);
  backend_.remove(domain);
  return r;
}

std::optional<Handle> ToolDomainManager::open_domain_of(Handle session) const {
  for (const auto& [h, d] : open_) {
    if (d.session == session) return h;
  }
  return std::nullopt;
}

}  // namespace agentcg::domains
