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

#include "agentcg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace agentcg::engine {

using policy::Action;
using policy::PolicyKind;

void Scenario::validate() const {
  if (physical_budget <= 0) throw ConfigError("scenario: physical_budget must be > 0");
  if (!(acceleration > 0)) throw ConfigError("scenario: acceleration must be > 0");
  if (tick_ms <= 0) throw ConfigError("scenario: tick_ms must be > 0");
  if (!(high_watermark > 0 && high_watermark <= 1)) throw ConfigError("scenario: high_watermark must lie in (0, 1]");
  if (contention_slope_ms_per_mb < 0) throw ConfigError("scenario: contention_slope_ms_per_mb must be >= 0");
  if (stall_timeout_ms < 0) throw ConfigError("scenario: stall_timeout_ms must be >= 0");
  if (workloads.empty()) throw ConfigError("scenario: at least one workload is required");
  policy.validate();
  std::set<std::string> names;
  for (const auto& w : workloads) {
    if (w.name.empty() || w.name.find('/') != std::string::npos) {
      throw ConfigError("scenario: invalid workload name '" + w.name + "'");
    }
    if (!names.insert(w.name).second) throw ConfigError("scenario: duplicate workload name '" + w.name + "'");
    if (w.memory_high < 0 || w.memory_max < 0 || w.memory_low < 0) {
      throw ConfigError("scenario: workload '" + w.name + "' has a negative limit");
    }
    trace::validate(w.trace);
    for (const auto& [idx, hint] : w.hints) {
      if (idx >= w.trace.tool_calls.size()) {
        throw ConfigError("scenario: workload '" + w.name + "' hints tool call " + std::to_string(idx) +
                          " which does not exist");
      }
    }
  }
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

const WorkloadMetrics& ReplayMetrics::workload(const std::string& name) const {
  for (const auto& w : workloads) {
    if (w.name == name) return w;
  }
  throw ConfigError("no workload named '" + name + "'");
}

namespace {

LatencyStats stats_of(const std::vector<double>& v) {
  return LatencyStats{v.size(), percentile(v, 50), percentile(v, 95)};
}

enum class FreezeCause { Throttle, MaxBreach, Budget };

struct Request {
  Millis start_ms = 0;
  bool delay_checked = false;
  bool throttled = false;
};

struct Workload {
  const WorkloadSpec* spec = nullptr;
  cg::NodeId session{};
  std::uint64_t pid_base = 0;
  WorkloadStatus status = WorkloadStatus::Running;
  Millis progress = 0;
  std::optional<Request> request;
  Millis paused_until = 0;
  std::optional<Millis> stall_since;
  double debt_ms = 0;

  bool frozen = false;
  Millis frozen_since = 0;
  FreezeCause cause = FreezeCause::Throttle;
  Bytes freeze_limit = 0;
  Bytes freeze_demand = 0;
  int consecutive_throttles = 0;

  std::size_t next_call = 0;
  std::optional<domains::Handle> domain;
  std::size_t domain_call = 0;
  Millis domain_open_progress = 0;
  std::map<std::size_t, int> retries;
  std::optional<std::size_t> scaled_call;
  double scale = 1.0;
  Bytes scaled_base = 0;

  std::vector<double> latencies;
  std::optional<Millis> completion;
  bool oom_killed = false;
  int delay_triggers = 0;
  int freezes = 0;
  int feedbacks = 0;
};

class Replayer {
 public:
  Replayer(const Scenario& sc, const TickObserver& observer)
      : sc_(sc), observer_(observer), backend_(tree_), mgr_(backend_, sc.policy.intent.hints) {}

  ReplayMetrics run();

 private:
  bool delay_mech() const { return sc_.policy.has_delay_mechanism(); }
  const std::vector<trace::ToolCallEvent>& calls(const Workload& w) const { return w.spec->trace.tool_calls; }
  Bytes usage(cg::NodeId id) const { return tree_.node(id).usage_bytes; }
  Bytes global() const { return usage(tree_.root()); }
  double utilization(Bytes g) const { return static_cast<double>(g) / static_cast<double>(sc_.physical_budget); }

  void setup();
  void step(Workload& w);
  bool handle_frozen(Workload& w);
  bool thaw_ok(const Workload& w) const;
  void bookkeeping(Workload& w);
  void open_domain(Workload& w, std::size_t call);
  void close_domain(Workload& w, domains::ToolOutcome outcome, std::string feedback = {});
  Bytes effective_demand(const Workload& w, Millis t) const;
  cg::NodeId charge_node(const Workload& w) const;
  void release(Workload& w, Bytes amount);
  void advance(Workload& w, Millis next);
  void complete(Workload& w);
  void kill(Workload& w, const std::string& reason);
  void freeze(Workload& w, FreezeCause cause, Bytes limit, Bytes demand);
  void feedback(Workload& w);
  void budget_stall(Workload& w);
  void reactive_tick();
  Workload& owner(cg::NodeId session);
  void event(const Workload& w, const std::string& action, const std::string& detail = {});
  bool all_done() const;
  ReplayMetrics collect(bool truncated);

  const Scenario& sc_;
  const TickObserver& observer_;
  cg::CgroupTree tree_;
  domains::SimBackend backend_;
  domains::ToolDomainManager mgr_;
  std::vector<Workload> ws_;
  ReplayMetrics m_;
  Millis now_ = 0;

  bool high_stalled_prev_ = false;
  bool high_stalled_now_ = false;
  bool stall_prev_ = false;
  bool stall_now_ = false;

  std::vector<policy::UtilizationSample> util_history_;
  std::optional<policy::ScheduledAction> pending_reactive_;
};

void Replayer::setup() {
  std::mt19937_64 rng(sc_.seed);
  ws_.resize(sc_.workloads.size());
  for (std::size_t i = 0; i < ws_.size(); ++i) {
    const WorkloadSpec& spec = sc_.workloads[i];
    Workload& w = ws_[i];
    w.spec = &spec;
    w.pid_base = 1000 + rng() % 60000;
    cg::Limits limits{spec.memory_high, spec.memory_max, spec.memory_low};
    if (sc_.policy.kind == PolicyKind::Predictive) {
      const auto& hist = spec.history_peaks.empty() ? sc_.policy.predictive.history_peaks : spec.history_peaks;
      if (hist.empty()) throw ConfigError("predictive policy: workload '" + spec.name + "' has no history_peaks");
      limits.max = policy::predictive_limit(hist, sc_.policy.predictive.percentile);
    }
    // A session dies as a unit when its own limit is hit.
    w.session = tree_.create_child(tree_.root(), spec.name, limits, spec.priority, /*oom_group=*/true);
  }
}

void Replayer::event(const Workload& w, const std::string& action, const std::string& detail) {
  m_.events.push_back(Event{now_, w.spec->name, action, detail});
}

Workload& Replayer::owner(cg::NodeId session) {
  for (auto& w : ws_) {
    if (w.session == session) return w;
  }
  throw StateError("no workload owns cgroup " + tree_.path(session));
}

Bytes Replayer::effective_demand(const Workload& w, Millis t) const {
  Bytes d = trace::demand_at(w.spec->trace, t);
  if (w.scaled_call) {
    const auto& c = calls(w)[*w.scaled_call];
    if (t >= c.start_ms && t <= c.end_ms) d = intent::scaled_peak(d, w.scaled_base, w.scale);
  }
  return d;
}

cg::NodeId Replayer::charge_node(const Workload& w) const {
  return w.domain ? domains::SimBackend::node_of(*w.domain) : w.session;
}

void Replayer::release(Workload& w, Bytes amount) {
  if (w.domain) {
    const cg::NodeId d = domains::SimBackend::node_of(*w.domain);
    const Bytes from_tool = std::min(amount, tree_.node(d).self_bytes);
    if (from_tool > 0) tree_.uncharge(d, from_tool);
    amount -= from_tool;
  }
  if (amount > 0) tree_.uncharge(w.session, amount);
}

void Replayer::open_domain(Workload& w, std::size_t call) {
  const auto& c = calls(w)[call];
  const int attempt = w.retries.count(call) ? w.retries.at(call) : 0;
  std::optional<intent::ResourceHint> hint;
  // Hints are only honored by the intent-driven controller, and a retry
  // after feedback runs without the hint's limit.
  if (sc_.policy.kind == PolicyKind::IntentDriven && attempt == 0) {
    if (auto it = w.spec->hints.find(call); it != w.spec->hints.end()) hint = it->second;
  }
  domains::OpenRequest req;
  req.session = domains::SimBackend::handle_of(w.session);
  req.session_name = w.spec->name;
  req.pid = w.pid_base + call;
  req.ts_ms = c.start_ms;
  req.hint = hint;
  req.now_ms = now_;
  req.call_index = call;
  req.attempt = attempt;
  w.domain = mgr_.open_tool_domain(req);
  w.domain_call = call;
  w.domain_open_progress = w.progress;
  w.next_call = call + 1;
}

void Replayer::close_domain(Workload& w, domains::ToolOutcome outcome, std::string feedback) {
  if (!w.domain) return;
  m_.tool_calls.push_back(mgr_.close_tool_domain(*w.domain, now_, outcome, std::move(feedback)));
  w.domain.reset();
}

void Replayer::bookkeeping(Workload& w) {
  if (w.domain && w.progress >= calls(w)[w.domain_call].end_ms) close_domain(w, domains::ToolOutcome::Completed);
  if (!w.domain && w.next_call < calls(w).size() && calls(w)[w.next_call].start_ms < w.progress + sc_.tick_ms) {
    open_domain(w, w.next_call);
  }
}

void Replayer::advance(Workload& w, Millis next) {
  w.progress = next;
  if (w.progress >= w.spec->trace.total_ms) complete(w);
}

void Replayer::complete(Workload& w) {
  close_domain(w, domains::ToolOutcome::Completed);
  const Bytes held = tree_.node(w.session).self_bytes;
  if (held > 0) tree_.uncharge(w.session, held);
  tree_.remove(w.session);
  w.status = WorkloadStatus::Completed;
  w.completion = now_ + sc_.tick_ms;
  w.request.reset();
  w.stall_since.reset();
}

void Replayer::kill(Workload& w, const std::string& reason) {
  if (tree_.alive(w.session)) tree_.kill_subtree(w.session);
  close_domain(w, domains::ToolOutcome::OomKilled);
  w.status = WorkloadStatus::Killed;
  w.oom_killed = true;
  w.frozen = false;
  w.request.reset();
  w.stall_since.reset();
  ++m_.kill_count;
  event(w, "kill", reason);
}

void Replayer::freeze(Workload& w, FreezeCause cause, Bytes limit, Bytes demand) {
  tree_.freeze(w.session, true);
  w.frozen = true;
  w.frozen_since = now_;
  w.cause = cause;
  w.freeze_limit = limit;
  w.freeze_demand = demand;
  w.stall_since.reset();
  w.paused_until = 0;
  ++w.freezes;
  ++m_.freeze_count;
  static constexpr const char* kCause[] = {"memory.high throttling", "memory.max", "physical budget"};
  event(w, "freeze", kCause[static_cast<int>(cause)]);
}

void Replayer::feedback(Workload& w) {
  const std::size_t call = w.domain_call;
  const cg::NodeId d = domains::SimBackend::node_of(*w.domain);
  const Bytes peak = std::max(tree_.node(d).peak_bytes, w.freeze_demand);
  const auto kind = w.cause == FreezeCause::Throttle ? intent::FeedbackKind::Throttled : intent::FeedbackKind::OomKilled;
  const intent::FeedbackMessage msg = intent::render_feedback(peak, w.freeze_limit, kind);
  tree_.kill_subtree(d);
  close_domain(w, domains::ToolOutcome::FeedbackRetried, msg.rendered);
  const int used = ++w.retries[call];
  ++w.feedbacks;
  ++m_.feedback_count;
  event(w, "feedback", msg.rendered);

  tree_.freeze(w.session, false);
  w.frozen = false;
  w.consecutive_throttles = 0;
  w.request.reset();
  w.stall_since.reset();
  w.debt_ms = 0;
  w.paused_until = 0;
  // The agent reruns the call with a smaller footprint.
  w.progress = w.domain_open_progress;
  w.next_call = call;
  w.scaled_call = call;
  w.scale = std::pow(sc_.policy.intent.reduction_factor, used);
  w.scaled_base = trace::demand_at(w.spec->trace, calls(w)[call].start_ms);
}

bool Replayer::thaw_ok(const Workload& w) const {
  if (stall_prev_) return false;
  const Millis next = std::min(w.progress + sc_.tick_ms, w.spec->trace.total_ms);
  const Bytes delta = effective_demand(w, next) - usage(w.session);
  if (delta <= 0) return true;
  const cg::NodeId node = charge_node(w);
  if (tree_.max_breach(node, delta)) return false;
  if (global() + delta > sc_.physical_budget) return false;
  const auto [over, where] = tree_.high_overshoot(node, delta);
  const policy::PressureSignal sig{utilization(global() + delta), where, over, high_stalled_prev_};
  return policy::throttle_delay(sc_.policy, w.spec->priority, sig) <= 0;
}

bool Replayer::handle_frozen(Workload& w) {
  if (thaw_ok(w)) {
    tree_.freeze(w.session, false);
    w.frozen = false;
    w.consecutive_throttles = 0;
    // Time spent frozen stands in for the throttle of the pending request.
    if (w.request) w.request->delay_checked = true;
    event(w, "thaw");
    return true;
  }
  policy::EscalationState s;
  s.consecutive_throttles = w.consecutive_throttles;
  s.frozen = true;
  s.frozen_for_ms = now_ - w.frozen_since;
  s.feedback_retries_used = w.domain && w.retries.count(w.domain_call) ? w.retries.at(w.domain_call) : 0;
  policy::FeedbackBudget fb{sc_.policy.kind == PolicyKind::IntentDriven && w.domain.has_value(),
                            sc_.policy.intent.max_retries};
  switch (policy::graduated_step(s, sc_.policy.graduated, fb)) {
    case Action::Feedback: feedback(w); break;
    case Action::Kill: kill(w, "escalation"); break;
    default: break;
  }
  return false;
}

void Replayer::budget_stall(Workload& w) {
  if (!w.stall_since) w.stall_since = now_;
  stall_now_ = true;
  if (w.spec->priority == Priority::High) high_stalled_now_ = true;
  if (now_ - *w.stall_since < sc_.stall_timeout_ms) return;

  Workload& victim = owner(tree_.select_oom_victim(w.session));
  if (!delay_mech()) {
    kill(victim, "system oom");
  } else if (!victim.frozen) {
    freeze(victim, FreezeCause::Budget, sc_.physical_budget, global());
  }
  for (auto& o : ws_) o.stall_since.reset();
}

void Replayer::step(Workload& w) {
  if (w.status != WorkloadStatus::Running) return;
  if (w.frozen && !handle_frozen(w)) return;
  if (w.debt_ms >= static_cast<double>(sc_.tick_ms)) {
    w.debt_ms -= static_cast<double>(sc_.tick_ms);
    return;
  }
  if (w.paused_until > now_) return;

  bookkeeping(w);
  const Millis next = std::min(w.progress + sc_.tick_ms, w.spec->trace.total_ms);
  const Bytes delta = effective_demand(w, next) - usage(w.session);
  if (delta <= 0) {
    if (delta < 0) release(w, -delta);
    w.request.reset();
    w.stall_since.reset();
    advance(w, next);
    return;
  }

  if (!w.request) w.request = Request{now_};
  const cg::NodeId node = charge_node(w);

  if (delay_mech() && !w.request->delay_checked) {
    w.request->delay_checked = true;
    const auto [over, where] = tree_.high_overshoot(node, delta);
    const policy::PressureSignal sig{utilization(global() + delta), where, over, high_stalled_prev_};
    const double d = policy::throttle_delay(sc_.policy, w.spec->priority, sig);
    if (d > 0) {
      ++w.delay_triggers;
      ++m_.delay_trigger_count;
      ++w.consecutive_throttles;
      policy::EscalationState s;
      s.consecutive_throttles = w.consecutive_throttles;
      if (policy::graduated_step(s, sc_.policy.graduated, {}) == Action::Freeze) {
        const Bytes limit = where ? tree_.node(*where).limits.high : 0;
        const Bytes demand = where ? usage(*where) + delta : usage(node) + delta;
        freeze(w, FreezeCause::Throttle, limit, demand);
        return;
      }
      w.request->throttled = true;
      w.paused_until = now_ + static_cast<Millis>(std::ceil(d));
      event(w, "throttle", std::to_string(static_cast<Millis>(std::ceil(d))) + " ms");
      return;
    }
  }

  if (const auto breach = tree_.max_breach(node, delta)) {
    if (delay_mech()) {
      freeze(w, FreezeCause::MaxBreach, tree_.node(*breach).limits.max, usage(*breach) + delta);
      return;
    }
    const cg::ChargeOutcome out = tree_.charge(node, delta);
    if (!tree_.alive(w.session)) {
      kill(w, "memory.max");
    } else {
      close_domain(w, domains::ToolOutcome::OomKilled);
      w.request.reset();
    }
    (void)out;
    return;
  }

  if (global() + delta > sc_.physical_budget) {
    budget_stall(w);
    return;
  }

  tree_.charge(node, delta);
  double latency = static_cast<double>(now_ - w.request->start_ms);
  if (utilization(global()) > sc_.high_watermark) {
    const double extra = sc_.contention_slope_ms_per_mb * to_mib(delta);
    latency += extra;
    w.debt_ms += extra;
    if (w.spec->priority == Priority::High) high_stalled_now_ = true;
  }
  w.latencies.push_back(latency);
  if (!w.request->throttled) w.consecutive_throttles = 0;
  w.request.reset();
  w.stall_since.reset();
  advance(w, next);
}

void Replayer::reactive_tick() {
  const double util = utilization(global());
  const auto& params = sc_.policy.reactive;
  util_history_.push_back({now_, util});
  while (!util_history_.empty() && util_history_.front().ts_ms < now_ - params.window_ms - sc_.tick_ms) {
    util_history_.erase(util_history_.begin());
  }
  if (pending_reactive_) {
    if (now_ < pending_reactive_->execute_at_ms) return;
    pending_reactive_.reset();
    if (!policy::reactive_still_valid(util, params)) return;
    Workload* victim = nullptr;
    for (auto& w : ws_) {
      if (w.status != WorkloadStatus::Running) continue;
      if (!victim) {
        victim = &w;
        continue;
      }
      const bool lower = w.spec->priority == Priority::Low && victim->spec->priority == Priority::High;
      const bool same = w.spec->priority == victim->spec->priority;
      if (lower || (same && usage(w.session) > usage(victim->session))) victim = &w;
    }
    if (victim) kill(*victim, "user-space daemon");
    util_history_.clear();
    return;
  }
  pending_reactive_ = policy::reactive_decide(util_history_, params, now_);
}

bool Replayer::all_done() const {
  return std::all_of(ws_.begin(), ws_.end(), [](const Workload& w) { return w.status != WorkloadStatus::Running; });
}

ReplayMetrics Replayer::collect(bool truncated) {
  m_.scenario = sc_.name;
  m_.policy = sc_.policy;
  m_.physical_budget = sc_.physical_budget;
  m_.acceleration = sc_.acceleration;
  m_.tick_ms = sc_.tick_ms;
  m_.high_watermark = sc_.high_watermark;
  m_.contention_slope_ms_per_mb = sc_.contention_slope_ms_per_mb;
  m_.stall_timeout_ms = sc_.stall_timeout_ms;
  m_.seed = sc_.seed;
  m_.truncated = truncated;
  m_.peak_global_usage = tree_.node(tree_.root()).peak_bytes;

  std::vector<double> high, low;
  std::size_t completed = 0;
  for (const auto& w : ws_) {
    WorkloadMetrics r;
    r.name = w.spec->name;
    r.priority = w.spec->priority;
    r.completed = w.status == WorkloadStatus::Completed;
    r.oom_killed = w.oom_killed;
    r.completion_ms = w.completion;
    r.latency = stats_of(w.latencies);
    r.peak_usage = tree_.node(w.session).peak_bytes;
    r.delay_triggers = w.delay_triggers;
    r.freezes = w.freezes;
    r.feedbacks = w.feedbacks;
    auto& bucket = w.spec->priority == Priority::High ? high : low;
    bucket.insert(bucket.end(), w.latencies.begin(), w.latencies.end());
    completed += r.completed ? 1 : 0;
    m_.workloads.push_back(std::move(r));
  }
  m_.survival_rate = static_cast<double>(completed) / static_cast<double>(ws_.size());
  m_.high = stats_of(high);
  m_.low = stats_of(low);
  return std::move(m_);
}

ReplayMetrics Replayer::run() {
  sc_.validate();
  setup();
  Millis longest = 0;
  for (const auto& w : ws_) longest = std::max(longest, w.spec->trace.total_ms);
  const Millis cap = 100 * std::max<Millis>(longest, sc_.tick_ms);

  for (auto& w : ws_) {
    if (w.spec->trace.total_ms == 0) {
      complete(w);
      w.completion = 0;
    }
  }

  bool truncated = true;
  for (now_ = 0; now_ < cap; now_ += sc_.tick_ms) {
    if (all_done()) {
      truncated = false;
      break;
    }
    high_stalled_now_ = false;
    stall_now_ = false;
    for (auto& w : ws_) step(w);
    high_stalled_prev_ = high_stalled_now_;
    stall_prev_ = stall_now_;
    if (sc_.policy.kind == PolicyKind::ReactiveUserSpace) reactive_tick();
    if (observer_) {
      TickView v;
      v.now_ms = now_;
      v.tree = &tree_;
      v.physical_budget = sc_.physical_budget;
      for (const auto& w : ws_) {
        v.sessions.push_back(w.session);
        v.status.push_back(w.status);
      }
      observer_(v);
    }
  }
  if (!truncated || all_done()) {
    truncated = false;
    m_.end_ms = now_;
  } else {
    m_.end_ms = cap;
    for (auto& w : ws_) {
      if (w.status == WorkloadStatus::Running) close_domain(w, domains::ToolOutcome::Frozen);
    }
  }
  return collect(truncated);
}

}  // namespace

ReplayMetrics replay(const Scenario& scenario, const ReplayOptions& options) {
  Replayer r(scenario, options.observer);
  ReplayMetrics m = r.run();
  if (options.with_solo) {
    for (std::size_t i = 0; i < m.workloads.size(); ++i) {
      WorkloadMetrics& w = m.workloads[i];
      w.solo_ms = solo_baseline(scenario.workloads[i], scenario);
      if (w.completed && w.solo_ms && *w.solo_ms > 0) {
        w.overhead_frac = static_cast<double>(*w.completion_ms) / static_cast<double>(*w.solo_ms) - 1.0;
      }
    }
  }
  return m;
}

std::optional<Millis> solo_baseline(const WorkloadSpec& workload, const Scenario& defaults) {
  Scenario solo;
  solo.name = defaults.name + "/solo";
  solo.physical_budget = kUnlimited;
  solo.acceleration = defaults.acceleration;
  solo.tick_ms = defaults.tick_ms;
  solo.high_watermark = defaults.high_watermark;
  solo.contention_slope_ms_per_mb = defaults.contention_slope_ms_per_mb;
  solo.stall_timeout_ms = defaults.stall_timeout_ms;
  solo.seed = defaults.seed;
  WorkloadSpec w = workload;
  w.memory_high = kUnlimited;
  w.memory_max = kUnlimited;
  w.memory_low = 0;
  w.hints.clear();
  solo.workloads.push_back(std::move(w));
  const ReplayMetrics m = replay(solo, ReplayOptions{false, {}});
  return m.workloads.front().completion_ms;
}

ComparisonReport run_comparison(const Scenario& scenario, const std::vector<PolicyKind>& policies) {
  if (policies.size() < 2) throw ConfigError("run_comparison: at least two policies are required");
  ComparisonReport r;
  r.scenario = scenario.name;
  for (PolicyKind k : policies) {
    Scenario s = scenario;
    s.policy.kind = k;
    r.runs.push_back(replay(s));
  }
  auto reduction = [](double base, double v) -> std::optional<double> {
    if (base <= 0) return std::nullopt;
    return (base - v) / base;
  };
  const ReplayMetrics& base = r.runs.front();
  for (std::size_t i = 1; i < r.runs.size(); ++i) {
    const ReplayMetrics& m = r.runs[i];
    PolicyDelta d;
    d.baseline = base.policy.kind;
    d.policy = m.policy.kind;
    d.high_p95_reduction_frac = reduction(base.high.p95_ms, m.high.p95_ms);
    d.low_p95_reduction_frac = reduction(base.low.p95_ms, m.low.p95_ms);
    d.survival_delta = m.survival_rate - base.survival_rate;
    d.kill_delta = m.kill_count - base.kill_count;
    r.deltas.push_back(d);
  }
  return r;
}

}  // namespace agentcg::engine
