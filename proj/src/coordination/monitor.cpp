// Copyright 2026 The Harvest Sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "harvest/monitor.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace harvest {
namespace {

bool has_action(const ArmTrace& a, const char* name) {
  return std::find(a.actions.begin(), a.actions.end(), name) != a.actions.end();
}

MonitorVerdict violation(const char* formula, const std::vector<TraceRecord>& trace, std::size_t index, int arm,
                         std::string detail) {
  MonitorVerdict v;
  v.ok = false;
  v.formula = formula;
  v.index = index;
  v.tick = trace[index].tick;
  v.arm = arm;
  v.detail = std::move(detail);
  return v;
}

bool working(Phase p) {
  return p == Phase::Approaching || p == Phase::AtTarget || p == Phase::Attaching || p == Phase::Retracting;
}

std::optional<MonitorVerdict> check_safety(const std::vector<TraceRecord>& trace) {
  std::array<bool, 2> opened_since_retract{false, false};
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const TraceRecord& cur = trace[k];
    const TraceRecord* prev = k > 0 ? &trace[k - 1] : nullptr;

    if (prev && !(cur.t > prev->t && cur.tick > prev->tick)) {
      return violation(formula::kTimeMonotone, trace, k, 0, "timestamps must strictly increase");
    }

    std::array<bool, 2> rise{false, false};
    for (int i = 0; i < 2; ++i) {
      rise[i] = prev && !prev->arms[i].props.open_valve && cur.arms[i].props.open_valve;
    }

    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const int arm = i + 1;
      const ArmTrace& a = cur.arms[i];
      const ArmProps& p = a.props;

      if (p.attached && !p.open_valve) {
        return violation(formula::kAttachedNeedsOpen, trace, k, arm, "attached while the source valve is closed");
      }
      if (has_action(a, "start_approach") && !(p.detected && p.retract)) {
        return violation(formula::kApproachGuard, trace, k, arm, "approach started without a detected apple at drop-off");
      }
      if (rise[i]) opened_since_retract[i] = true;
      if (has_action(a, "start_approach") && opened_since_retract[i]) {
        return violation(formula::kRetractAfterOpen, trace, k, arm, "approach started before retracting from an open valve");
      }
      if (has_action(a, "start_retract")) opened_since_retract[i] = false;
      if (cur.mode != "running") opened_since_retract[i] = false;

      if (!prev) continue;
      const ArmProps& pp = prev->arms[i].props;
      if (rise[i] && !pp.approach) {
        return violation(formula::kOpenAfterApproach, trace, k, arm, "valve opened before the approach completed");
      }
      if (pp.retract && pp.attached && p.open_valve) {
        return violation(formula::kReleaseCloses, trace, k, arm, "valve still open after reaching drop-off with fruit");
      }
      if (pp.open_valve && !pp.attached && !pp.attaching && p.open_valve) {
        return violation(formula::kCloseOnFailure, trace, k, arm, "valve left open after attachment was lost");
      }
      if (pp.open_valve && !pp.attached && rise[j]) {
        return violation(formula::kExclusiveOpen, trace, k, j + 1, "valve opened while the other line was open and unsealed");
      }
    }

    if (rise[0] && rise[1]) {
      return violation(formula::kSimultaneousOpen, trace, k, 0, "both valves opened on the same tick");
    }
    if ((cur.arms[0].props.attaching && cur.arms[1].props.attaching) ||
        (cur.arms[0].phase == Phase::Attaching && cur.arms[1].phase == Phase::Attaching)) {
      return violation(formula::kMutualExclusion, trace, k, 0, "both arms attaching");
    }
    if (prev && prev->mode == cur.mode) {
      for (int i = 0; i < 2; ++i) {
        if (!legal_transition(prev->arms[i].phase, cur.arms[i].phase)) {
          return violation(formula::kPhaseTransition, trace, k, i + 1,
                           std::string(to_string(prev->arms[i].phase)) + " -> " + to_string(cur.arms[i].phase));
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<MonitorVerdict> check_liveness(const std::vector<TraceRecord>& trace, double horizon) {
  const double end = trace.back().t;
  std::optional<MonitorVerdict> earliest;
  for (int i = 0; i < 2; ++i) {
    const int arm = i + 1;
    auto discharges = [&](std::size_t k) {
      const TraceRecord& r = trace[k];
      if (r.mode != "running") return true;
      if (r.arms[i].props.retract && r.arms[i].props.attached) return true;
      // Nothing left to do for this arm.
      if (r.arms[i].phase == Phase::Idle && !r.arms[i].props.detected) return true;
      return std::any_of(r.events.begin(), r.events.end(),
                         [&](const TraceEvent& e) { return e.arm == arm && e.kind == "exhausted"; });
    };
    std::size_t next = 0;  // first discharge index >= k, trace.size() if none
    auto advance = [&](std::size_t k) {
      if (next < k) next = k;
      while (next < trace.size() && !discharges(next)) ++next;
    };
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const TraceRecord& r = trace[k];
      if (r.mode != "running") continue;
      const ArmTrace& a = r.arms[i];
      const bool obliged = (working(a.phase) && a.target >= 0) || (a.phase == Phase::Idle && a.props.detected);
      if (!obliged) continue;
      const double deadline = r.t + horizon;
      if (deadline > end) break;
      advance(k);
      if (next < trace.size() && trace[next].t <= deadline) continue;
      std::size_t at = k;
      while (at < trace.size() && trace[at].t <= deadline) ++at;
      if (at >= trace.size()) at = trace.size() - 1;
      if (!earliest || at < earliest->index) {
        std::ostringstream os;
        os << "obligation from t=" << r.t << " not discharged within " << horizon << " s";
        earliest = violation(formula::kBoundedLiveness, trace, at, arm, os.str());
      }
      break;
    }
  }
  return earliest;
}

}  // namespace

MonitorVerdict monitor_check(const std::vector<TraceRecord>& trace, const MonitorOptions& options) {
  if (trace.empty()) throw MalformedTrace("empty trace");
  if (!(options.liveness_horizon > 0.0)) throw std::invalid_argument("liveness horizon must be positive");
  std::optional<MonitorVerdict> safety = check_safety(trace);
  std::optional<MonitorVerdict> live;
  if (options.check_liveness) live = check_liveness(trace, options.liveness_horizon);
  if (safety && (!live || safety->index <= live->index)) return *safety;
  if (live) return *live;
  return {};
}

std::string to_string(const MonitorVerdict& v) {
  if (v.ok) return "ok";
  std::ostringstream os;
  os << "violation " << v.formula << " at tick " << v.tick;
  if (v.arm != 0) os << " arm " << v.arm;
  if (!v.detail.empty()) os << ": " << v.detail;
  return os.str();
}

}  // namespace harvest
