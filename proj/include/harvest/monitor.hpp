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

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "harvest/trace.hpp"

namespace harvest {

/// Formula identifiers reported by monitor_check.
namespace formula {
inline constexpr const char* kApproachGuard = "workflow.approach_requires_detected_and_retract";
inline constexpr const char* kOpenAfterApproach = "workflow.open_after_approach";
inline constexpr const char* kRetractAfterOpen = "workflow.retract_after_open";
inline constexpr const char* kReleaseCloses = "workflow.release_closes_valve";
inline constexpr const char* kAttachedNeedsOpen = "attachment.requires_open_valve";
inline constexpr const char* kCloseOnFailure = "coordination.close_on_failure";
inline constexpr const char* kExclusiveOpen = "coordination.exclusive_open";
inline constexpr const char* kSimultaneousOpen = "coordination.simultaneous_open";
inline constexpr const char* kMutualExclusion = "coordination.mutual_exclusion";
inline constexpr const char* kPhaseTransition = "structure.phase_transition";
inline constexpr const char* kTimeMonotone = "structure.time_monotone";
inline constexpr const char* kBoundedLiveness = "liveness.bounded";
}  // namespace formula

struct MonitorOptions {
  /// Seconds within which an assigned apple must be harvested or exhausted.
  double liveness_horizon = 30.0;
  bool check_liveness = true;
};

struct MonitorVerdict {
  bool ok = true;
  std::string formula;
  std::size_t index = 0;  // position of the offending record
  std::int64_t tick = 0;
  int arm = 0;  // 1 or 2, 0 when not arm-specific
  std::string detail;
};

/// Safety formulas are checked at every tick; the first violation in trace
/// order wins. Liveness is checked only for obligations whose horizon ends
/// inside the trace; an obligation is discharged by a retract with fruit
/// attached, an exhausted apple, an idle arm with nothing queued, or leaving
/// running mode. Throws MalformedTrace on an empty trace.
MonitorVerdict monitor_check(const std::vector<TraceRecord>& trace, const MonitorOptions& options = {});

std::string to_string(const MonitorVerdict& verdict);

}  // namespace harvest
