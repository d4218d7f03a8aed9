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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "harvest/coordination.hpp"
#include "harvest/vacuum.hpp"

namespace harvest {

struct ArmTrace {
  ArmProps props;
  Phase phase = Phase::Idle;  // after this tick's decision
  std::vector<std::string> actions;
  int target = -1;  // apple id, -1 when none
  friend bool operator==(const ArmTrace&, const ArmTrace&) = default;
};

/// Something that happened to an apple during the tick.
struct TraceEvent {
  int arm = 0;  // 1 or 2, 0 for platform-level events
  int apple = -1;
  std::string kind;   // harvested, failed, exhausted, skipped, ...
  std::string cause;  // failure cause, empty otherwise
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TraceStats {
  int attempted = 0;
  int succeeded = 0;
  int failed = 0;
  int remaining = 0;
  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

/// One decision tick. Props are sampled before the decision; phases, actions
/// and targets are the decision's outcome.
struct TraceRecord {
  std::int64_t tick = 0;
  double t = 0.0;
  std::string mode = "running";
  std::string strategy = "v2024";
  std::array<ArmTrace, 2> arms;
  PressureState pressure;
  ValveConfig valves;
  std::vector<TraceEvent> events;
  TraceStats stats;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class MalformedTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-line JSON object, no trailing newline.
std::string to_json_line(const TraceRecord& record);

/// Throws MalformedTrace naming the missing or mistyped field.
TraceRecord parse_trace_line(const std::string& line);

/// Reads JSONL, skipping blank lines. Errors name the 1-based line number.
std::vector<TraceRecord> read_trace(std::istream& in);
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

}  // namespace harvest
