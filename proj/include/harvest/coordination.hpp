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
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "harvest/arm_model.hpp"

namespace harvest {

// ---------------------------------------------------------------------------
// Apple assignment

struct Assignment {
  std::vector<std::size_t> arm1;  // indices into the input, harvest order
  std::vector<std::size_t> arm2;
  std::vector<std::size_t> discarded;
};

/// Reachability partition, lateral split of the shared set balanced so the
/// two lists differ by at most one where the shared set allows it (arm 1
/// takes the extra apple), each list ordered shallowest canopy depth (robot
/// x) first. Positions are in the robot frame.
Assignment assign_apples(const std::vector<CartesianPoint>& apples, const ArmParams& arm1, const ArmParams& arm2,
                         const CartesianPoint& ee1, const CartesianPoint& ee2);

// ---------------------------------------------------------------------------
// Policy

enum class Phase { Idle, Approaching, AtTarget, Attaching, Retracting, AtDropoff, Releasing };

const char* to_string(Phase phase);
std::optional<Phase> phase_from_string(const std::string& name);

/// Whether `to` may follow `from` across one decision tick (chained
/// transitions included).
bool legal_transition(Phase from, Phase to);

enum class Strategy { Baseline, V2023, V2024, SingleArm };

const char* to_string(Strategy strategy);
std::optional<Strategy> strategy_from_string(const std::string& name);

/// Propositions sampled once per tick for one arm.
struct ArmProps {
  bool detected = false;    // a detected apple is queued for this arm
  bool attached = false;    // inferred from line pressure
  bool approach = false;    // end-effector at its target
  bool retract = false;     // end-effector at the drop-off pose
  bool open_valve = false;  // source gate physically open
  bool attaching = false;   // arm is in its attach phase
  friend bool operator==(const ArmProps&, const ArmProps&) = default;
};

struct ArmInputs {
  ArmProps props;
  std::optional<int> next_apple;
  /// Starting a move toward next_apple keeps the arms' corridors apart.
  bool motion_clear = true;
  /// Atmosphere gate open after a release was commanded.
  bool release_done = false;
};

struct ArmState {
  Phase phase = Phase::Idle;
  bool valve_intent = false;
  int target = -1;
  bool skip_release = false;
  int attach_ticks = 0;
  friend bool operator==(const ArmState&, const ArmState&) = default;
};

struct CoordState {
  std::array<ArmState, 2> arms;
  int turn = 0;  // whose cycle comes next under sequential strategies
  friend bool operator==(const CoordState&, const CoordState&) = default;
};

struct PolicyConfig {
  Strategy strategy = Strategy::V2024;
  /// Ticks an arm waits for inferred attachment before giving up.
  int attach_timeout_ticks = 12;
  /// Attach duration for strategies that do not read the pressure sensors.
  int fixed_attach_ticks = 6;
};

struct ArmActions {
  bool start_approach = false;
  bool open_valve = false;
  bool close_valve = false;
  bool start_retract = false;
  int target = -1;

  std::vector<std::string> names() const;
  bool any() const { return start_approach || open_valve || close_valve || start_retract; }
};

struct PolicyResult {
  CoordState next;
  std::array<ArmActions, 2> actions;
};

/// Raised for states the policy can never produce; the simulator treats it as
/// a defect.
class PolicyViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One decision tick. Arm 1 decides first and arm 2 sees its updated phase.
PolicyResult policy_step(const CoordState& state, const std::array<ArmInputs, 2>& inputs, const PolicyConfig& config);

}  // namespace harvest
