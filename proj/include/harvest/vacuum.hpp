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
#include <iosfwd>
#include <span>

namespace harvest {

// Normalized pressure model; 1.0 is the nominal 2500 mmH2O source vacuum.
namespace vacuum {
inline constexpr double kClosedLine = 0.05;      // line isolated from source, bled to atmosphere
inline constexpr double kSealedLine = 0.85;      // open to source, cup sealed on fruit
inline constexpr double kLeakingLine = 0.30;     // open to source, cup leaking (single leak)
inline constexpr double kLeakDrop = 0.30;        // source loss per leaking open line
inline constexpr double kSourceFloor = 0.20;
inline constexpr double kAttachThreshold = 0.6;
inline constexpr double kAttachWindow = 0.1;     // s
inline constexpr double kSuctionForce = 47.0;    // N at full source vacuum
inline constexpr double kSealTolerance = 0.015;  // m of cup misalignment a seal survives
}  // namespace vacuum

/// Four butterfly gates. Arm 1 owns v1 (to source) and v2 (to atmosphere);
/// arm 2 owns v3 and v4. true = open.
struct ValveConfig {
  bool v1 = false, v2 = true, v3 = false, v4 = true;
  double actuation_time = 0.2;  // s per transition, in (0, 1]

  bool source_open(int arm) const { return arm == 0 ? v1 : v3; }
  bool atmosphere_open(int arm) const { return arm == 0 ? v2 : v4; }
  void set(int arm, bool source, bool atmosphere);
  void validate() const;
  friend bool operator==(const ValveConfig&, const ValveConfig&) = default;
};

struct PressureState {
  double p_arm1 = vacuum::kClosedLine;
  double p_arm2 = vacuum::kClosedLine;
  double p_source = 1.0;

  double arm(int i) const { return i == 0 ? p_arm1 : p_arm2; }
  friend bool operator==(const PressureState&, const PressureState&) = default;
};

enum class LeakCause { LeafObstruction, Misalignment };

struct ArmSeal {
  enum class Kind { None, Sealed, Leaking };
  Kind kind = Kind::None;
  int apple_id = -1;
  LeakCause cause = LeakCause::Misalignment;

  static ArmSeal none() { return {}; }
  static ArmSeal sealed(int apple) { return {Kind::Sealed, apple, LeakCause::Misalignment}; }
  static ArmSeal leaking(LeakCause c) { return {Kind::Leaking, -1, c}; }
  bool is_sealed() const { return kind == Kind::Sealed; }
};

struct SealState {
  std::array<ArmSeal, 2> arms;
};

/// Pure lookup. A closed line reads kClosedLine; an open sealed line reads
/// kSealedLine; each open unsealed line costs the source kLeakDrop (floored at
/// kSourceFloor) and reads kLeakingLine scaled by the source's loss beyond a
/// single leak.
PressureState compute_pressures(const ValveConfig& valves, const SealState& seals);

/// True iff the arm's reading stayed at or above the threshold for the
/// trailing window. `history` is oldest first at a fixed sample period.
/// Throws std::invalid_argument when the history is shorter than the window.
bool infer_attachment(std::span<const PressureState> history, int arm, double sample_period);

enum class DetachOutcome { SealedFailure, Detached, StemHold };

const char* to_string(DetachOutcome outcome);

/// Seal forms without leaf obstruction and within the misalignment tolerance;
/// given a seal the fruit comes off iff the suction force scaled by source
/// vacuum reaches the stem retention force.
DetachOutcome attempt_detach(double stem_force, double offset, bool leaf_obstruction, double p_source);

/// Gate timing on a fixed tick. Opening a line closes its atmosphere gate at
/// once and opens the source gate after the actuation latency. Closing shuts
/// the source gate at the next tick and opens the atmosphere gate after the
/// latency, which is when a held fruit drops.
class ValveBank {
 public:
  ValveBank(double actuation_time, double tick);

  void request(int arm, bool open);
  /// Advance one tick.
  void step();
  /// Shut every source gate and vent both lines immediately.
  void vent_all();

  const ValveConfig& config() const { return config_; }
  bool source_requested(int arm) const { return requested_[arm]; }
  int latency_ticks() const { return latency_; }

 private:
  ValveConfig config_;
  int latency_;
  std::array<bool, 2> requested_{false, false};
  std::array<bool, 2> close_due_{false, false};
  std::array<int, 2> source_countdown_{-1, -1};
  std::array<int, 2> vent_countdown_{-1, -1};
};

/// CSV header t,p_arm1,p_arm2,p_source,v1,v2,v3,v4 and one row per sample.
void write_pressure_header(std::ostream& out);
void write_pressure_row(std::ostream& out, double t, const PressureState& p, const ValveConfig& v);

}  // namespace harvest
