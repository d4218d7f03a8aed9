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
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "harvest/arm_model.hpp"
#include "harvest/coordination.hpp"
#include "harvest/localization.hpp"
#include "harvest/monitor.hpp"
#include "harvest/tracking_control.hpp"
#include "harvest/trace.hpp"
#include "harvest/vacuum.hpp"

namespace harvest {

/// Approach (= retract) move time m, attach time a, release time r.
struct PhaseDurations {
  double m = 2.0;
  double a = 0.3;
  double r = 0.2;
  void validate() const;
};

/// Steady-state seconds per apple with no failures.
double theoretical_cycle_time(Strategy strategy, const PhaseDurations& d);

struct AppleSpec {
  int station = 0;
  CartesianPoint position;  // apple centre, robot frame at the base platform pose
  double radius = 0.04;
  double stem_force = 30.0;  // N
  double occlusion = 0.0;    // [0, 1]
  bool leaf_obstruction = false;
  bool clustered = false;  // a touching neighbour shares the detection
  bool glare = false;      // sunlight glare distorts detection and its box
};

enum class TimingMode { Fixed, Kinematic, Random };
enum class FailureMode { None, Field, Uniform };

const char* to_string(TimingMode mode);
const char* to_string(FailureMode mode);

struct FailureConfig {
  FailureMode mode = FailureMode::Field;
  /// Uniform mode: per-attempt failure probability, split over sealing,
  /// detachment and interference 44:22:14.
  double p = 0.0;
  /// Field mode: per-attempt chance the retract path snags a branch.
  double interference_probability = 0.02;
  /// Field mode: detection miss probability is occlusion^miss_exponent.
  double miss_exponent = 6.0;
};

/// Platform offset from its base pose; x toward the canopy, z up.
struct Platform {
  double dx = 0.0;
  double dz = 0.0;
  static constexpr double kMaxDx = 0.3;
  static constexpr double kMinDz = -0.4;
  static constexpr double kMaxDz = 0.6;

  /// Apple position seen from the arms when the platform is at this pose.
  CartesianPoint to_robot(const CartesianPoint& base) const { return {base.x - dx, base.y, base.z - dz}; }
};

/// Translate the platform by (dx, dz). Throws std::out_of_range when the
/// result leaves the travel limits.
Platform reposition_platform(const Platform& current, double dx, double dz);

struct Scenario {
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::V2024;
  ArmParams arm1 = ArmParams::arm1();
  ArmParams arm2 = ArmParams::arm2();
  std::vector<AppleSpec> apples;
  PhaseDurations durations;
  TimingMode timing = TimingMode::Kinematic;
  double speed_fraction = 0.6;
  FailureConfig failures;
  bool perception = true;  // false: the arm is told the true picking point
  bool tracking = true;    // run the tracking controller along every move
  Platform platform;
  CameraPose camera;
  int max_attempts = 3;
  double tick = 0.05;
  double liveness_horizon = 30.0;
  double attach_timeout = 0.6;  // s
  double corridor_clearance = 0.02;
  std::size_t tracking_log_every = 50;

  void validate() const;
  int station_count() const;
};

/// Nominal arm speed; the field system ran at a fraction of it.
inline constexpr double kMaxArmSpeed = 0.7748;  // m/s
inline constexpr double kMinMoveTime = 0.4;     // s

/// Twenty apples, ten per arm on opposite sides, fixed move time m, no
/// failures, perfect perception.
Scenario ideal_scenario(Strategy strategy, std::uint64_t seed = 1, int apples = 20);

/// Field-like scene: `stations` stops of `per_station` apples in the shared
/// workspace with occlusion, clustering, leaves and stem forces drawn from
/// `seed`.
Scenario calibration_scenario(Strategy strategy, std::uint64_t seed, int stations = 30, int per_station = 12);

inline const std::vector<std::string>& failure_causes() {
  static const std::vector<std::string> causes{"exposure", "occlusion", "cluster", "sealing", "detachment", "interference"};
  return causes;
}

struct EpisodeReport {
  std::string strategy;
  std::uint64_t seed = 0;
  int apples = 0;
  int attempted = 0;  // apples with at least one pick attempt
  int succeeded = 0;
  int first_attempt_successes = 0;
  int pick_attempts = 0;
  int failed = 0;  // apples given up after an attempt
  int never_detected = 0;
  int discarded = 0;  // perceived outside both workspaces
  std::map<std::string, int> failure_counts;  // per failed pick attempt
  std::map<std::string, int> miss_counts;     // per never-detected apple
  std::vector<double> cycle_times;            // approach start to release, per harvested apple
  double mean_cycle_time = 0.0;               // steady release-to-release throughput
  double makespan = 0.0;
  double time_per_apple = 0.0;                // makespan / attempted
  std::array<double, 2> utilization{0.0, 0.0};
  std::int64_t ticks = 0;
  bool monitor_ok = true;

  double success_rate() const { return attempted == 0 ? 0.0 : static_cast<double>(succeeded) / attempted; }
};

std::string report_to_json(const EpisodeReport& report);

struct Summary {
  int episodes = 0;
  int attempted = 0;
  int succeeded = 0;
  int first_attempt_successes = 0;
  double success_rate = 0.0;
  double first_attempt_share = 0.0;
  double mean_cycle_time = 0.0;
  double mean_time_per_apple = 0.0;
  std::map<std::string, int> failure_counts;
  std::map<std::string, double> failure_share;
};

/// Throws std::invalid_argument on an empty list.
Summary summarize(const std::vector<EpisodeReport>& reports);

/// Aborts the episode when the v2024 trace breaks a monitored formula.
class MonitorDefect : public std::logic_error {
 public:
  MonitorDefect(const MonitorVerdict& verdict);
  MonitorVerdict verdict;
};

enum class InjectedFailure { PrematureDetach, SealLeak, StemHold };

std::optional<InjectedFailure> injected_failure_from_string(const std::string& name);

/// Errors raised for operator commands that do not apply in the current state.
class CommandRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampleLog {
  std::vector<double> t;
  std::vector<PressureState> pressure;
  std::vector<ValveConfig> valves;
};

/// Tick-driven episode. Every step advances the plant one tick, samples the
/// propositions, runs policy_step and returns the trace record.
class HarvestEngine {
 public:
  struct Options {
    bool keep_trace = true;
    bool keep_logs = true;
    bool check_monitor = true;  // v2024 only
  };

  explicit HarvestEngine(Scenario scenario);
  HarvestEngine(Scenario scenario, Options options);
  ~HarvestEngine();
  HarvestEngine(HarvestEngine&&) noexcept;
  HarvestEngine& operator=(HarvestEngine&&) noexcept;

  const TraceRecord& step();
  bool finished() const;
  std::int64_t tick() const;
  const std::string& mode() const;

  /// Operator commands, applied before the next step.
  void estop();
  void inject_failure(int arm, InjectedFailure kind);
  void manual_move(int arm, const CartesianPoint& delta);
  void set_strategy(Strategy strategy);
  void reposition(double dx, double dz);

  const Scenario& scenario() const;
  EpisodeReport report() const;
  const std::vector<TraceRecord>& trace() const;
  const SampleLog& samples() const;
  const std::array<TrackingLog, 2>& tracking() const;
  const TraceRecord* last_record() const;
  CartesianPoint end_effector(int arm) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EpisodeResult {
  EpisodeReport report;
  std::vector<TraceRecord> trace;
  SampleLog samples;
  std::array<TrackingLog, 2> tracking;
};

EpisodeResult run_episode(const Scenario& scenario);

/// Runs without keeping trace or logs; same report as run_episode.
EpisodeReport run_episode_report(const Scenario& scenario);

}  // namespace harvest
