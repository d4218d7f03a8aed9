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

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <variant>

#include "harvest/harvest_sim.hpp"
#include "harvest/trajectory.hpp"

namespace harvest {

MonitorDefect::MonitorDefect(const MonitorVerdict& v) : std::logic_error(to_string(v)), verdict(v) {}

std::optional<InjectedFailure> injected_failure_from_string(const std::string& name) {
  if (name == "premature-detach") return InjectedFailure::PrematureDetach;
  if (name == "seal-leak") return InjectedFailure::SealLeak;
  if (name == "stem-hold") return InjectedFailure::StemHold;
  return std::nullopt;
}

namespace {

// Random stream channels.
enum Channel : std::uint32_t {
  kPerceive = 1,
  kMiss = 2,
  kFailure = 3,
  kMoveOut = 4,
  kMoveBack = 5,
  kSnag = 6,
  kGlare = 7,
};

std::mt19937_64 stream(std::uint64_t seed, int apple, int attempt, Channel channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(apple + 1), static_cast<std::uint32_t>(attempt),
                    static_cast<std::uint32_t>(channel)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Detection box centre error, metres at the apple's depth.
constexpr double kBoxJitter = 0.002;
constexpr double kOcclusionJitter = 0.015;
constexpr double kGlareBias = 0.016;
constexpr double kGlareMiss = 0.3;
// A misaligned cup on an apple this occluded is blamed on the occlusion.
constexpr double kOccludedCause = 0.2;

enum class AppleStatus { Waiting, Queued, Active, Harvested, Failed, Missed, Discarded };

struct AppleState {
  AppleStatus status = AppleStatus::Waiting;
  int arm = -1;
  int attempts = 0;
  CartesianPoint estimate;  // robot frame picking point
  CartesianPoint truth;     // robot frame picking point
  std::string miss_cause;
};

enum class Motion { None, Out, Back };

struct ArmWorld {
  ArmParams params;
  JointConfig q;
  CartesianPoint ee;
  CartesianPoint home;
  Motion motion = Motion::None;
  int ticks_left = 0;
  int ticks_moved = 0;
  CartesianPoint dest;
  bool at_target = false;

  int apple = -1;
  double attempt_start = 0.0;
  CartesianPoint target;
  bool seal_ok = true;
  LeakCause leak_cause = LeakCause::Misalignment;
  std::string seal_fail_cause;
  bool planned_stem_hold = false;
  int snag_tick = -1;  // ticks into the retract
  bool seal_evaluated = false;
  bool attempt_failed = false;
  ArmSeal seal;
  bool holding = false;
  bool stem_hold_pending = false;

  bool inject_leak = false;
  bool inject_stem_hold = false;

  bool at_home() const { return motion == Motion::None && ee == home; }
};

struct Box {
  double y0, y1, z0, z1;
};

Box corridor(const CartesianPoint& a, const CartesianPoint& b, double clearance) {
  return {std::min(a.y, b.y) - clearance, std::max(a.y, b.y) + clearance, std::min(a.z, b.z) - clearance,
          std::max(a.z, b.z) + clearance};
}

bool overlaps(const Box& a, const Box& b) { return a.y0 <= b.y1 && b.y0 <= a.y1 && a.z0 <= b.z1 && b.z0 <= a.z1; }

}  // namespace

struct HarvestEngine::Impl {
  Scenario sc;
  Options opt;
  PolicyConfig pcfg;
  CoordState coord;
  ValveBank bank;
  std::vector<PressureState> history;
  std::size_t window = 3;
  Platform platform;

  std::int64_t tick = 0;
  std::string mode = "running";
  bool done = false;
  int station = -1;
  int stations = 0;

  std::vector<AppleState> apples;
  std::array<std::deque<int>, 2> queues;
  std::array<ArmWorld, 2> arms;
  std::vector<TraceEvent> events;

  std::vector<TraceRecord> trace;
  TraceRecord last;
  bool have_last = false;
  SampleLog samples;
  std::array<TrackingLog, 2> tracking;

  // Tallies.
  int attempted = 0, succeeded = 0, first_attempt = 0, picks = 0, failed = 0, missed = 0, discarded = 0;
  std::map<std::string, int> failure_counts;
  std::map<std::string, int> miss_counts;
  std::vector<double> cycle_times;
  std::array<std::vector<double>, 2> releases;
  std::array<std::int64_t, 2> busy{0, 0};
  std::array<std::int64_t, 2> waited{0, 0};  // ticks idle with work queued

  Impl(Scenario s, Options o) : sc(std::move(s)), opt(o), bank(sc.durations.r, sc.tick) {
    sc.validate();
    platform = sc.platform;
    pcfg.strategy = sc.strategy;
    pcfg.attach_timeout_ticks = std::max(1, static_cast<int>(std::lround(sc.attach_timeout / sc.tick)));
    pcfg.fixed_attach_ticks = std::max(1, static_cast<int>(std::lround(sc.durations.a / sc.tick)));
    window = static_cast<std::size_t>(std::llround(vacuum::kAttachWindow / sc.tick)) + 1;
    history.assign(window, compute_pressures(bank.config(), {}));
    stations = sc.station_count();
    apples.resize(sc.apples.size());
    arms[0].params = sc.arm1;
    arms[1].params = sc.arm2;
    for (ArmWorld& a : arms) {
      a.home = forward_kinematics(a.params, a.q);
      a.ee = a.home;
    }
    for (const std::string& c : failure_causes()) failure_counts[c] = 0;
    miss_counts["exposure"] = 0;
    miss_counts["occlusion"] = 0;
    miss_counts["cluster"] = 0;
  }

  double now() const { return static_cast<double>(tick) * sc.tick; }

  // -------------------------------------------------------------------------
  // Perception

  CartesianPoint picking_point(const CartesianPoint& center_robot, double radius) const {
    const CartesianPoint c = sc.camera.to_camera(center_robot);
    return sc.camera.to_robot((1.0 - radius / (2.0 * c.norm())) * c);
  }

  /// Harvested fruit in front of an apple (shallower, laterally overlapping)
  /// no longer hides it.
  double effective_occlusion(int id) const {
    const AppleSpec& spec = sc.apples[static_cast<std::size_t>(id)];
    for (std::size_t k = 0; k < apples.size(); ++k) {
      const AppleSpec& o = sc.apples[k];
      if (apples[k].status != AppleStatus::Harvested || o.station != spec.station) continue;
      const double lateral = std::hypot(o.position.y - spec.position.y, o.position.z - spec.position.z);
      if (o.position.x < spec.position.x && lateral < spec.radius + o.radius) return 0.5 * spec.occlusion;
    }
    return spec.occlusion;
  }

  /// Fills estimate/truth or returns the miss cause.
  std::optional<std::string> perceive(int id, int attempt) {
    const AppleSpec& spec = sc.apples[static_cast<std::size_t>(id)];
    AppleState& st = apples[static_cast<std::size_t>(id)];
    const CartesianPoint center = platform.to_robot(spec.position);
    st.truth = picking_point(center, spec.radius);
    const double occlusion = effective_occlusion(id);
    if (sc.failures.mode == FailureMode::Field) {
      auto rng = stream(sc.seed, id, attempt, kMiss);
      if (uniform01(rng) < std::pow(occlusion, sc.failures.miss_exponent)) return "occlusion";
      if (spec.glare && uniform01(rng) < kGlareMiss) return "exposure";
    }
    if (!sc.perception) {
      st.estimate = st.truth;
      return std::nullopt;
    }
    ObservationSpec os;
    os.center = sc.camera.to_camera(center);
    os.radius = spec.radius;
    os.occlusion = occlusion;
    os.leaf_split = spec.leaf_obstruction;
    os.bbox_jitter = kBoxJitter + kOcclusionJitter * occlusion;
    if (spec.clustered) {
      os.neighbour_center = sc.camera.to_camera(center + CartesianPoint{0.0, 1.9 * spec.radius, -0.4 * spec.radius});
    }
    auto seed_rng = stream(sc.seed, id, attempt, kPerceive);
    const SegmentedObservation obs = synthesize_observation(os, seed_rng());
    if (obs.points.empty()) return "occlusion";
    const EstimateResult est = estimate_position(obs, DbscanParams{});
    if (std::holds_alternative<NoCluster>(est)) return spec.clustered ? "cluster" : "occlusion";
    st.estimate = sc.camera.to_robot(std::get<AppleEstimate>(est).position);
    if (spec.glare) {
      // Glare distorts the colour of one side, so every look is off the same way.
      auto bias = stream(sc.seed, id, 0, kGlare);
      std::normal_distribution<double> g(0.0, kGlareBias);
      const double dy = g(bias), dz = g(bias);
      st.estimate.y += dy;
      st.estimate.z += dz;
    }
    return std::nullopt;
  }

  bool reachable_by(int arm, const CartesianPoint& p) const { return in_workspace(arms[arm].params, p); }

  void emit(int arm, int apple, const std::string& kind, const std::string& cause = {}) {
    events.push_back({arm, apple, kind, cause});
  }

  /// Perceive and assign every not-yet-final apple of the current station.
  void perceive_station() {
    std::vector<int> ids;
    std::vector<CartesianPoint> positions;
    for (std::size_t k = 0; k < apples.size(); ++k) {
      AppleState& st = apples[k];
      if (sc.apples[k].station != station) continue;
      if (st.status != AppleStatus::Waiting && st.status != AppleStatus::Missed &&
          st.status != AppleStatus::Discarded && st.status != AppleStatus::Queued) {
        continue;
      }
      const int id = static_cast<int>(k);
      if (auto cause = perceive(id, 0)) {
        st.status = AppleStatus::Missed;
        st.miss_cause = *cause;
        continue;
      }
      ids.push_back(id);
      positions.push_back(st.estimate);
    }
    queues[0].clear();
    queues[1].clear();

    Assignment asg;
    if (sc.strategy == Strategy::SingleArm) {
      for (std::size_t k = 0; k < positions.size(); ++k) {
        (reachable_by(0, positions[k]) ? asg.arm1 : asg.discarded).push_back(k);
      }
      std::stable_sort(asg.arm1.begin(), asg.arm1.end(),
                       [&](std::size_t a, std::size_t b) { return positions[a].x < positions[b].x; });
    } else {
      asg = assign_apples(positions, arms[0].params, arms[1].params, arms[0].ee, arms[1].ee);
    }
    for (int arm = 0; arm < 2; ++arm) {
      for (std::size_t k : arm == 0 ? asg.arm1 : asg.arm2) {
        const int id = ids[k];
        apples[static_cast<std::size_t>(id)].status = AppleStatus::Queued;
        apples[static_cast<std::size_t>(id)].arm = arm;
        queues[arm].push_back(id);
      }
    }
    for (std::size_t k : asg.discarded) apples[static_cast<std::size_t>(ids[k])].status = AppleStatus::Discarded;
  }

  /// Misses and discards at a station become final when the platform leaves.
  void close_station() {
    for (std::size_t k = 0; k < apples.size(); ++k) {
      if (sc.apples[k].station != station) continue;
      AppleState& st = apples[k];
      if (st.status == AppleStatus::Missed) {
        ++missed;
        ++miss_counts[st.miss_cause];
        emit(0, static_cast<int>(k), "missed", st.miss_cause);
      } else if (st.status == AppleStatus::Discarded) {
        ++discarded;
        emit(0, static_cast<int>(k), "discarded");
      }
    }
  }

  bool station_busy() const {
    if (!queues[0].empty() || !queues[1].empty()) return true;
    for (int i = 0; i < 2; ++i) {
      const ArmWorld& a = arms[i];
      if (a.holding || !a.at_home() || coord.arms[i].phase != Phase::Idle) return true;
      if (bank.config().source_open(i) || bank.source_requested(i)) return true;
    }
    return false;
  }

  /// Returns false when there is nothing left to harvest.
  bool advance_station_if_idle() {
    if (station >= 0 && station_busy()) return true;
    while (true) {
      if (station >= 0) close_station();
      ++station;
      if (station >= stations) return false;
      emit(0, -1, "station");
      perceive_station();
      if (!queues[0].empty() || !queues[1].empty()) return true;
    }
  }

  // -------------------------------------------------------------------------
  // Motion

  int move_ticks(const CartesianPoint& from, const CartesianPoint& to, int apple, int attempt, Channel ch) const {
    double T = 0.0;
    switch (sc.timing) {
      case TimingMode::Fixed:
        T = sc.durations.m;
        break;
      case TimingMode::Kinematic:
        T = move_duration(from, to, sc.speed_fraction * kMaxArmSpeed, kMinMoveTime);
        break;
      case TimingMode::Random: {
        auto rng = stream(sc.seed, apple, attempt, ch);
        return std::uniform_int_distribution<int>(1, 60)(rng);
      }
    }
    return std::max(1, static_cast<int>(std::ceil(T / sc.tick - 1e-9)));
  }

  /// Plans and tracks a move; returns the terminal tracking error.
  double start_move(int i, const CartesianPoint& to, Motion kind, int ticks) {
    ArmWorld& a = arms[i];
    const CartesianPoint from = a.ee;
    a.motion = kind;
    a.ticks_left = ticks;
    a.ticks_moved = 0;
    a.dest = to;
    a.at_target = false;
    double err = 0.0;
    if (sc.tracking && sc.timing != TimingMode::Random) {
      const double T = ticks * sc.tick;
      const Trajectory traj = plan_point_to_point(from, to, 1e9, T);
      TrackingOptions topt;
      topt.log_every = opt.keep_logs ? sc.tracking_log_every : 0;
      TrackingLog log = simulate_tracking(a.params, Gains{}, traj, a.q, topt);
      err = log.final_error.norm();
      if (opt.keep_logs) {
        TrackingLog& acc = tracking[i];
        for (TrackingLogEntry e : log.entries) {
          e.t += now();
          acc.entries.push_back(e);
        }
        acc.steps += log.steps;
        acc.clamped_steps += log.clamped_steps;
        acc.max_error = std::max(acc.max_error, log.max_error);
        acc.final_q = log.final_q;
        acc.final_error = log.final_error;
        acc.infeasible = acc.infeasible || log.infeasible;
      }
    }
    return err;
  }

  void advance_motion(int i) {
    ArmWorld& a = arms[i];
    if (a.motion == Motion::None) return;
    ++a.ticks_moved;
    if (a.motion == Motion::Back) {
      if (a.stem_hold_pending) {
        a.stem_hold_pending = false;
        a.seal = ArmSeal::none();
      }
      if (a.holding && a.snag_tick >= 0 && a.ticks_moved == a.snag_tick) drop_fruit(i, "interference");
    }
    if (--a.ticks_left > 0) return;
    a.ee = a.dest;
    if (const IkResult ik = inverse_kinematics(a.params, a.ee); std::holds_alternative<JointConfig>(ik)) {
      a.q = std::get<JointConfig>(ik);
    }
    const Motion finished = a.motion;
    a.motion = Motion::None;
    if (finished == Motion::Out) {
      a.at_target = true;
    } else if (!a.holding && !a.seal.is_sealed()) {
      a.apple = -1;
    }
  }

  // -------------------------------------------------------------------------
  // Attempts

  void plan_attempt(int i, int id) {
    ArmWorld& a = arms[i];
    const AppleState& st = apples[static_cast<std::size_t>(id)];
    a.seal_ok = true;
    a.seal_fail_cause.clear();
    a.planned_stem_hold = false;
    a.snag_tick = -1;
    a.seal_evaluated = false;
    a.attempt_failed = false;
    auto rng = stream(sc.seed, id, st.attempts, kFailure);
    auto snag_rng = stream(sc.seed, id, st.attempts, kSnag);
    const int back_ticks = move_ticks(st.estimate, a.home, id, st.attempts, kMoveBack);
    auto snag_at = [&] { return std::uniform_int_distribution<int>(1, std::max(1, back_ticks))(snag_rng); };

    if (sc.failures.mode == FailureMode::Uniform) {
      if (uniform01(rng) < sc.failures.p) {
        const double u = uniform01(rng) * 80.0;
        if (u < 44.0) {
          a.seal_ok = false;
          a.seal_fail_cause = "sealing";
          a.leak_cause = LeakCause::Misalignment;
        } else if (u < 66.0) {
          a.planned_stem_hold = true;
        } else {
          a.snag_tick = snag_at();
        }
      }
    } else if (sc.failures.mode == FailureMode::Field) {
      if (uniform01(rng) < sc.failures.interference_probability) a.snag_tick = snag_at();
    }
    if (a.inject_leak) {
      a.inject_leak = false;
      a.seal_ok = false;
      a.seal_fail_cause = "sealing";
      a.leak_cause = LeakCause::Misalignment;
    }
    if (a.inject_stem_hold) {
      a.inject_stem_hold = false;
      a.planned_stem_hold = true;
    }
  }

  void start_approach(int i, int id) {
    ArmWorld& a = arms[i];
    if (queues[i].empty() || queues[i].front() != id) throw std::logic_error("approach target is not the queue head");
    queues[i].pop_front();
    AppleState& st = apples[static_cast<std::size_t>(id)];
    st.status = AppleStatus::Active;
    if (st.attempts == 0) ++attempted;
    ++picks;
    a.apple = id;
    a.attempt_start = now();
    a.target = st.estimate;
    plan_attempt(i, id);
    ++st.attempts;
    const int ticks = move_ticks(a.ee, a.target, id, st.attempts, kMoveOut);
    const double tracking_error = start_move(i, a.target, Motion::Out, ticks);

    if (sc.failures.mode == FailureMode::Field && a.seal_ok) {
      const AppleSpec& spec = sc.apples[static_cast<std::size_t>(id)];
      const CartesianPoint d = st.estimate - st.truth;
      // The compliant cup forgives depth error twice as much as lateral error.
      const double offset = std::hypot(d.y, d.z, 0.5 * d.x) + tracking_error;
      if (attempt_detach(0.0, offset, spec.leaf_obstruction, 1.0) == DetachOutcome::SealedFailure) {
        a.seal_ok = false;
        if (spec.leaf_obstruction) {
          a.seal_fail_cause = "sealing";
          a.leak_cause = LeakCause::LeafObstruction;
        } else {
          a.seal_fail_cause = spec.clustered                         ? "cluster"
                              : spec.glare                           ? "exposure"
                              : effective_occlusion(id) >= kOccludedCause ? "occlusion"
                                                                     : "sealing";
          a.leak_cause = LeakCause::Misalignment;
        }
      }
    }
  }

  void fail_attempt(int i, const std::string& cause, bool apple_lost) {
    ArmWorld& a = arms[i];
    if (a.attempt_failed || a.apple < 0) return;
    a.attempt_failed = true;
    const int id = a.apple;
    ++failure_counts[cause];
    emit(i + 1, id, "failed", cause);
    AppleState& st = apples[static_cast<std::size_t>(id)];
    if (!apple_lost && st.attempts < sc.max_attempts && !perceive(id, st.attempts)) {
      if (reachable_by(i, st.estimate)) {
        st.status = AppleStatus::Queued;
        queues[i].push_front(id);
        return;
      }
    }
    st.status = AppleStatus::Failed;
    ++failed;
    emit(i + 1, id, "exhausted", cause);
  }

  void drop_fruit(int i, const std::string& cause) {
    ArmWorld& a = arms[i];
    a.holding = false;
    a.seal = ArmSeal::none();
    fail_attempt(i, cause, true);
    if (a.motion == Motion::None && !a.at_target) a.apple = -1;
  }

  void start_retract(int i, double p_source) {
    ArmWorld& a = arms[i];
    const int id = a.apple;
    if (a.seal.is_sealed()) {
      const AppleSpec& spec = sc.apples[static_cast<std::size_t>(id)];
      double stem = spec.stem_force;
      if (sc.failures.mode != FailureMode::Field) stem = 0.0;
      if (a.planned_stem_hold) stem = std::numeric_limits<double>::infinity();
      if (attempt_detach(stem, 0.0, false, p_source) == DetachOutcome::Detached) {
        a.holding = true;
      } else {
        a.stem_hold_pending = true;
        fail_attempt(i, "detachment", false);
      }
    } else if (id >= 0) {
      fail_attempt(i, a.seal_fail_cause.empty() ? "sealing" : a.seal_fail_cause, false);
    }
    const int ticks = move_ticks(a.ee, a.home, id, apples[static_cast<std::size_t>(std::max(id, 0))].attempts, kMoveBack);
    start_move(i, a.home, Motion::Back, ticks);
  }

  void update_seals() {
    for (int i = 0; i < 2; ++i) {
      ArmWorld& a = arms[i];
      const bool source = bank.config().source_open(i);
      if (source && a.at_target && a.apple >= 0 && !a.seal_evaluated) {
        a.seal_evaluated = true;
        a.seal = a.seal_ok ? ArmSeal::sealed(a.apple) : ArmSeal::leaking(a.leak_cause);
      }
      if (!source && a.seal.kind == ArmSeal::Kind::Leaking) a.seal = ArmSeal::none();
      if (!source && a.seal.is_sealed() && !a.holding) a.seal = ArmSeal::none();
      if (a.holding && !source && bank.config().atmosphere_open(i)) {
        a.holding = false;
        a.seal = ArmSeal::none();
        const int id = a.apple;
        AppleState& st = apples[static_cast<std::size_t>(id)];
        st.status = AppleStatus::Harvested;
        ++succeeded;
        if (st.attempts == 1) ++first_attempt;
        cycle_times.push_back(now() - a.attempt_start);
        releases[i].push_back(now());
        emit(i + 1, id, "harvested");
        if (a.motion == Motion::None) a.apple = -1;
      }
    }
  }

  SealState seals() const { return {{arms[0].seal, arms[1].seal}}; }

  // -------------------------------------------------------------------------
  // Tick

  const TraceRecord& step() {
    if (done) throw std::logic_error("episode already finished");
    if (tick > 5'000'000) throw std::logic_error("episode did not terminate");

    if (tick > 0) {
      bank.step();
      for (int i = 0; i < 2; ++i) advance_motion(i);
      update_seals();
    }
    bool work_left = true;
    if (mode == "running") work_left = advance_station_if_idle();

    const PressureState pressure = compute_pressures(bank.config(), seals());
    history.push_back(pressure);
    if (history.size() > 4 * window) history.erase(history.begin(), history.end() - static_cast<std::ptrdiff_t>(window));

    std::array<ArmInputs, 2> in{};
    for (int i = 0; i < 2; ++i) {
      const ArmWorld& a = arms[i];
      ArmProps& p = in[i].props;
      p.detected = mode == "running" && !queues[i].empty();
      p.attached = infer_attachment(history, i, sc.tick);
      p.approach = a.at_target && a.motion == Motion::None;
      p.retract = a.at_home();
      p.open_valve = bank.config().source_open(i);
      p.attaching = coord.arms[i].phase == Phase::Attaching;
      if (p.detected) {
        const int id = queues[i].front();
        in[i].next_apple = id;
        in[i].motion_clear = corridor_clear(i, apples[static_cast<std::size_t>(id)].estimate);
      }
      in[i].release_done = bank.config().atmosphere_open(i) && !bank.config().source_open(i) && !a.holding;
    }

    TraceRecord rec;
    rec.tick = tick;
    rec.t = static_cast<double>(tick) * sc.tick;
    rec.mode = mode;
    rec.strategy = to_string(pcfg.strategy);
    rec.pressure = pressure;
    rec.valves = bank.config();

    if (mode == "running") {
      const PolicyResult r = policy_step(coord, in, pcfg);
      coord = r.next;
      for (int i = 0; i < 2; ++i) {
        const ArmActions& act = r.actions[i];
        if (act.start_approach) start_approach(i, act.target);
        if (act.open_valve) bank.request(i, true);
        if (act.close_valve) bank.request(i, false);
        if (act.start_retract) start_retract(i, pressure.p_source);
        rec.arms[i].actions = act.names();
      }
    }
    for (int i = 0; i < 2; ++i) {
      rec.arms[i].props = in[i].props;
      rec.arms[i].phase = coord.arms[i].phase;
      rec.arms[i].target = coord.arms[i].target;
      if (coord.arms[i].phase != Phase::Idle) ++busy[i];
      waited[i] = coord.arms[i].phase == Phase::Idle && in[i].props.detected ? waited[i] + 1 : 0;
    }
    rec.events = std::move(events);
    events.clear();
    rec.stats = stats();

    if (mode == "running" && !work_left && !station_busy()) done = true;
    if (opt.keep_logs) {
      samples.t.push_back(rec.t);
      samples.pressure.push_back(pressure);
      samples.valves.push_back(rec.valves);
    }
    if (opt.keep_trace || (opt.check_monitor && sc.strategy == Strategy::V2024)) trace.push_back(rec);
    last = std::move(rec);
    have_last = true;
    ++tick;

    if (done && opt.check_monitor && sc.strategy == Strategy::V2024 && pcfg.strategy == Strategy::V2024) {
      MonitorOptions mo;
      mo.liveness_horizon = sc.liveness_horizon;
      const MonitorVerdict v = monitor_check(trace, mo);
      if (!v.ok) throw MonitorDefect(v);
    }
    return last;
  }

  bool corridor_clear(int i, const CartesianPoint& target) const {
    const int j = 1 - i;
    const ArmWorld& other = arms[j];
    CartesianPoint far = other.apple >= 0 ? other.target : other.ee;
    if (other.at_home() && coord.arms[j].phase == Phase::Idle) {
      // Under parallel strategies both idle arms may start this tick; the one
      // that has waited longer (arm 1 on a tie) keeps its corridor.
      const bool parallel = pcfg.strategy == Strategy::V2023 || pcfg.strategy == Strategy::V2024;
      const bool yields = waited[j] > waited[i] || (waited[j] == waited[i] && j == 0);
      if (!parallel || queues[j].empty() || !yields) return true;
      far = apples[static_cast<std::size_t>(queues[j].front())].estimate;
    }
    const Box mine = corridor(arms[i].home, target, sc.corridor_clearance);
    const Box theirs = corridor(other.home, far, 0.0);
    const Box here = corridor(other.ee, other.ee, 0.0);
    return !overlaps(mine, theirs) && !overlaps(mine, here);
  }

  TraceStats stats() const {
    TraceStats s;
    s.attempted = attempted;
    s.succeeded = succeeded;
    s.failed = failed;
    int remaining = 0;
    for (const AppleState& a : apples) {
      if (a.status == AppleStatus::Waiting || a.status == AppleStatus::Queued || a.status == AppleStatus::Active) ++remaining;
    }
    s.remaining = remaining;
    return s;
  }

  EpisodeReport report() const {
    EpisodeReport r;
    r.strategy = to_string(sc.strategy);
    r.seed = sc.seed;
    r.apples = static_cast<int>(apples.size());
    r.attempted = attempted;
    r.succeeded = succeeded;
    r.first_attempt_successes = first_attempt;
    r.pick_attempts = picks;
    r.failed = failed;
    r.never_detected = missed;
    r.discarded = discarded;
    r.failure_counts = failure_counts;
    r.miss_counts = miss_counts;
    r.cycle_times = cycle_times;
    r.ticks = tick;
    r.makespan = tick > 0 ? static_cast<double>(tick - 1) * sc.tick : 0.0;
    r.time_per_apple = attempted > 0 ? r.makespan / attempted : 0.0;
    double rate = 0.0;
    for (const auto& rel : releases) {
      if (rel.size() >= 2 && rel.back() > rel.front()) rate += static_cast<double>(rel.size() - 1) / (rel.back() - rel.front());
    }
    if (rate > 0.0) {
      r.mean_cycle_time = 1.0 / rate;
    } else if (succeeded > 0) {
      r.mean_cycle_time = r.makespan / succeeded;
    }
    for (int i = 0; i < 2; ++i) r.utilization[i] = tick > 0 ? static_cast<double>(busy[i]) / static_cast<double>(tick) : 0.0;
    return r;
  }

  // -------------------------------------------------------------------------
  // Operator commands

  void estop() {
    bank.vent_all();
    for (int i = 0; i < 2; ++i) {
      ArmWorld& a = arms[i];
      a.motion = Motion::None;
      a.at_target = false;
      a.holding = false;
      a.stem_hold_pending = false;
      a.seal = ArmSeal::none();
      coord.arms[i] = ArmState{};
    }
    mode = "estopped";
  }

  void inject(int arm, InjectedFailure kind) {
    if (arm != 1 && arm != 2) throw CommandRejected("arm must be 1 or 2");
    if (mode != "running") throw CommandRejected("failures can only be injected while running");
    ArmWorld& a = arms[arm - 1];
    switch (kind) {
      case InjectedFailure::PrematureDetach:
        if (!a.holding && !a.seal.is_sealed()) throw CommandRejected("arm " + std::to_string(arm) + " holds no fruit");
        if (a.holding) {
          drop_fruit(arm - 1, "interference");
        } else {
          a.seal = ArmSeal::none();
          a.seal_ok = false;
          fail_attempt(arm - 1, "detachment", false);
        }
        break;
      case InjectedFailure::SealLeak:
        a.inject_leak = true;
        break;
      case InjectedFailure::StemHold:
        a.inject_stem_hold = true;
        break;
    }
  }

  void manual_move(int arm, const CartesianPoint& delta) {
    if (arm != 1 && arm != 2) throw CommandRejected("arm must be 1 or 2");
    if (!delta.finite()) throw CommandRejected("move delta must be finite");
    if (mode != "estopped") throw CommandRejected("manual moves need an emergency-stopped system");
    ArmWorld& a = arms[arm - 1];
    const CartesianPoint to = a.ee + delta;
    const IkResult ik = inverse_kinematics(a.params, to);
    if (const auto* bad = std::get_if<Unreachable>(&ik)) throw CommandRejected(bad->label());
    a.q = std::get<JointConfig>(ik);
    a.ee = to;
  }

  bool arms_idle() const {
    for (int i = 0; i < 2; ++i) {
      if (coord.arms[i].phase != Phase::Idle || !arms[i].at_home() || arms[i].holding) return false;
    }
    return true;
  }

  void set_strategy(Strategy s) {
    if (mode != "running") throw CommandRejected("strategy can only change on a running system");
    if (!arms_idle()) throw CommandRejected("strategy can only change while both arms are idle at drop-off");
    sc.strategy = s;
    pcfg.strategy = s;
  }

  void reposition(double dx, double dz) {
    if (mode != "running") throw CommandRejected("platform can only move on a running system");
    if (!arms_idle()) throw CommandRejected("platform can only move while both arms are idle at drop-off");
    try {
      platform = reposition_platform(platform, dx, dz);
    } catch (const std::out_of_range& e) {
      throw CommandRejected(e.what());
    }
    if (station >= 0 && station < stations) perceive_station();
  }
};

HarvestEngine::HarvestEngine(Scenario scenario) : HarvestEngine(std::move(scenario), Options{}) {}
HarvestEngine::HarvestEngine(Scenario scenario, Options options)
    : impl_(std::make_unique<Impl>(std::move(scenario), options)) {}
HarvestEngine::~HarvestEngine() = default;
HarvestEngine::HarvestEngine(HarvestEngine&&) noexcept = default;
HarvestEngine& HarvestEngine::operator=(HarvestEngine&&) noexcept = default;

const TraceRecord& HarvestEngine::step() { return impl_->step(); }
bool HarvestEngine::finished() const { return impl_->done; }
std::int64_t HarvestEngine::tick() const { return impl_->tick; }
const std::string& HarvestEngine::mode() const { return impl_->mode; }
void HarvestEngine::estop() { impl_->estop(); }
void HarvestEngine::inject_failure(int arm, InjectedFailure kind) { impl_->inject(arm, kind); }
void HarvestEngine::manual_move(int arm, const CartesianPoint& delta) { impl_->manual_move(arm, delta); }
void HarvestEngine::set_strategy(Strategy strategy) { impl_->set_strategy(strategy); }
void HarvestEngine::reposition(double dx, double dz) { impl_->reposition(dx, dz); }
const Scenario& HarvestEngine::scenario() const { return impl_->sc; }
EpisodeReport HarvestEngine::report() const { return impl_->report(); }
const std::vector<TraceRecord>& HarvestEngine::trace() const { return impl_->trace; }
const SampleLog& HarvestEngine::samples() const { return impl_->samples; }
const std::array<TrackingLog, 2>& HarvestEngine::tracking() const { return impl_->tracking; }
const TraceRecord* HarvestEngine::last_record() const { return impl_->have_last ? &impl_->last : nullptr; }
CartesianPoint HarvestEngine::end_effector(int arm) const {
  if (arm != 1 && arm != 2) throw std::out_of_range("arm must be 1 or 2");
  return impl_->arms[arm - 1].ee;
}

EpisodeResult run_episode(const Scenario& scenario) {
  HarvestEngine engine(scenario);
  while (!engine.finished()) engine.step();
  EpisodeResult out;
  out.report = engine.report();
  out.trace = engine.trace();
  out.samples = engine.samples();
  out.tracking = engine.tracking();
  return out;
}

EpisodeReport run_episode_report(const Scenario& scenario) {
  HarvestEngine::Options opt;
  opt.keep_trace = false;
  opt.keep_logs = false;
  HarvestEngine engine(scenario, opt);
  while (!engine.finished()) engine.step();
  return engine.report();
}

}  // namespace harvest
