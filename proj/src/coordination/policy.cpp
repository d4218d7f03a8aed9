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

#include <string>

#include "harvest/coordination.hpp"

namespace harvest {

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Idle:
      return "Idle";
    case Phase::Approaching:
      return "Approaching";
    case Phase::AtTarget:
      return "AtTarget";
    case Phase::Attaching:
      return "Attaching";
    case Phase::Retracting:
      return "Retracting";
    case Phase::AtDropoff:
      return "AtDropoff";
    case Phase::Releasing:
      return "Releasing";
  }
  return "Unknown";
}

std::optional<Phase> phase_from_string(const std::string& name) {
  for (Phase p : {Phase::Idle, Phase::Approaching, Phase::AtTarget, Phase::Attaching, Phase::Retracting,
                  Phase::AtDropoff, Phase::Releasing}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

bool legal_transition(Phase from, Phase to) {
  if (from == to) return from != Phase::AtDropoff;
  switch (from) {
    case Phase::Idle:
      return to == Phase::Approaching;
    case Phase::Approaching:
      return to == Phase::AtTarget || to == Phase::Attaching;
    case Phase::AtTarget:
      return to == Phase::Attaching;
    case Phase::Attaching:
      return to == Phase::AtTarget || to == Phase::Retracting;
    case Phase::Retracting:
    case Phase::Releasing:
      return to == Phase::Releasing || to == Phase::AtDropoff || to == Phase::Idle || to == Phase::Approaching;
    case Phase::AtDropoff:
      return to == Phase::Idle || to == Phase::Approaching;
  }
  return false;
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Baseline:
      return "baseline";
    case Strategy::V2023:
      return "v2023";
    case Strategy::V2024:
      return "v2024";
    case Strategy::SingleArm:
      return "single_arm";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_string(const std::string& name) {
  for (Strategy s : {Strategy::Baseline, Strategy::V2023, Strategy::V2024, Strategy::SingleArm}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::vector<std::string> ArmActions::names() const {
  std::vector<std::string> out;
  if (start_approach) out.emplace_back("start_approach");
  if (open_valve) out.emplace_back("open_valve");
  if (close_valve) out.emplace_back("close_valve");
  if (start_retract) out.emplace_back("start_retract");
  return out;
}

namespace {

bool sequential(Strategy s) { return s == Strategy::Baseline || s == Strategy::SingleArm; }

void check_consistent(const CoordState& s) {
  if (s.turn != 0 && s.turn != 1) throw PolicyViolation("turn must name arm 1 or arm 2");
  if (s.arms[0].phase == Phase::Attaching && s.arms[1].phase == Phase::Attaching) {
    throw PolicyViolation("both arms in Attaching");
  }
  for (const ArmState& a : s.arms) {
    const bool holds_target = a.phase == Phase::Approaching || a.phase == Phase::AtTarget || a.phase == Phase::Attaching;
    if (holds_target && a.target < 0) throw PolicyViolation(std::string("arm in ") + to_string(a.phase) + " without target");
    if (a.phase == Phase::Idle && a.valve_intent) throw PolicyViolation("idle arm with valve held open");
    if (a.phase == Phase::Releasing && a.valve_intent) throw PolicyViolation("releasing arm with valve held open");
    if (a.attach_ticks < 0) throw PolicyViolation("negative attach counter");
  }
}

class Stepper {
 public:
  Stepper(const CoordState& s, const std::array<ArmInputs, 2>& in, const PolicyConfig& cfg)
      : next_(s), in_(in), cfg_(cfg) {}

  PolicyResult run() {
    step_arm(0);
    step_arm(1);
    return {next_, actions_};
  }

 private:
  bool may_start(int i) const {
    const int j = 1 - i;
    const ArmInputs& in = in_[i];
    if (!(in.props.detected && in.props.retract && in.next_apple && in.motion_clear)) return false;
    if (!sequential(cfg_.strategy)) return true;
    if (next_.arms[j].phase != Phase::Idle) return false;
    return next_.turn == i || !(in_[j].props.detected && in_[j].next_apple);
  }

  bool may_open(int i) const {
    const int j = 1 - i;
    const Phase other = next_.arms[j].phase;
    switch (cfg_.strategy) {
      case Strategy::V2024:
        return other != Phase::Attaching && !(in_[j].props.open_valve && !in_[j].props.attached);
      case Strategy::V2023:
        return other == Phase::Idle || other == Phase::Approaching || other == Phase::AtTarget;
      case Strategy::Baseline:
      case Strategy::SingleArm:
        return other != Phase::Attaching;
    }
    return false;
  }

  void step_arm(int i) {
    const int j = 1 - i;
    ArmState& a = next_.arms[i];
    ArmActions& act = actions_[i];
    const ArmProps& p = in_[i].props;
    const bool reactive = cfg_.strategy == Strategy::V2024;
    bool moved = false;  // a motion started this tick

    for (int guard = 0; guard < 8; ++guard) {
      switch (a.phase) {
        case Phase::Idle:
          if (may_start(i)) {
            act.start_approach = true;
            act.target = *in_[i].next_apple;
            a.target = act.target;
            a.phase = Phase::Approaching;
            if (sequential(cfg_.strategy)) next_.turn = j;
            moved = true;
          }
          return;

        case Phase::Approaching:
          if (moved || !p.approach) return;
          a.phase = Phase::AtTarget;
          continue;

        case Phase::AtTarget:
          if (may_open(i)) {
            act.open_valve = true;
            a.valve_intent = true;
            a.attach_ticks = 0;
            a.phase = Phase::Attaching;
          }
          return;

        case Phase::Attaching:
          ++a.attach_ticks;
          if (reactive) {
            if (!p.open_valve && in_[j].props.open_valve && !in_[j].props.attached) {
              act.close_valve = true;
              a.valve_intent = false;
              a.phase = Phase::AtTarget;
              return;
            }
            if (p.attached) {
              act.start_retract = true;
              a.phase = Phase::Retracting;
              return;
            }
            if (a.attach_ticks >= cfg_.attach_timeout_ticks) {
              act.close_valve = true;
              act.start_retract = true;
              a.valve_intent = false;
              a.skip_release = true;
              a.phase = Phase::Retracting;
            }
            return;
          }
          if (a.attach_ticks >= cfg_.fixed_attach_ticks) {
            act.start_retract = true;
            a.phase = Phase::Retracting;
            moved = true;
          }
          return;

        case Phase::Retracting:
          if (reactive && a.valve_intent && p.open_valve && !p.attached) {
            act.close_valve = true;
            a.valve_intent = false;
            a.skip_release = true;
          }
          if (moved || act.start_retract || !p.retract) return;
          if (a.valve_intent && (!reactive || p.attached)) {
            act.close_valve = true;
            a.valve_intent = false;
            a.phase = Phase::Releasing;
            return;
          }
          if (a.valve_intent) {
            act.close_valve = true;
            a.valve_intent = false;
          }
          a.phase = Phase::AtDropoff;
          continue;

        case Phase::Releasing:
          if (!in_[i].release_done) return;
          a.phase = Phase::AtDropoff;
          continue;

        case Phase::AtDropoff:
          a.target = -1;
          a.skip_release = false;
          a.attach_ticks = 0;
          a.phase = Phase::Idle;
          continue;
      }
    }
    throw PolicyViolation("phase chain did not settle");
  }

  CoordState next_;
  const std::array<ArmInputs, 2>& in_;
  const PolicyConfig& cfg_;
  std::array<ArmActions, 2> actions_{};
};

}  // namespace

PolicyResult policy_step(const CoordState& state, const std::array<ArmInputs, 2>& inputs, const PolicyConfig& config) {
  if (config.attach_timeout_ticks < 1 || config.fixed_attach_ticks < 1) {
    throw std::invalid_argument("attach tick counts must be positive");
  }
  check_consistent(state);
  return Stepper(state, inputs, config).run();
}

}  // namespace harvest
