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

#include "harvest/vacuum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace harvest {

void ValveConfig::set(int arm, bool source, bool atmosphere) {
  if (arm == 0) {
    v1 = source;
    v2 = atmosphere;
  } else {
    v3 = source;
    v4 = atmosphere;
  }
}

void ValveConfig::validate() const {
  if (!(actuation_time > 0.0 && actuation_time <= 1.0)) {
    throw std::invalid_argument("valve actuation time must be in (0, 1] s");
  }
}

PressureState compute_pressures(const ValveConfig& valves, const SealState& seals) {
  int leaks = 0;
  for (int i = 0; i < 2; ++i) {
    if (valves.source_open(i) && !seals.arms[i].is_sealed()) ++leaks;
  }
  PressureState p;
  p.p_source = std::max(vacuum::kSourceFloor, 1.0 - vacuum::kLeakDrop * leaks);
  const double single_leak_source = 1.0 - vacuum::kLeakDrop;
  auto line = [&](int i) {
    if (!valves.source_open(i)) return vacuum::kClosedLine;
    if (seals.arms[i].is_sealed()) return vacuum::kSealedLine;
    return vacuum::kLeakingLine * p.p_source / single_leak_source;
  };
  p.p_arm1 = line(0);
  p.p_arm2 = line(1);
  return p;
}

bool infer_attachment(std::span<const PressureState> history, int arm, double sample_period) {
  if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be positive");
  const auto needed = static_cast<std::size_t>(std::llround(vacuum::kAttachWindow / sample_period)) + 1;
  if (history.size() < needed) throw std::invalid_argument("attachment inference needs a full window of samples");
  return std::all_of(history.end() - static_cast<std::ptrdiff_t>(needed), history.end(),
                     [arm](const PressureState& p) { return p.arm(arm) >= vacuum::kAttachThreshold; });
}

const char* to_string(DetachOutcome outcome) {
  switch (outcome) {
    case DetachOutcome::SealedFailure:
      return "sealed-failure";
    case DetachOutcome::Detached:
      return "detached";
    case DetachOutcome::StemHold:
      return "stem-hold";
  }
  return "unknown";
}

DetachOutcome attempt_detach(double stem_force, double offset, bool leaf_obstruction, double p_source) {
  if (leaf_obstruction || std::abs(offset) > vacuum::kSealTolerance) return DetachOutcome::SealedFailure;
  return vacuum::kSuctionForce * p_source >= stem_force ? DetachOutcome::Detached : DetachOutcome::StemHold;
}

ValveBank::ValveBank(double actuation_time, double tick) {
  config_.actuation_time = actuation_time;
  config_.validate();
  if (!(tick > 0.0)) throw std::invalid_argument("tick must be positive");
  latency_ = std::max(1, static_cast<int>(std::lround(actuation_time / tick)));
}

void ValveBank::request(int arm, bool open) {
  if (arm != 0 && arm != 1) throw std::out_of_range("arm index must be 0 or 1");
  if (requested_[arm] == open) return;
  requested_[arm] = open;
  if (open) {
    config_.set(arm, config_.source_open(arm), false);
    vent_countdown_[arm] = -1;
    close_due_[arm] = false;
    source_countdown_[arm] = latency_;
  } else {
    source_countdown_[arm] = -1;
    close_due_[arm] = true;
    vent_countdown_[arm] = latency_;
  }
}

void ValveBank::step() {
  for (int arm = 0; arm < 2; ++arm) {
    if (close_due_[arm]) {
      config_.set(arm, false, config_.atmosphere_open(arm));
      close_due_[arm] = false;
    }
    if (source_countdown_[arm] > 0 && --source_countdown_[arm] == 0) {
      config_.set(arm, true, false);
      source_countdown_[arm] = -1;
    }
    if (vent_countdown_[arm] > 0 && --vent_countdown_[arm] == 0) {
      config_.set(arm, false, true);
      vent_countdown_[arm] = -1;
    }
  }
}

void ValveBank::vent_all() {
  for (int arm = 0; arm < 2; ++arm) {
    config_.set(arm, false, true);
    requested_[arm] = false;
    close_due_[arm] = false;
    source_countdown_[arm] = -1;
    vent_countdown_[arm] = -1;
  }
}

void write_pressure_header(std::ostream& out) { out << "t,p_arm1,p_arm2,p_source,v1,v2,v3,v4\n"; }

void write_pressure_row(std::ostream& out, double t, const PressureState& p, const ValveConfig& v) {
  out << t << ',' << p.p_arm1 << ',' << p.p_arm2 << ',' << p.p_source << ',' << v.v1 << ',' << v.v2 << ',' << v.v3
      << ',' << v.v4 << '\n';
}

}  // namespace harvest
