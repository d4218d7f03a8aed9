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
#include <random>
#include <stdexcept>

#include "harvest/harvest_sim.hpp"

namespace harvest {

void PhaseDurations::validate() const {
  if (!(m > 0.0 && a > 0.0 && r > 0.0) || !std::isfinite(m + a + r)) {
    throw std::invalid_argument("phase durations m, a, r must be positive");
  }
}

double theoretical_cycle_time(Strategy strategy, const PhaseDurations& d) {
  d.validate();
  const double cycle = 2.0 * d.m + d.a + d.r;
  switch (strategy) {
    case Strategy::Baseline:
    case Strategy::SingleArm:
      return cycle;
    case Strategy::V2023:
      return d.m + d.a + d.r;
    case Strategy::V2024:
      return cycle / 2.0;
  }
  return cycle;
}

const char* to_string(TimingMode mode) {
  switch (mode) {
    case TimingMode::Fixed:
      return "fixed";
    case TimingMode::Kinematic:
      return "kinematic";
    case TimingMode::Random:
      return "random";
  }
  return "unknown";
}

const char* to_string(FailureMode mode) {
  switch (mode) {
    case FailureMode::None:
      return "none";
    case FailureMode::Field:
      return "field";
    case FailureMode::Uniform:
      return "uniform";
  }
  return "unknown";
}

Platform reposition_platform(const Platform& current, double dx, double dz) {
  if (!std::isfinite(dx) || !std::isfinite(dz)) throw std::invalid_argument("platform offsets must be finite");
  Platform next{current.dx + dx, current.dz + dz};
  if (std::abs(next.dx) > Platform::kMaxDx + 1e-12 || next.dz < Platform::kMinDz - 1e-12 ||
      next.dz > Platform::kMaxDz + 1e-12) {
    throw std::out_of_range("platform move leaves the travel limits");
  }
  return next;
}

void Scenario::validate() const {
  arm1.validate();
  arm2.validate();
  durations.validate();
  if (!(tick > 0.0 && tick <= 0.5)) throw std::invalid_argument("tick must be in (0, 0.5] s");
  if (!(durations.r <= 1.0)) throw std::invalid_argument("release time r is the valve actuation time and must be <= 1 s");
  if (!(speed_fraction > 0.0 && speed_fraction <= 1.0)) throw std::invalid_argument("speed_fraction must be in (0, 1]");
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (!(liveness_horizon > 0.0)) throw std::invalid_argument("liveness_horizon must be positive");
  if (!(attach_timeout > durations.r)) throw std::invalid_argument("attach_timeout must exceed the valve actuation time");
  if (!(corridor_clearance >= 0.0)) throw std::invalid_argument("corridor_clearance must be non-negative");
  if (!(failures.p >= 0.0 && failures.p <= 1.0)) throw std::invalid_argument("failure p must be in [0, 1]");
  if (!(failures.interference_probability >= 0.0 && failures.interference_probability <= 1.0)) {
    throw std::invalid_argument("interference_probability must be in [0, 1]");
  }
  if (!(failures.miss_exponent > 0.0)) throw std::invalid_argument("miss_exponent must be positive");
  reposition_platform({}, platform.dx, platform.dz);
  for (const AppleSpec& a : apples) {
    if (!a.position.finite()) throw std::invalid_argument("apple positions must be finite");
    if (a.station < 0) throw std::invalid_argument("apple station must be >= 0");
    if (!(a.radius > 0.0)) throw std::invalid_argument("apple radius must be positive");
    if (!(a.stem_force >= 0.0)) throw std::invalid_argument("stem_force must be non-negative");
    if (!(a.occlusion >= 0.0 && a.occlusion <= 1.0)) throw std::invalid_argument("occlusion must be in [0, 1]");
  }
}

int Scenario::station_count() const {
  int n = 0;
  for (const AppleSpec& a : apples) n = std::max(n, a.station + 1);
  return n;
}

Scenario ideal_scenario(Strategy strategy, std::uint64_t seed, int apples) {
  if (apples < 0) throw std::invalid_argument("apple count must be non-negative");
  Scenario s;
  s.seed = seed;
  s.strategy = strategy;
  s.timing = TimingMode::Fixed;
  s.failures.mode = FailureMode::None;
  s.perception = false;
  // Each arm works its own outer side so the corridors never meet.
  const double ys1[] = {0.18, 0.30};
  const double ys2[] = {-0.22, -0.34};
  const double zs[] = {0.14, 0.22, 0.30, 0.38, 0.46};
  for (int k = 0; k < apples; ++k) {
    const int slot = k / 2;
    AppleSpec a;
    const double y = (k % 2 == 0 ? ys1 : ys2)[(slot / 5) % 2];
    a.position = {1.30 + 0.10 * (slot / 10), y, zs[slot % 5]};
    s.apples.push_back(a);
  }
  return s;
}

namespace {

bool comfortably_shared(const Scenario& s, const CartesianPoint& p) {
  for (double dy : {-0.025, 0.0, 0.025}) {
    for (double dz : {-0.025, 0.0, 0.025}) {
      const CartesianPoint q{p.x - 0.04, p.y + dy, p.z + dz};
      if (!in_workspace(s.arm1, q) || !in_workspace(s.arm2, q)) return false;
    }
  }
  return true;
}

}  // namespace

Scenario calibration_scenario(Strategy strategy, std::uint64_t seed, int stations, int per_station) {
  if (stations < 1 || per_station < 1) throw std::invalid_argument("calibration scenario needs apples");
  Scenario s;
  s.seed = seed;
  s.strategy = strategy;
  s.timing = TimingMode::Kinematic;
  s.failures.mode = FailureMode::Field;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xca1bu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> ux(1.15, 1.55), uy(-0.15, 0.11), uz(0.12, 0.45), unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int st = 0; st < stations; ++st) {
    std::vector<CartesianPoint> placed;
    int guard = 0;
    while (static_cast<int>(placed.size()) < per_station) {
      if (++guard > 100000) throw std::logic_error("could not place calibration apples");
      const CartesianPoint p{ux(rng), uy(rng), uz(rng)};
      if (!comfortably_shared(s, p)) continue;
      const bool crowded = std::any_of(placed.begin(), placed.end(), [&](const CartesianPoint& q) {
        return distance(p, q) < 0.09;
      });
      if (crowded) continue;
      placed.push_back(p);
      AppleSpec a;
      a.station = st;
      a.position = p;
      a.radius = 0.035 + 0.01 * unit(rng);
      a.stem_force = 30.0 * std::exp(0.2 * gauss(rng));
      a.occlusion = std::pow(unit(rng), 2.2);
      a.clustered = unit(rng) < 0.31;
      a.leaf_obstruction = unit(rng) < 0.02;
      a.glare = unit(rng) < 0.16;
      s.apples.push_back(a);
    }
  }
  return s;
}

}  // namespace harvest
