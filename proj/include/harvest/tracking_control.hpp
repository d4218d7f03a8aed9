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
#include <iosfwd>
#include <vector>

#include "harvest/arm_model.hpp"
#include "harvest/trajectory.hpp"

namespace harvest {

/// Proportional gains k (1/s) and robust integral gains t (1/s^2) per axis.
struct Gains {
  double kx = 2.0, ky = 2.0, kz = 2.0;
  double tx = 0.5, ty = 0.5, tz = 0.5;
  void validate() const;
};

/// Integral accumulators of the robust term. Reset at the start of every
/// tracked trajectory.
struct ControllerState {
  CartesianPoint eta;
  CartesianPoint last_error;
  bool robust_term_enabled = true;

  void reset() {
    eta = {};
    last_error = {};
  }
};

struct ReferencePoint {
  CartesianPoint position;
  CartesianPoint velocity;
};

/// sgn(0) = +1.
constexpr double sign_of(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Joint rates realizing a Cartesian end-effector velocity: yaw rate from the
/// lateral row, then pitch rate using the yaw rate, then extension rate using
/// both. Exact inverse of cartesian_rates().
JointRates joint_rates_for(const ArmParams& params, const JointConfig& q, const CartesianPoint& velocity);

/// One controller evaluation: error against the reference, an explicit Euler
/// step of the integral state, then the joint-rate command. Throws std::invalid_argument on non-finite input or dt <= 0.
JointRates control_step(const ArmParams& params, const Gains& gains, ControllerState& state, const JointConfig& q,
                        const ReferencePoint& ref, double dt);

struct TrackingOptions {
  double dt = 0.001;
  /// Constant bias added to the realized Cartesian velocity (m/s).
  CartesianPoint disturbance;
  bool robust_term = true;
  /// Keep regulating the final point for this long after the trajectory ends.
  double hold = 0.0;
  /// Record every n-th step; 0 records nothing but the summary.
  std::size_t log_every = 1;
};

struct TrackingLogEntry {
  double t = 0.0;
  CartesianPoint error;
  JointConfig q;
  JointRates command;
};

struct TrackingLog {
  std::vector<TrackingLogEntry> entries;
  JointConfig final_q;
  CartesianPoint final_error;
  double max_error = 0.0;
  std::size_t steps = 0;
  std::size_t clamped_steps = 0;
  bool infeasible = false;

  /// Mean error norm over logged entries with t >= end - window.
  double window_mean_error(double window) const;
};

/// Forward-Euler kinematic plant closed around control_step(). Joint limits
/// are enforced by clamping; more than 20% clamped steps marks the outcome
/// infeasible.
TrackingLog simulate_tracking(const ArmParams& params, const Gains& gains, const Trajectory& traj,
                              const JointConfig& q0, const TrackingOptions& options = {});

/// CSV with header t,ex,ey,ez,D,theta,phi.
void write_tracking_csv(std::ostream& out, const TrackingLog& log);

}  // namespace harvest
