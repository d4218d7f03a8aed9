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
#include <vector>

#include "harvest/arm_model.hpp"

namespace harvest {

/// Sparse timestamped positions; times start at 0 and increase strictly.
struct RawWaypoints {
  std::vector<double> times;
  std::vector<CartesianPoint> positions;
  CartesianPoint initial_velocity;
};

/// Waypoints with per-knot velocity and acceleration filled in.
struct AugmentedWaypoints {
  std::vector<double> times;
  std::vector<CartesianPoint> positions;
  std::vector<CartesianPoint> velocities;
  std::vector<CartesianPoint> accelerations;
};

/// One quintic per axis over [t_begin, t_end]. Coefficients k0..k5 are
/// expressed in local time tau = t - t_begin.
struct QuinticSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::array<std::array<double, 6>, 3> coeffs{};
};

struct TrajectorySample {
  CartesianPoint position;
  CartesianPoint velocity;
  CartesianPoint acceleration;
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<QuinticSegment> segments);

  const std::vector<QuinticSegment>& segments() const { return segments_; }
  double duration() const { return segments_.empty() ? 0.0 : segments_.back().t_end; }
  bool empty() const { return segments_.empty(); }

 private:
  std::vector<QuinticSegment> segments_;
};

/// Central-difference velocity/acceleration at interior knots; the first knot
/// takes the supplied initial velocity, the last knot comes to rest.
/// Throws std::invalid_argument for fewer than two knots, a nonzero first
/// time, or non-increasing times.
AugmentedWaypoints augment(const RawWaypoints& raw);

/// Coefficients k0..k5 of the quintic on [0, T] matching position, velocity
/// and acceleration at both ends.
std::array<double, 6> solve_endpoint_system(double p0, double v0, double a0, double p1, double v1, double a1,
                                            double T);

/// Solves the endpoint system (p, v, a at both knots) for every segment.
Trajectory fit(const AugmentedWaypoints& aug);

/// Evaluates position, velocity and acceleration at t in [0, duration].
/// Throws std::out_of_range naming the valid interval otherwise.
TrajectorySample sample(const Trajectory& traj, double t);

/// Rest-to-rest (or from `initial_velocity`) move between two points with
/// duration max(min_time, distance / cruise_speed).
Trajectory plan_point_to_point(const CartesianPoint& from, const CartesianPoint& to, double cruise_speed,
                               double min_time, const CartesianPoint& initial_velocity = {});

double move_duration(const CartesianPoint& from, const CartesianPoint& to, double cruise_speed, double min_time);

/// Re-fits from a live sample: `now` becomes the first knot (with its
/// velocity and acceleration) and `ahead` supplies the remaining knots, with
/// times measured from now.
Trajectory retarget(const TrajectorySample& now, const std::vector<double>& ahead_times,
                    const std::vector<CartesianPoint>& ahead_positions);

/// CSV with header t,px,py,pz,vx,vy,vz,ax,ay,az sampled every `dt` seconds
/// (the final knot is always included).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt);

}  // namespace harvest
