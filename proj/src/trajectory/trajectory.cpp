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

#include "harvest/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace harvest {
namespace {

double axis(const CartesianPoint& p, int k) { return k == 0 ? p.x : (k == 1 ? p.y : p.z); }

CartesianPoint from_axes(double x, double y, double z) { return {x, y, z}; }

void check_knots(const std::vector<double>& times, std::size_t n_positions) {
  if (times.size() < 2) throw std::invalid_argument("trajectory needs at least two knots");
  if (times.size() != n_positions) throw std::invalid_argument("times and positions differ in length");
  if (times.front() != 0.0) throw std::invalid_argument("first knot time must be 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("knot times must increase strictly");
  }
}

}  // namespace

std::array<double, 6> solve_endpoint_system(double p0, double v0, double a0, double p1, double v1, double a1,
                                            double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::logic_error("quintic segment needs positive duration");
  // Closed-form inverse of the 6x6 system matching (p, v, a) at tau = 0 and T.
  const double h = p1 - p0;
  const double T2 = T * T, T3 = T2 * T;
  std::array<double, 6> k{};
  k[0] = p0;
  k[1] = v0;
  k[2] = 0.5 * a0;
  k[3] = (20.0 * h - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T2) / (2.0 * T3);
  k[4] = (-30.0 * h + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T2) / (2.0 * T3 * T);
  k[5] = (12.0 * h - 6.0 * (v1 + v0) * T + (a1 - a0) * T2) / (2.0 * T3 * T2);
  return k;
}

Trajectory::Trajectory(std::vector<QuinticSegment> segments) : segments_(std::move(segments)) {
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (segments_[i].t_begin != segments_[i - 1].t_end) {
      throw std::invalid_argument("trajectory segments must tile time without gaps");
    }
  }
}

AugmentedWaypoints augment(const RawWaypoints& raw) {
  check_knots(raw.times, raw.positions.size());
  const std::size_t n = raw.times.size();
  const auto& t = raw.times;
  const auto& p = raw.positions;

  AugmentedWaypoints aug;
  aug.times = t;
  aug.positions = p;
  aug.velocities.resize(n);
  aug.accelerations.resize(n);

  aug.velocities.front() = raw.initial_velocity;
  aug.velocities.back() = {};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    aug.velocities[i] = (1.0 / (t[i + 1] - t[i - 1])) * (p[i + 1] - p[i - 1]);
  }
  aug.accelerations.front() = {};
  aug.accelerations.back() = {};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    aug.accelerations[i] = (1.0 / (t[i + 1] - t[i - 1])) * (aug.velocities[i + 1] - aug.velocities[i - 1]);
  }
  return aug;
}

Trajectory fit(const AugmentedWaypoints& aug) {
  check_knots(aug.times, aug.positions.size());
  const std::size_t n = aug.times.size();
  if (aug.velocities.size() != n || aug.accelerations.size() != n) {
    throw std::invalid_argument("augmented waypoints are incomplete");
  }

  std::vector<QuinticSegment> segments;
  segments.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double T = aug.times[i + 1] - aug.times[i];
    QuinticSegment seg;
    seg.t_begin = aug.times[i];
    seg.t_end = aug.times[i + 1];
    for (int a = 0; a < 3; ++a) {
      seg.coeffs[a] = solve_endpoint_system(axis(aug.positions[i], a), axis(aug.velocities[i], a),
                                            axis(aug.accelerations[i], a), axis(aug.positions[i + 1], a),
                                            axis(aug.velocities[i + 1], a), axis(aug.accelerations[i + 1], a), T);
    }
    segments.push_back(seg);
  }
  return Trajectory(std::move(segments));
}

TrajectorySample sample(const Trajectory& traj, double t) {
  if (traj.empty()) throw std::out_of_range("cannot sample an empty trajectory");
  const double end = traj.duration();
  if (!(t >= 0.0 && t <= end)) {
    std::ostringstream os;
    os << "sample time " << t << " outside [0, " << end << "]";
    throw std::out_of_range(os.str());
  }
  const auto& segs = traj.segments();
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](double value, const QuinticSegment& s) { return value < s.t_end; });
  const QuinticSegment& seg = it == segs.end() ? segs.back() : *it;
  const double tau = t - seg.t_begin;

  double p[3], v[3], a[3];
  for (int ax = 0; ax < 3; ++ax) {
    const auto& k = seg.coeffs[ax];
    p[ax] = ((((k[5] * tau + k[4]) * tau + k[3]) * tau + k[2]) * tau + k[1]) * tau + k[0];
    v[ax] = (((5.0 * k[5] * tau + 4.0 * k[4]) * tau + 3.0 * k[3]) * tau + 2.0 * k[2]) * tau + k[1];
    a[ax] = ((20.0 * k[5] * tau + 12.0 * k[4]) * tau + 6.0 * k[3]) * tau + 2.0 * k[2];
  }
  return {from_axes(p[0], p[1], p[2]), from_axes(v[0], v[1], v[2]), from_axes(a[0], a[1], a[2])};
}

double move_duration(const CartesianPoint& from, const CartesianPoint& to, double cruise_speed, double min_time) {
  if (!(cruise_speed > 0.0)) throw std::invalid_argument("cruise speed must be positive");
  return std::max(min_time, distance(from, to) / cruise_speed);
}

Trajectory plan_point_to_point(const CartesianPoint& from, const CartesianPoint& to, double cruise_speed,
                               double min_time, const CartesianPoint& initial_velocity) {
  RawWaypoints raw;
  raw.times = {0.0, move_duration(from, to, cruise_speed, min_time)};
  raw.positions = {from, to};
  raw.initial_velocity = initial_velocity;
  return fit(augment(raw));
}

Trajectory retarget(const TrajectorySample& now, const std::vector<double>& ahead_times,
                    const std::vector<CartesianPoint>& ahead_positions) {
  RawWaypoints raw;
  raw.times.push_back(0.0);
  raw.times.insert(raw.times.end(), ahead_times.begin(), ahead_times.end());
  raw.positions.push_back(now.position);
  raw.positions.insert(raw.positions.end(), ahead_positions.begin(), ahead_positions.end());
  raw.initial_velocity = now.velocity;
  AugmentedWaypoints aug = augment(raw);
  aug.accelerations.front() = now.acceleration;
  return fit(aug);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  out << "t,px,py,pz,vx,vy,vz,ax,ay,az\n";
  const double end = traj.duration();
  const auto steps = static_cast<long>(std::floor(end / dt + 1e-9));
  auto row = [&](double t) {
    const TrajectorySample s = sample(traj, t);
    out << t << ',' << s.position.x << ',' << s.position.y << ',' << s.position.z << ',' << s.velocity.x << ','
        << s.velocity.y << ',' << s.velocity.z << ',' << s.acceleration.x << ',' << s.acceleration.y << ','
        << s.acceleration.z << '\n';
  };
  for (long i = 0; i <= steps; ++i) row(std::min(end, static_cast<double>(i) * dt));
  if (static_cast<double>(steps) * dt < end - 1e-12) row(end);
}

}  // namespace harvest
