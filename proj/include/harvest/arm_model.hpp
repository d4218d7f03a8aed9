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

#include <cmath>
#include <string>
#include <variant>

namespace harvest {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct CartesianPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  CartesianPoint& operator+=(const CartesianPoint& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend CartesianPoint operator+(CartesianPoint a, const CartesianPoint& b) { return a += b; }
  friend CartesianPoint operator-(const CartesianPoint& a, const CartesianPoint& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend CartesianPoint operator*(double s, const CartesianPoint& p) { return {s * p.x, s * p.y, s * p.z}; }
  friend bool operator==(const CartesianPoint&, const CartesianPoint&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const CartesianPoint& a, const CartesianPoint& b) { return (a - b).norm(); }

/// Joint vector of one arm: prismatic extension, pitch and yaw.
struct JointConfig {
  double d = 0.0;      // m
  double theta = 0.0;  // rad
  double phi = 0.0;    // rad
  friend bool operator==(const JointConfig&, const JointConfig&) = default;
};

struct JointRates {
  double d_dot = 0.0;
  double theta_dot = 0.0;
  double phi_dot = 0.0;
};

struct CartesianRates {
  double x_dot = 0.0;
  double y_dot = 0.0;
  double z_dot = 0.0;
};

/// Link offsets and joint limits of one 4-DOF harvesting arm. Angles are
/// radians; use from_degrees() when reading the tabulated form.
struct ArmParams {
  double x0 = 0.0, y0 = 0.0, z0 = 0.0;
  double x1 = 0.0, y1 = 0.0, z1 = 0.0;
  double x2 = 0.0;
  double d_min = 0.0, d_max = 0.0;
  double theta_min = 0.0, theta_max = 0.0;
  double phi_min = 0.0, phi_max = 0.0;

  static ArmParams from_degrees(double x0, double y0, double z0, double x1, double y1, double z1,
                                double x2, double d_min, double d_max, double theta_min_deg,
                                double theta_max_deg, double phi_min_deg, double phi_max_deg);

  /// Default geometry of the left (+y) and right (-y) arm.
  static ArmParams arm1();
  static ArmParams arm2();

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  friend bool operator==(const ArmParams&, const ArmParams&) = default;
};

enum class IkStage { Phi, Theta, Prismatic };

const char* to_string(IkStage stage);

struct Unreachable {
  IkStage stage;
  std::string detail;
  /// "Unreachable(phi-stage)" style label used in protocol error frames.
  std::string label() const;
};

using IkResult = std::variant<JointConfig, Unreachable>;

// Limit checks accept this much slack so that corner configurations survive
// an FK/IK round trip.
inline constexpr double kLimitSlack = 1e-9;

CartesianPoint forward_kinematics(const ArmParams& params, const JointConfig& q);

/// Closed-form inverse: yaw from the lateral row, pitch from the vertical row
/// (phase-shift form), extension from the forward row. Joint limits are
/// enforced at every stage.
IkResult inverse_kinematics(const ArmParams& params, const CartesianPoint& p);

CartesianRates cartesian_rates(const ArmParams& params, const JointConfig& q, const JointRates& qdot);

bool within_limits(const ArmParams& params, const JointConfig& q);

bool in_workspace(const ArmParams& params, const CartesianPoint& p);

/// Euclidean distance from `from` to `p`, or +infinity when `p` lies outside
/// the arm's workspace.
double reach_distance(const ArmParams& params, const CartesianPoint& from, const CartesianPoint& p);

/// Clamp each joint into its limit interval; returns true when anything moved.
bool clamp_to_limits(const ArmParams& params, JointConfig& q);

}  // namespace harvest
