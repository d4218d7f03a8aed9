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

#include "harvest/arm_model.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace harvest {
namespace {

bool in_range(double v, double lo, double hi) { return v >= lo - kLimitSlack && v <= hi + kLimitSlack; }

// Wrap into (-pi, pi].
double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ArmParams ArmParams::from_degrees(double x0, double y0, double z0, double x1, double y1, double z1,
                                  double x2, double d_min, double d_max, double theta_min_deg,
                                  double theta_max_deg, double phi_min_deg, double phi_max_deg) {
  ArmParams p;
  p.x0 = x0;
  p.y0 = y0;
  p.z0 = z0;
  p.x1 = x1;
  p.y1 = y1;
  p.z1 = z1;
  p.x2 = x2;
  p.d_min = d_min;
  p.d_max = d_max;
  p.theta_min = deg_to_rad(theta_min_deg);
  p.theta_max = deg_to_rad(theta_max_deg);
  p.phi_min = deg_to_rad(phi_min_deg);
  p.phi_max = deg_to_rad(phi_max_deg);
  return p;
}

ArmParams ArmParams::arm1() {
  return from_degrees(0.147, 0.017, 0.083, 0.0, 0.093, 0.138, 0.90, -0.02, 0.6, -17.0, 30.0, -19.0, 19.0);
}

ArmParams ArmParams::arm2() {
  return from_degrees(0.180, -0.023, 0.083, 0.0, -0.088, 0.140, 0.89, -0.02, 0.6, -15.0, 30.0, -17.0, 17.0);
}

void ArmParams::validate() const {
  const std::array<double, 13> all{x0, y0, z0, x1, y1, z1, x2, d_min, d_max, theta_min, theta_max, phi_min, phi_max};
  for (double v : all) {
    if (!std::isfinite(v)) throw std::invalid_argument("arm parameters must be finite");
  }
  if (!(x2 > 0.0)) throw std::invalid_argument("x2 must be positive");
  if (!(d_min < d_max)) throw std::invalid_argument("d_min must be below d_max");
  if (!(theta_min < theta_max)) throw std::invalid_argument("theta_min must be below theta_max");
  if (!(phi_min < phi_max)) throw std::invalid_argument("phi_min must be below phi_max");
  if (std::abs(phi_min) >= kPi / 2.0 || std::abs(phi_max) >= kPi / 2.0) {
    throw std::invalid_argument("yaw limits must stay inside (-90, 90) degrees");
  }
}

const char* to_string(IkStage stage) {
  switch (stage) {
    case IkStage::Phi:
      return "phi-stage";
    case IkStage::Theta:
      return "theta-stage";
    case IkStage::Prismatic:
      return "prismatic-stage";
  }
  return "unknown-stage";
}

std::string Unreachable::label() const { return std::string("Unreachable(") + to_string(stage) + ")"; }

CartesianPoint forward_kinematics(const ArmParams& a, const JointConfig& q) {
  const double ct = std::cos(q.theta), st = std::sin(q.theta);
  const double cp = std::cos(q.phi), sp = std::sin(q.phi);
  return {a.x0 + a.x1 * ct - a.z1 * st + a.x2 * ct * cp + q.d,
          a.y0 + a.y1 - a.x2 * sp,
          a.z0 + a.x1 * st + a.z1 * ct + a.x2 * cp * st};
}

IkResult inverse_kinematics(const ArmParams& a, const CartesianPoint& p) {
  if (!p.finite()) throw std::invalid_argument("inverse_kinematics: target must be finite");

  const double s_phi = (a.y0 + a.y1 - p.y) / a.x2;
  if (!(std::abs(s_phi) < 1.0)) {
    return Unreachable{IkStage::Phi, "lateral offset needs |sin(phi)| = " + fmt(std::abs(s_phi))};
  }
  const double phi = std::asin(s_phi);
  if (!in_range(phi, a.phi_min, a.phi_max)) {
    return Unreachable{IkStage::Phi, "phi = " + fmt(rad_to_deg(phi)) + " deg outside limits"};
  }

  // A sin(theta) + B cos(theta) = C  <=>  R sin(theta + alpha) = C
  const double A = a.x1 + a.x2 * std::cos(phi);
  const double B = a.z1;
  const double C = p.z - a.z0;
  const double R = std::hypot(A, B);
  if (C * C > R * R) {
    return Unreachable{IkStage::Theta, "height " + fmt(p.z) + " beyond pitch reach"};
  }
  const double alpha = std::atan2(B, A);
  const double base = std::asin(std::clamp(C / R, -1.0, 1.0));
  const std::array<double, 2> roots{wrap_angle(base - alpha), wrap_angle(kPi - base - alpha)};

  bool found = false;
  double theta = 0.0;
  for (double r : roots) {
    if (!in_range(r, a.theta_min, a.theta_max)) continue;
    if (!found || std::abs(r) < std::abs(theta)) theta = r;
    found = true;
  }
  if (!found) {
    return Unreachable{IkStage::Theta, "no pitch root inside limits"};
  }

  const double ct = std::cos(theta), st = std::sin(theta);
  const double d = p.x - a.x0 - a.x1 * ct + a.z1 * st - a.x2 * ct * std::cos(phi);
  if (!in_range(d, a.d_min, a.d_max)) {
    return Unreachable{IkStage::Prismatic, "extension " + fmt(d) + " m outside limits"};
  }
  return JointConfig{d, theta, phi};
}

CartesianRates cartesian_rates(const ArmParams& a, const JointConfig& q, const JointRates& r) {
  const double ct = std::cos(q.theta), st = std::sin(q.theta);
  const double cp = std::cos(q.phi), sp = std::sin(q.phi);
  CartesianRates out;
  out.x_dot = -r.theta_dot * (a.x1 * st + a.z1 * ct + a.x2 * st * cp) - r.phi_dot * a.x2 * ct * sp + r.d_dot;
  out.y_dot = -r.phi_dot * a.x2 * cp;
  out.z_dot = r.theta_dot * (a.x1 * ct - a.z1 * st + a.x2 * cp * ct) - r.phi_dot * a.x2 * sp * st;
  return out;
}

bool within_limits(const ArmParams& a, const JointConfig& q) {
  return in_range(q.d, a.d_min, a.d_max) && in_range(q.theta, a.theta_min, a.theta_max) &&
         in_range(q.phi, a.phi_min, a.phi_max);
}

bool in_workspace(const ArmParams& params, const CartesianPoint& p) {
  if (!p.finite()) return false;
  const IkResult r = inverse_kinematics(params, p);
  return std::holds_alternative<JointConfig>(r);
}

double reach_distance(const ArmParams& params, const CartesianPoint& from, const CartesianPoint& p) {
  if (!in_workspace(params, p)) return std::numeric_limits<double>::infinity();
  return distance(from, p);
}

bool clamp_to_limits(const ArmParams& a, JointConfig& q) {
  const JointConfig before = q;
  q.d = std::clamp(q.d, a.d_min, a.d_max);
  q.theta = std::clamp(q.theta, a.theta_min, a.theta_max);
  q.phi = std::clamp(q.phi, a.phi_min, a.phi_max);
  return !(before == q);
}

}  // namespace harvest
