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

#include "harvest/tracking_control.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace harvest {

void Gains::validate() const {
  for (double g : {kx, ky, kz, tx, ty, tz}) {
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("controller gains must be positive");
  }
}

JointRates joint_rates_for(const ArmParams& a, const JointConfig& q, const CartesianPoint& u) {
  const double ct = std::cos(q.theta), st = std::sin(q.theta);
  const double cp = std::cos(q.phi), sp = std::sin(q.phi);
  const double yaw_den = a.x2 * cp;
  const double pitch_den = a.x2 * ct * cp + a.x1 * ct - a.z1 * st;
  if (yaw_den == 0.0 || pitch_den == 0.0) throw std::invalid_argument("singular arm configuration");

  JointRates r;
  r.phi_dot = -u.y / yaw_den;
  r.theta_dot = (u.z + a.x2 * r.phi_dot * st * sp) / pitch_den;
  r.d_dot = u.x + r.theta_dot * (a.x1 * st + a.z1 * ct + a.x2 * st * cp) + r.phi_dot * a.x2 * ct * sp;
  return r;
}

JointRates control_step(const ArmParams& params, const Gains& g, ControllerState& state, const JointConfig& q,
                        const ReferencePoint& ref, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("control_step: dt must be positive");
  if (!ref.position.finite() || !ref.velocity.finite()) throw std::invalid_argument("control_step: non-finite reference");
  if (!std::isfinite(q.d) || !std::isfinite(q.theta) || !std::isfinite(q.phi) || !state.eta.finite()) {
    throw std::invalid_argument("control_step: non-finite state");
  }

  const CartesianPoint e = forward_kinematics(params, q) - ref.position;
  // The integral state is advanced before it is applied. Applying it one step
  // late turns the sign term into a relay with delay and sustains a limit
  // cycle of roughly t*dt/k.
  if (state.robust_term_enabled) {
    state.eta.x += g.tx * (e.x + sign_of(e.x)) * dt;
    state.eta.y += g.ty * (e.y + sign_of(e.y)) * dt;
    state.eta.z += g.tz * (e.z + sign_of(e.z)) * dt;
  }
  const CartesianPoint& eta = state.eta;
  const CartesianPoint u{ref.velocity.x - g.kx * e.x - eta.x, ref.velocity.y - g.ky * e.y - eta.y,
                         ref.velocity.z - g.kz * e.z - eta.z};
  const JointRates rates = joint_rates_for(params, q, u);
  state.last_error = e;
  return rates;
}

double TrackingLog::window_mean_error(double window) const {
  if (entries.empty()) return final_error.norm();
  const double end = entries.back().t;
  double sum = 0.0;
  std::size_t n = 0;
  for (auto it = entries.rbegin(); it != entries.rend() && it->t >= end - window; ++it) {
    sum += it->error.norm();
    ++n;
  }
  return sum / static_cast<double>(n);
}

TrackingLog simulate_tracking(const ArmParams& params, const Gains& gains, const Trajectory& traj,
                              const JointConfig& q0, const TrackingOptions& opt) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("simulate_tracking: dt must be positive");
  if (traj.empty()) throw std::invalid_argument("simulate_tracking: empty trajectory");
  gains.validate();

  ControllerState state;
  state.robust_term_enabled = opt.robust_term;
  state.reset();

  TrackingLog log;
  JointConfig q = q0;
  const double end = traj.duration();
  const auto total_steps = static_cast<std::size_t>(std::ceil((end + opt.hold) / opt.dt - 1e-9));
  const TrajectorySample last = sample(traj, end);

  for (std::size_t k = 0; k <= total_steps; ++k) {
    const double t = static_cast<double>(k) * opt.dt;
    ReferencePoint ref;
    if (t < end) {
      const TrajectorySample s = sample(traj, t);
      ref = {s.position, s.velocity};
    } else {
      ref = {last.position, {}};
    }

    const JointRates cmd = control_step(params, gains, state, q, ref, opt.dt);
    const CartesianPoint& e = state.last_error;
    log.max_error = std::max(log.max_error, e.norm());
    if (opt.log_every != 0 && k % opt.log_every == 0) log.entries.push_back({t, e, q, cmd});
    if (k == total_steps) break;

    JointRates applied = cmd;
    if (opt.disturbance.x != 0.0 || opt.disturbance.y != 0.0 || opt.disturbance.z != 0.0) {
      const JointRates bias = joint_rates_for(params, q, opt.disturbance);
      applied.d_dot += bias.d_dot;
      applied.theta_dot += bias.theta_dot;
      applied.phi_dot += bias.phi_dot;
    }
    q.d += applied.d_dot * opt.dt;
    q.theta += applied.theta_dot * opt.dt;
    q.phi += applied.phi_dot * opt.dt;
    if (clamp_to_limits(params, q)) ++log.clamped_steps;
    ++log.steps;
  }

  log.final_q = q;
  log.final_error = forward_kinematics(params, q) - last.position;
  log.infeasible = log.steps > 0 && static_cast<double>(log.clamped_steps) > 0.2 * static_cast<double>(log.steps);
  return log;
}

void write_tracking_csv(std::ostream& out, const TrackingLog& log) {
  out << "t,ex,ey,ez,D,theta,phi\n";
  for (const auto& e : log.entries) {
    out << e.t << ',' << e.error.x << ',' << e.error.y << ',' << e.error.z << ',' << e.q.d << ',' << e.q.theta << ','
        << e.q.phi << '\n';
  }
}

}  // namespace harvest
