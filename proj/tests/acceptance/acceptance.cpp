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

// One line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "../dbscan_oracle.hpp"
#include "../random_schedules.hpp"
#include "harvest/arm_model.hpp"
#include "harvest/harvest_sim.hpp"
#include "harvest/localization.hpp"
#include "harvest/monitor.hpp"
#include "harvest/tracking_control.hpp"
#include "harvest/trajectory.hpp"

namespace {

using namespace harvest;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome timing() {
  const PhaseDurations d{2.0, 0.3, 0.2};
  const Strategy strategies[3] = {Strategy::Baseline, Strategy::V2023, Strategy::V2024};
  const double expected[3] = {4.5, 2.5, 2.25};
  Outcome out;
  double slowest = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double theory = theoretical_cycle_time(strategies[k], d);
    const auto start = Clock::now();
    const EpisodeReport r = run_episode_report(ideal_scenario(strategies[k]));
    slowest = std::max(slowest, seconds_since(start));
    out.pass = out.pass && std::abs(theory - expected[k]) <= 0.05 && std::abs(r.mean_cycle_time - expected[k]) <= 0.05 &&
               r.succeeded == r.apples;
    out.detail += fmt("%s theory %.3f sim %.3f; ", to_string(strategies[k]), theory, r.mean_cycle_time);
  }
  out.pass = out.pass && slowest < 5.0;
  out.detail += fmt("slowest episode %.3f s", slowest);
  return out;
}

struct Calibration {
  Summary dual, single;
  int min_attempts = 0;
  double seconds = 0.0;
};

Calibration calibrate() {
  Calibration c;
  const auto start = Clock::now();
  std::vector<EpisodeReport> dual, single;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    dual.push_back(run_episode_report(calibration_scenario(Strategy::V2024, seed)));
    single.push_back(run_episode_report(calibration_scenario(Strategy::SingleArm, seed)));
  }
  c.dual = summarize(dual);
  c.single = summarize(single);
  c.min_attempts = std::min_element(dual.begin(), dual.end(), [](const auto& a, const auto& b) {
                     return a.attempted < b.attempted;
                   })->attempted;
  c.seconds = seconds_since(start);
  return c;
}

Outcome coordination_gain(const Calibration& c) {
  const double ratio = c.dual.mean_time_per_apple / c.single.mean_time_per_apple;
  return {ratio <= 0.75, fmt("v2024 %.3f s/apple, single arm %.3f s/apple, ratio %.3f (bound 0.75) over 50 seeds",
                             c.dual.mean_time_per_apple, c.single.mean_time_per_apple, ratio)};
}

Outcome success_rate(const Calibration& c) {
  const double rate = c.dual.success_rate, first = c.dual.first_attempt_share;
  std::string hist;
  for (const auto& [cause, share] : c.dual.failure_share) hist += fmt(" %s %.1f%%", cause.c_str(), 100.0 * share);
  return {rate >= 0.78 && rate <= 0.82 && first >= 0.80,
          fmt("success %.2f%% of %d attempts (mean %.0f per episode, min %d), first attempt %.2f%%;", 100.0 * rate,
              c.dual.attempted, c.dual.attempted / 50.0, c.min_attempts, 100.0 * first) +
              hist};
}

JointConfig random_config(const ArmParams& a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {a.d_min + u(rng) * (a.d_max - a.d_min), a.theta_min + u(rng) * (a.theta_max - a.theta_min),
          a.phi_min + u(rng) * (a.phi_max - a.phi_min)};
}

Outcome kinematics() {
  double worst_ik = 0.0, worst_rate = 0.0;
  bool all_solved = true;
  for (const ArmParams& a : {ArmParams::arm1(), ArmParams::arm2()}) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> rate(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const JointConfig q = random_config(a, rng);
      const CartesianPoint p = forward_kinematics(a, q);
      const IkResult r = inverse_kinematics(a, p);
      if (!std::holds_alternative<JointConfig>(r)) {
        all_solved = false;
        continue;
      }
      const JointConfig& b = std::get<JointConfig>(r);
      worst_ik = std::max({worst_ik, std::abs(b.d - q.d), std::abs(b.theta - q.theta), std::abs(b.phi - q.phi)});
      const CartesianPoint back = forward_kinematics(a, b);
      worst_ik = std::max({worst_ik, std::abs(back.x - p.x), std::abs(back.y - p.y), std::abs(back.z - p.z)});

      const JointRates qd{rate(rng), rate(rng), rate(rng)};
      constexpr double h = 1e-6;
      auto at = [&](double t) {
        return forward_kinematics(a, {q.d + qd.d_dot * t, q.theta + qd.theta_dot * t, q.phi + qd.phi_dot * t});
      };
      const CartesianPoint fd = (1.0 / (2.0 * h)) * (at(h) - at(-h));
      const CartesianRates v = cartesian_rates(a, q, qd);
      worst_rate = std::max({worst_rate, std::abs(v.x_dot - fd.x), std::abs(v.y_dot - fd.y), std::abs(v.z_dot - fd.z)});
    }
  }
  return {all_solved && worst_ik <= 1e-9 && worst_rate <= 1e-6,
          fmt("1000 samples per arm, worst round-trip component %.2e (bound 1e-9), worst velocity map vs central "
              "difference %.2e (bound 1e-6)",
              worst_ik, worst_rate)};
}

double axis(const CartesianPoint& p, int ax) { return ax == 0 ? p.x : (ax == 1 ? p.y : p.z); }

double eval(const QuinticSegment& s, int ax, double tau, int deriv) {
  double out = 0.0;
  for (int c = deriv; c < 6; ++c) {
    double f = 1.0;
    for (int m = 0; m < deriv; ++m) f *= c - m;
    out += f * s.coeffs[ax][c] * std::pow(tau, c - deriv);
  }
  return out;
}

Outcome trajectory() {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-0.3, 0.3), gap(0.1, 0.4);
  RawWaypoints raw;
  double t = 0.0;
  for (int i = 0; i < 15; ++i) {
    raw.times.push_back(t);
    raw.positions.push_back({1.0 + u(rng), u(rng), 0.2 + u(rng)});
    t += gap(rng);
  }
  const auto start = Clock::now();
  const AugmentedWaypoints aug = augment(raw);
  const Trajectory traj = fit(aug);
  const double elapsed = seconds_since(start);

  double knot = 0.0, joint = 0.0;
  const auto& segs = traj.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const double T = segs[i].t_end - segs[i].t_begin;
    for (int ax = 0; ax < 3; ++ax) {
      knot = std::max({knot, std::abs(eval(segs[i], ax, 0, 0) - axis(aug.positions[i], ax)),
                       std::abs(eval(segs[i], ax, T, 0) - axis(aug.positions[i + 1], ax))});
      if (i + 1 < segs.size()) {
        for (int d = 0; d < 3; ++d) joint = std::max(joint, std::abs(eval(segs[i], ax, T, d) - eval(segs[i + 1], ax, 0, d)));
      }
    }
  }

  bool symmetric = true;
  for (double T : {0.4, 1.0, 1.5, 2.0}) {
    for (double dp : {0.3, -0.25, 1.0}) {
      RawWaypoints line;
      line.times = {0.0, T};
      line.positions = {{0.1, 0.0, 0.0}, {0.1 + dp, 0.0, 0.0}};
      const double mid = sample(fit(augment(line)), T / 2).position.x - 0.1;
      symmetric = symmetric && std::abs(mid - 0.5 * dp) <= 1e-12;
    }
  }
  return {knot <= 1e-9 && joint <= 1e-9 && elapsed < 0.1 && symmetric,
          fmt("15 waypoints fitted in %.2e s (budget 0.1 s), knot error %.2e, C2 jump %.2e, rest-to-rest midpoint %s",
              elapsed, knot, joint, symmetric ? "exact" : "off")};
}

Outcome controller() {
  const ArmParams arm = ArmParams::arm1();
  const CartesianPoint home = forward_kinematics(arm, {});
  RawWaypoints raw;
  raw.times = {0.0, 1.5};
  raw.positions = {home, home + CartesianPoint{0.3, 0.0, 0.0}};
  const Trajectory move = fit(augment(raw));

  const double clean = simulate_tracking(arm, {}, move, {}).final_error.norm();
  TrackingOptions opt;
  opt.disturbance = {0.0, 0.02, 0.0};
  const double robust = simulate_tracking(arm, {}, move, {}, opt).final_error.norm();
  opt.robust_term = false;
  const double ablated = simulate_tracking(arm, {}, move, {}, opt).final_error.norm();
  return {clean < 1e-3 && robust < 2e-3 && ablated > 2e-3,
          fmt("1.5 s / 0.3 m move: terminal error %.3f mm undisturbed, %.3f mm with 0.02 m/s bias, %.3f mm with the "
              "robust term off",
              1e3 * clean, 1e3 * robust, 1e3 * ablated)};
}

Outcome clustering() {
  std::mt19937_64 rng(200);
  int agree = 0, order = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = testing::random_instance(rng, 200);
    const DbscanParams p = testing::random_params(rng);
    const auto labels = dbscan(pts, p);
    agree += testing::labels_match_oracle(pts, p, labels);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<CartesianPoint> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    const auto relabelled = dbscan(shuffled, p);
    bool same = true;
    for (std::size_t k = 0; k < perm.size(); ++k) same = same && relabelled[k] == labels[perm[k]];
    order += same;
  }

  std::mt19937_64 place(61);
  std::uniform_real_distribution<double> lat(-0.4, 0.4), dep(0.9, 1.5);
  double worst = 0.0;
  int located = 0;
  for (int i = 0; i < 500; ++i) {
    ObservationSpec spec;
    spec.center = {lat(place), lat(place), dep(place)};
    const SegmentedObservation obs = synthesize_observation(spec, 5000 + static_cast<std::uint64_t>(i));
    const EstimateResult r = estimate_position(obs, {});
    if (!std::holds_alternative<AppleEstimate>(r)) continue;
    ++located;
    worst = std::max(worst, distance(std::get<AppleEstimate>(r).position, obs.truth_position));
  }
  return {agree == 200 && order == 200 && located == 500 && worst <= 0.015,
          fmt("%d/200 instances match the brute-force oracle, %d/200 order-invariant; unoccluded error worst %.2f mm "
              "over %d/500 apples (bound 15 mm)",
              agree, order, 1e3 * worst, located)};
}

Outcome monitor() {
  int violations = 0, overlaps = 0, unconserved = 0, errors = 0, injections = 0;
  std::size_t ticks = 0;
  const auto start = Clock::now();
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const testing::ScheduleOutcome s = testing::run_random_schedule(k);
    violations += !s.verdict.ok;
    overlaps += s.both_attaching;
    unconserved += !s.conserved;
    errors += !s.error.empty();
    injections += s.injections;
    ticks += static_cast<std::size_t>(s.report.ticks);
  }
  const double schedules_s = seconds_since(start);

  // Plant violations into a clean trace and require the exact tick back.
  const std::vector<TraceRecord> clean = run_episode(calibration_scenario(Strategy::V2024, 3, 2)).trace;
  struct Plant {
    const char* formula;
    std::function<bool(std::vector<TraceRecord>&, std::size_t)> apply;
  };
  const Plant plants[] = {
      {formula::kMutualExclusion,
       [](std::vector<TraceRecord>& t, std::size_t k) {
         t[k].arms[0].props.attaching = t[k].arms[1].props.attaching = true;
         return true;
       }},
      {formula::kAttachedNeedsOpen,
       [](std::vector<TraceRecord>& t, std::size_t k) {
         if (t[k].arms[1].props.open_valve) return false;
         t[k].arms[1].props.attached = true;
         return true;
       }},
      {formula::kOpenAfterApproach,
       [](std::vector<TraceRecord>& t, std::size_t k) {
         const ArmProps& prev = t[k - 1].arms[0].props;
         // A tick that also starts an approach would break a second formula.
         if (prev.open_valve || prev.approach || t[k].arms[0].props.open_valve || !t[k].arms[0].actions.empty()) {
           return false;
         }
         t[k].arms[0].props.open_valve = true;
         return true;
       }},
  };
  int planted = 0, caught = 0;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> where(1, clean.size() - 2);
  for (const Plant& plant : plants) {
    for (int n = 0; n < 100;) {
      std::vector<TraceRecord> t = clean;
      const std::size_t k = where(rng);
      if (!plant.apply(t, k)) continue;
      ++n;
      ++planted;
      const MonitorVerdict v = monitor_check(t);
      caught += !v.ok && v.formula == plant.formula && v.tick == t[k].tick;
    }
  }
  return {violations == 0 && overlaps == 0 && unconserved == 0 && errors == 0 && caught == planted,
          fmt("10000 random v2024 schedules (%zu ticks, %d injected failures, %.1f s): %d violations, %d ticks with both "
              "arms attaching, %d conservation breaks, %d errors; %d/%d planted violations caught at their tick",
              ticks, injections, schedules_s, violations, overlaps, unconserved, errors, caught, planted)};
}

Outcome determinism() {
  int identical = 0, runs = 0;
  for (Strategy s : {Strategy::Baseline, Strategy::V2023, Strategy::V2024, Strategy::SingleArm}) {
    for (std::uint64_t seed : {1u, 42u}) {
      const Scenario sc = calibration_scenario(s, seed, 4);
      const EpisodeResult a = run_episode(sc), b = run_episode(sc);
      std::ostringstream ta, tb;
      write_trace(ta, a.trace);
      write_trace(tb, b.trace);
      ++runs;
      identical += report_to_json(a.report) == report_to_json(b.report) && ta.str() == tb.str();
    }
  }
  return {identical == runs, fmt("%d/%d (strategy, seed) pairs give byte-identical reports and traces twice in a row",
                                 identical, runs)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  };
  report("timing", timing());
  const Calibration c = calibrate();
  report("coordination-gain", coordination_gain(c));
  report("success-rate", success_rate(c));
  report("kinematics", kinematics());
  report("trajectory", trajectory());
  report("controller", controller());
  report("dbscan", clustering());
  report("ltl-monitor", monitor());
  report("determinism", determinism());
  std::cout << (failures == 0 ? "all acceptance criteria pass" : std::to_string(failures) + " criteria fail")
            << " (calibration runs " << fmt("%.1f", c.seconds) << " s)" << std::endl;
  return failures;
}
