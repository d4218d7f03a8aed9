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

#include <gtest/gtest.h>

#include <random>

namespace harvest {
namespace {

JointConfig random_config(const ArmParams& a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {a.d_min + u(rng) * (a.d_max - a.d_min), a.theta_min + u(rng) * (a.theta_max - a.theta_min),
          a.phi_min + u(rng) * (a.phi_max - a.phi_min)};
}

TEST(ForwardKinematics, HomePoseArm1) {
  const CartesianPoint p = forward_kinematics(ArmParams::arm1(), {});
  EXPECT_NEAR(p.x, 1.047, 1e-12);
  EXPECT_NEAR(p.y, 0.110, 1e-12);
  EXPECT_NEAR(p.z, 0.221, 1e-12);
}

TEST(ForwardKinematics, ExtensionMovesForwardOnly) {
  const CartesianPoint p = forward_kinematics(ArmParams::arm1(), {0.2, 0.0, 0.0});
  EXPECT_NEAR(p.x, 1.247, 1e-12);
  EXPECT_NEAR(p.y, 0.110, 1e-12);
  EXPECT_NEAR(p.z, 0.221, 1e-12);
}

TEST(ForwardKinematics, Arm2MatchesHighPrecisionEvaluation) {
  // 40-digit evaluation of the closed form at D = 0.1, pitch 10 deg, yaw -5 deg.
  const CartesianPoint p = forward_kinematics(ArmParams::arm2(), {0.1, deg_to_rad(10.0), deg_to_rad(-5.0)});
  EXPECT_NEAR(p.x, 1.128832888476091900635675, 1e-14);
  EXPECT_NEAR(p.y, -0.033431388954584225533323, 1e-14);
  EXPECT_NEAR(p.z, 0.374831866015038754789943, 1e-14);
}

TEST(InverseKinematics, HomeRoundTrip) {
  const IkResult r = inverse_kinematics(ArmParams::arm1(), {1.047, 0.110, 0.221});
  ASSERT_TRUE(std::holds_alternative<JointConfig>(r));
  const auto& q = std::get<JointConfig>(r);
  EXPECT_NEAR(q.d, 0.0, 1e-12);
  EXPECT_NEAR(q.theta, 0.0, 1e-12);
  EXPECT_NEAR(q.phi, 0.0, 1e-12);
}

TEST(InverseKinematics, LateralOverreachFailsAtYawStage) {
  const IkResult r = inverse_kinematics(ArmParams::arm1(), {1.047, 5.0, 0.221});
  ASSERT_TRUE(std::holds_alternative<Unreachable>(r));
  EXPECT_EQ(std::get<Unreachable>(r).stage, IkStage::Phi);
  EXPECT_EQ(std::get<Unreachable>(r).label(), "Unreachable(phi-stage)");
}

TEST(InverseKinematics, EachStageReportsItself) {
  const ArmParams a = ArmParams::arm1();
  auto stage_of = [&](const CartesianPoint& p) { return std::get<Unreachable>(inverse_kinematics(a, p)).stage; };
  EXPECT_EQ(stage_of({1.0, 0.110, 2.0}), IkStage::Theta);
  EXPECT_EQ(stage_of({3.0, 0.110, 0.221}), IkStage::Prismatic);
  EXPECT_EQ(stage_of({0.5, 0.110, 0.221}), IkStage::Prismatic);
}

TEST(InverseKinematics, RejectsNonFiniteTarget) {
  EXPECT_THROW(inverse_kinematics(ArmParams::arm1(), {std::nan(""), 0.0, 0.0}), std::invalid_argument);
}

TEST(InverseKinematics, RoundTripThousandSamplesBothArms) {
  for (const ArmParams& a : {ArmParams::arm1(), ArmParams::arm2()}) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
      const JointConfig q = random_config(a, rng);
      const IkResult r = inverse_kinematics(a, forward_kinematics(a, q));
      ASSERT_TRUE(std::holds_alternative<JointConfig>(r)) << "sample " << i;
      const auto& back = std::get<JointConfig>(r);
      ASSERT_NEAR(back.d, q.d, 1e-9);
      ASSERT_NEAR(back.theta, q.theta, 1e-9);
      ASSERT_NEAR(back.phi, q.phi, 1e-9);
    }
  }
}

TEST(CartesianRates, PureExtension) {
  const CartesianRates v = cartesian_rates(ArmParams::arm1(), {}, {0.5, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(v.x_dot, 0.5);
  EXPECT_DOUBLE_EQ(v.y_dot, 0.0);
  EXPECT_DOUBLE_EQ(v.z_dot, 0.0);
}

TEST(CartesianRates, PureYawAtHome) {
  const CartesianRates v = cartesian_rates(ArmParams::arm1(), {}, {0.0, 0.0, 0.1});
  EXPECT_NEAR(v.x_dot, 0.0, 1e-15);
  EXPECT_NEAR(v.y_dot, -0.09, 1e-15);
  EXPECT_NEAR(v.z_dot, 0.0, 1e-15);
}

TEST(CartesianRates, MatchesCentralDifferenceOfPosition) {
  constexpr double h = 1e-6;
  for (const ArmParams& a : {ArmParams::arm1(), ArmParams::arm2()}) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> rate(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const JointConfig q = random_config(a, rng);
      const JointRates r{rate(rng), rate(rng), rate(rng)};
      auto at = [&](double t) {
        return forward_kinematics(a, {q.d + r.d_dot * t, q.theta + r.theta_dot * t, q.phi + r.phi_dot * t});
      };
      const CartesianPoint fd = (1.0 / (2.0 * h)) * (at(h) - at(-h));
      const CartesianRates v = cartesian_rates(a, q, r);
      ASSERT_NEAR(v.x_dot, fd.x, 1e-6);
      ASSERT_NEAR(v.y_dot, fd.y, 1e-6);
      ASSERT_NEAR(v.z_dot, fd.z, 1e-6);
    }
  }
}

TEST(Workspace, HomeInsideAndLateralOverreachOutside) {
  EXPECT_TRUE(in_workspace(ArmParams::arm1(), {1.047, 0.110, 0.221}));
  EXPECT_FALSE(in_workspace(ArmParams::arm1(), {1.047, 2.0, 0.221}));
}

TEST(Workspace, LimitCornerBoundary) {
  const ArmParams a = ArmParams::arm1();
  const CartesianPoint corner = forward_kinematics(a, {a.d_max, a.theta_max, a.phi_max});
  EXPECT_TRUE(in_workspace(a, corner));
  EXPECT_FALSE(in_workspace(a, corner + CartesianPoint{0.01, 0.0, 0.0}));
}

TEST(Workspace, MembershipMatchesJointSpaceGrid) {
  // Points imaged from inside the limits are members; points imaged from a
  // configuration pushed just outside one limit are not (the map is
  // one-to-one over the pitch branch near the limits).
  for (const ArmParams& a : {ArmParams::arm1(), ArmParams::arm2()}) {
    constexpr int n = 9;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double s = static_cast<double>(i) / (n - 1);
          const double t = static_cast<double>(j) / (n - 1);
          const double u = static_cast<double>(k) / (n - 1);
          const JointConfig q{a.d_min + s * (a.d_max - a.d_min), a.theta_min + t * (a.theta_max - a.theta_min),
                              a.phi_min + u * (a.phi_max - a.phi_min)};
          ASSERT_TRUE(in_workspace(a, forward_kinematics(a, q)));
          for (const JointConfig& out :
               {JointConfig{a.d_max + 0.01, q.theta, q.phi}, JointConfig{a.d_min - 0.01, q.theta, q.phi},
                JointConfig{q.d, a.theta_max + 0.01, q.phi}, JointConfig{q.d, a.theta_min - 0.01, q.phi},
                JointConfig{q.d, q.theta, a.phi_max + 0.01}, JointConfig{q.d, q.theta, a.phi_min - 0.01}}) {
            ASSERT_FALSE(in_workspace(a, forward_kinematics(a, out)));
          }
        }
      }
    }
  }
}

TEST(Workspace, ArmsAreNotInterchangeable) {
  const ArmParams a1 = ArmParams::arm1();
  const ArmParams a2 = ArmParams::arm2();
  ASSERT_FALSE(a1 == a2);
  std::mt19937_64 rng(3);
  int differ = 0;
  for (int i = 0; i < 200; ++i) {
    const CartesianPoint p = forward_kinematics(a1, random_config(a1, rng));
    if (in_workspace(a1, p) != in_workspace(a2, p)) ++differ;
  }
  EXPECT_GT(differ, 0);
}

TEST(ReachDistance, InfiniteOutsideWorkspace) {
  const ArmParams a = ArmParams::arm1();
  const CartesianPoint home = forward_kinematics(a, {});
  EXPECT_TRUE(std::isinf(reach_distance(a, home, {1.047, 2.0, 0.221})));
  EXPECT_NEAR(reach_distance(a, home, forward_kinematics(a, {0.3, 0.0, 0.0})), 0.3, 1e-12);
}

TEST(ArmParams, ValidateRejectsBadGeometry) {
  ArmParams a = ArmParams::arm1();
  EXPECT_NO_THROW(a.validate());
  a.x2 = 0.0;
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a = ArmParams::arm1();
  a.phi_max = deg_to_rad(95.0);
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a = ArmParams::arm1();
  a.d_min = a.d_max;
  EXPECT_THROW(a.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace harvest
