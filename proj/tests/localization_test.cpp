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

#include "harvest/localization.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "dbscan_oracle.hpp"

namespace harvest {
namespace {

TEST(Dbscan, DenseBlobIsOneCluster) {
  const std::vector<CartesianPoint> pts{{0, 0, 0}, {0.001, 0, 0}, {0, 0.001, 0}, {0, 0, 0.001}, {0.001, 0.001, 0}};
  const auto labels = dbscan(pts, {0.01, 3});
  for (int l : labels) EXPECT_EQ(l, 0);
}

TEST(Dbscan, IsolatedPointIsNoise) {
  const auto labels = dbscan({{1, 2, 3}}, {0.01, 2});
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0], kNoise);
}

TEST(Dbscan, NeighbourhoodIsInclusiveAndCountsSelf) {
  // Two points exactly eps apart, min_pts 2: both core.
  const auto labels = dbscan({{0, 0, 0}, {0.5, 0, 0}}, {0.5, 2});
  EXPECT_EQ(labels, (std::vector<int>{0, 0}));
  EXPECT_EQ(dbscan({{0, 0, 0}}, {0.5, 1}), std::vector<int>{0});
}

TEST(Dbscan, BorderPointJoinsLowestCanonicalCluster) {
  // Chains at x = 0 and x = 1 with a border point halfway between.
  std::vector<CartesianPoint> pts{{0.5, 0, 0}};
  for (int i = 0; i < 4; ++i) pts.push_back({0.1 - 0.03 * i, 0, 0});
  for (int i = 0; i < 4; ++i) pts.push_back({0.9 + 0.03 * i, 0, 0});
  const auto labels = dbscan(pts, {0.4, 4});
  EXPECT_EQ(labels[1], 0);
  EXPECT_EQ(labels[5], 1);
  EXPECT_EQ(labels[0], 0);
}

TEST(Dbscan, RejectsBadInput) {
  EXPECT_THROW(dbscan({{0, 0, 0}}, {0.0, 2}), std::invalid_argument);
  EXPECT_THROW(dbscan({{0, 0, 0}}, {0.1, 0}), std::invalid_argument);
  EXPECT_THROW(dbscan({{std::nan(""), 0, 0}}, {0.1, 2}), std::invalid_argument);
  EXPECT_TRUE(dbscan({}, {0.1, 2}).empty());
}

TEST(Dbscan, TwoBlobsWithOutliersMatchOracle) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> blob(0.0, 0.01);
  std::uniform_real_distribution<double> wide(-0.5, 0.5);
  std::vector<CartesianPoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({blob(rng), blob(rng), 1.0 + blob(rng)});
  for (int i = 0; i < 30; ++i) pts.push_back({0.3 + blob(rng), blob(rng), 1.0 + blob(rng)});
  for (int i = 0; i < 5; ++i) pts.push_back({wide(rng), wide(rng), 2.0 + wide(rng)});
  const DbscanParams p{0.02, 4};
  const auto labels = dbscan(pts, p);
  EXPECT_TRUE(testing::labels_match_oracle(pts, p, labels));
  EXPECT_EQ(*std::max_element(labels.begin(), labels.end()), 1);
  for (int i = 60; i < 65; ++i) EXPECT_EQ(labels[i], kNoise);
}

TEST(Dbscan, RandomInstancesMatchOracleAndIgnoreOrder) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = testing::random_instance(rng, 200);
    const DbscanParams p = testing::random_params(rng);
    const auto labels = dbscan(pts, p);
    ASSERT_TRUE(testing::labels_match_oracle(pts, p, labels)) << "trial " << trial;

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<CartesianPoint> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    const auto relabelled = dbscan(shuffled, p);
    for (std::size_t k = 0; k < perm.size(); ++k) ASSERT_EQ(relabelled[k], labels[perm[k]]) << "trial " << trial;
  }
}

TEST(DistanceKernel, VariantsAreBitIdenticalToScalar) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (SimdLevel level : {SimdLevel::Avx2, SimdLevel::Neon}) {
    if (!simd_level_available(level)) {
      EXPECT_THROW(kernel_for(level), std::invalid_argument);
      continue;
    }
    const SquaredDistanceKernel k = kernel_for(level);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 256u, 1001u}) {
      std::vector<double> xs(n), ys(n), zs(n), a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = u(rng);
        ys[i] = u(rng);
        zs[i] = u(rng);
      }
      const double qx = u(rng), qy = u(rng), qz = u(rng);
      squared_distances_scalar(xs.data(), ys.data(), zs.data(), n, qx, qy, qz, a.data());
      k(xs.data(), ys.data(), zs.data(), n, qx, qy, qz, b.data());
      ASSERT_EQ(0, n == 0 ? 0 : std::memcmp(a.data(), b.data(), n * sizeof(double))) << to_string(level) << " n=" << n;
    }
  }
}

TEST(DistanceKernel, DbscanLabelsAgreeAcrossKernels) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = testing::random_instance(rng, 200);
    const DbscanParams p = testing::random_params(rng);
    const auto ref = dbscan(pts, p, &squared_distances_scalar);
    EXPECT_EQ(dbscan(pts, p, active_kernel()), ref);
  }
}

TEST(EstimatePosition, ScalesBoxCentreToClusterDepth) {
  SegmentedObservation obs;
  obs.bbox_center_point = {0.2, 0.1, 1.0};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) obs.points.push_back({0.2 + 0.002 * i, 0.1 + 0.002 * j, (i + j) % 2 ? 0.901 : 0.899});
  }
  obs.points.push_back({0.2, 0.1, 0.9});
  const auto r = estimate_position(obs, {});
  ASSERT_TRUE(std::holds_alternative<AppleEstimate>(r));
  const auto& e = std::get<AppleEstimate>(r);
  EXPECT_NEAR(e.depth, 0.9, 1e-4);
  EXPECT_NEAR(e.position.x, 0.2 * e.depth, 1e-15);
  EXPECT_NEAR(e.position.y, 0.1 * e.depth, 1e-15);
  EXPECT_EQ(e.position.z, e.depth);
}

TEST(EstimatePosition, ExactDepthGivesExactPosition) {
  SegmentedObservation obs;
  obs.bbox_center_point = {0.2, 0.1, 1.0};
  for (int i = 0; i < 10; ++i) obs.points.push_back({0.2 + 0.001 * i, 0.1, 0.9});
  const auto e = std::get<AppleEstimate>(estimate_position(obs, {}));
  EXPECT_NEAR(e.position.x, 0.18, 1e-15);
  EXPECT_NEAR(e.position.y, 0.09, 1e-15);
  EXPECT_DOUBLE_EQ(e.position.z, 0.9);
  EXPECT_EQ(e.cluster_size, 10u);
}

TEST(EstimatePosition, AllNoiseIsNoCluster) {
  SegmentedObservation obs;
  obs.bbox_center_point = {0, 0, 1};
  obs.points = {{0, 0, 1}, {0.5, 0, 1}, {0, 0.5, 1}};
  EXPECT_TRUE(std::holds_alternative<NoCluster>(estimate_position(obs, {})));
  obs.points.clear();
  EXPECT_THROW(estimate_position(obs, {}), std::invalid_argument);
}

TEST(EstimatePosition, EqualClustersPreferNearer) {
  SegmentedObservation obs;
  obs.bbox_center_point = {0, 0, 1};
  for (int i = 0; i < 10; ++i) obs.points.push_back({0.001 * i, 0, 1.2});
  for (int i = 0; i < 10; ++i) obs.points.push_back({0.001 * i, 0, 0.7});
  EXPECT_DOUBLE_EQ(std::get<AppleEstimate>(estimate_position(obs, {})).depth, 0.7);
}

TEST(EstimatePosition, FragmentedAppleFixtureUsesFrontCluster) {
  std::ifstream in(HARVEST_FIXTURE_DIR "/fragmented_apple.xyz");
  ASSERT_TRUE(in) << "fixture missing";
  const SegmentedObservation obs = read_point_cloud(in);
  ASSERT_EQ(obs.points.size(), 110u);
  const auto labels = dbscan(obs.points, {});
  const std::set<int> ids(labels.begin(), labels.end());
  EXPECT_EQ(ids.size(), 2u);
  const auto e = std::get<AppleEstimate>(estimate_position(obs, {}));
  EXPECT_EQ(e.cluster_size, 80u);
  EXPECT_NEAR(e.depth, 0.82, 1e-12);
  EXPECT_NEAR(e.position.x, 0.05125, 1e-12);
  EXPECT_NEAR(e.position.y, -0.0205, 1e-12);
  EXPECT_LT(distance(e.position, obs.truth_position), 1e-9);
}

TEST(PointCloudFixture, RoundTripAndErrors) {
  const SegmentedObservation obs = synthesize_observation({{0.1, 0.0, 1.1}}, 9);
  std::stringstream ss;
  write_point_cloud(ss, obs);
  const SegmentedObservation back = read_point_cloud(ss);
  EXPECT_EQ(back.points, obs.points);
  EXPECT_EQ(back.bbox_center_point, obs.bbox_center_point);
  EXPECT_EQ(back.truth_position, obs.truth_position);

  std::istringstream no_header("0 0 1\n");
  EXPECT_THROW(read_point_cloud(no_header), std::invalid_argument);
  std::istringstream bad("# bbox_center 0 0 1\n0 0\n");
  try {
    read_point_cloud(bad);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Synthesis, NoiselessUnoccludedIsSubMillimetre) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> lat(-0.4, 0.4), dep(0.9, 1.5);
  for (int i = 0; i < 50; ++i) {
    ObservationSpec spec;
    spec.center = {lat(rng), lat(rng), dep(rng)};
    spec.noise_sigma = 0.0;
    const SegmentedObservation obs = synthesize_observation(spec, i);
    const auto e = std::get<AppleEstimate>(estimate_position(obs, {}));
    ASSERT_LT(distance(e.position, obs.truth_position), 1e-3) << "i=" << i;
  }
}

TEST(Synthesis, DefaultNoiseStaysWithinSuctionTolerance) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> lat(-0.4, 0.4), dep(0.9, 1.5);
  for (int i = 0; i < 200; ++i) {
    ObservationSpec spec;
    spec.center = {lat(rng), lat(rng), dep(rng)};
    const SegmentedObservation obs = synthesize_observation(spec, 1000 + i);
    const auto r = estimate_position(obs, {});
    ASSERT_TRUE(std::holds_alternative<AppleEstimate>(r)) << "i=" << i;
    ASSERT_LE(distance(std::get<AppleEstimate>(r).position, obs.truth_position), 0.015) << "i=" << i;
  }
}

TEST(Synthesis, FullyOccludedIsEmpty) {
  ObservationSpec spec;
  spec.center = {0, 0, 1};
  spec.occlusion = 1.0;
  EXPECT_TRUE(synthesize_observation(spec, 1).points.empty());
}

TEST(Synthesis, OcclusionRemovesThatShare) {
  ObservationSpec spec;
  spec.center = {0, 0, 1};
  spec.occlusion = 0.4;
  EXPECT_EQ(synthesize_observation(spec, 1).points.size(), 300u);
}

TEST(Synthesis, SameSeedIsBitIdentical) {
  ObservationSpec spec;
  spec.center = {0.1, -0.2, 1.2};
  spec.occlusion = 0.3;
  spec.leaf_split = true;
  spec.bbox_jitter = 0.01;
  const auto a = synthesize_observation(spec, 77);
  const auto b = synthesize_observation(spec, 77);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.bbox_center_point, b.bbox_center_point);
  EXPECT_NE(synthesize_observation(spec, 78).points, a.points);
}

TEST(Synthesis, LeafSplitFragmentsTheCap) {
  int split = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ObservationSpec spec;
    spec.center = {0, 0, 1.0};
    spec.noise_sigma = 0.0;
    spec.leaf_split = true;
    const auto obs = synthesize_observation(spec, seed);
    const auto labels = dbscan(obs.points, {});
    if (*std::max_element(labels.begin(), labels.end()) >= 1) ++split;
  }
  EXPECT_GT(split, 10);
}

TEST(Synthesis, TouchingNeighbourMergesAndBiasesEstimate) {
  ObservationSpec spec;
  spec.center = {0, 0, 1.0};
  spec.neighbour_center = CartesianPoint{0.08, 0.0, 1.0};
  spec.noise_sigma = 0.0;
  const auto obs = synthesize_observation(spec, 3);
  EXPECT_GT(obs.points.size(), 500u);
  const auto e = std::get<AppleEstimate>(estimate_position(obs, {}));
  EXPECT_GT(distance(e.position, obs.truth_position), 0.005);
}

TEST(Synthesis, RejectsBadSpec) {
  ObservationSpec spec;
  spec.center = {0, 0, 0.01};
  EXPECT_THROW(synthesize_observation(spec, 1), std::invalid_argument);
  spec.center = {0, 0, 1};
  spec.radius = 0;
  EXPECT_THROW(synthesize_observation(spec, 1), std::invalid_argument);
  spec.radius = 0.04;
  spec.occlusion = 1.5;
  EXPECT_THROW(synthesize_observation(spec, 1), std::invalid_argument);
}

TEST(CameraPose, RoundTripAndAxes) {
  const CameraPose cam;
  const CartesianPoint r{1.2, 0.3, 0.5};
  const CartesianPoint c = cam.to_camera(r);
  EXPECT_NEAR(c.z, 1.2 - cam.origin.x, 1e-15);
  EXPECT_LT(c.x, 0.0);  // robot +y (left) is image left
  const CartesianPoint back = cam.to_robot(c);
  EXPECT_NEAR(distance(back, r), 0.0, 1e-15);
}

}  // namespace
}  // namespace harvest
