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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "harvest/arm_model.hpp"
#include "harvest/distance_kernel.hpp"

namespace harvest {

struct DbscanParams {
  double eps = 0.015;        // m
  std::size_t min_pts = 8;   // neighbours within eps, self included
  void validate() const;
};

inline constexpr int kNoise = -1;

/// Density clustering. Labels are kNoise or a cluster id in [0, k). Ids are
/// canonical: clusters are numbered by their lexicographically smallest core
/// point, so relabelling never depends on input order. A border point that
/// touches several clusters joins the lowest id.
std::vector<int> dbscan(const std::vector<CartesianPoint>& points, const DbscanParams& params);
std::vector<int> dbscan(const std::vector<CartesianPoint>& points, const DbscanParams& params,
                        SquaredDistanceKernel kernel);

/// Points attributed to one detection, in the camera frame (z is depth).
struct SegmentedObservation {
  std::vector<CartesianPoint> points;
  /// Surface point seen through the centre pixel of the detection box.
  CartesianPoint bbox_center_point;
  /// Generator truth; not used by estimation.
  CartesianPoint truth_position;
};

struct AppleEstimate {
  CartesianPoint position;  // camera frame
  std::size_t cluster_size = 0;
  double depth = 0.0;       // mean depth of the chosen cluster
};

struct NoCluster {
  std::string detail;
};

using EstimateResult = std::variant<AppleEstimate, NoCluster>;

/// Largest cluster (ties go to the nearer centroid) gives the depth z_d; the
/// box-centre point is scaled along its ray to that depth.
/// Throws std::invalid_argument on an empty observation.
EstimateResult estimate_position(const SegmentedObservation& obs, const DbscanParams& params);

/// Default depth noise: 4 mm plus 0.25% of depth.
constexpr double default_depth_sigma(double depth) { return 0.004 + 0.0025 * depth; }

/// Inputs of the synthetic perception stand-in. Positions are camera frame.
struct ObservationSpec {
  CartesianPoint center;
  double radius = 0.04;
  /// Fraction of the visible cap hidden behind foliage, in [0, 1].
  double occlusion = 0.0;
  /// Depth noise standard deviation; negative selects default_depth_sigma.
  double noise_sigma = -1.0;
  /// A leaf strip splits the visible cap into two fragments.
  bool leaf_split = false;
  /// A touching neighbour whose facing side leaks into the mask.
  std::optional<CartesianPoint> neighbour_center;
  /// Standard deviation of the detection-box centre error in the image, as
  /// a lateral offset in metres at the apple's depth.
  double bbox_jitter = 0.0;
  std::size_t points = 500;
};

/// Deterministic in (spec, seed). A fully occluded apple yields no points.
/// truth_position is the surface-centre picking point: on the ray through the
/// apple centre, half a radius in front of it.
SegmentedObservation synthesize_observation(const ObservationSpec& spec, std::uint64_t seed);

/// Rigid camera mount looking along the robot's +x axis. Camera axes: x
/// right, y down, z forward; robot axes: x forward, y left, z up.
struct CameraPose {
  CartesianPoint origin{0.05, 0.0, 0.35};

  CartesianPoint to_robot(const CartesianPoint& cam) const {
    return {origin.x + cam.z, origin.y - cam.x, origin.z - cam.y};
  }
  CartesianPoint to_camera(const CartesianPoint& robot) const {
    const CartesianPoint d = robot - origin;
    return {-d.y, -d.z, d.x};
  }
};

/// Fixture format: optional header lines "# bbox_center x y z" and
/// "# truth x y z", then one whitespace-separated "x y z" point per line.
/// Throws std::invalid_argument with the offending line number.
SegmentedObservation read_point_cloud(std::istream& in);
void write_point_cloud(std::ostream& out, const SegmentedObservation& obs);

}  // namespace harvest
