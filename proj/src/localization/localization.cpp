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

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace harvest {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool lex_less(const CartesianPoint& a, const CartesianPoint& b) {
  return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
}

double dot(const CartesianPoint& a, const CartesianPoint& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

CartesianPoint cross(const CartesianPoint& a, const CartesianPoint& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

CartesianPoint unit(const CartesianPoint& v) { return (1.0 / v.norm()) * v; }

// Orthonormal pair spanning the plane perpendicular to a unit vector.
std::pair<CartesianPoint, CartesianPoint> tangent_basis(const CartesianPoint& axis) {
  const CartesianPoint helper = std::abs(axis.x) < 0.9 ? CartesianPoint{1, 0, 0} : CartesianPoint{0, 1, 0};
  const CartesianPoint u = unit(cross(axis, helper));
  return {u, cross(axis, u)};
}

// Evenly spread unit normals over the hemisphere around `axis`.
std::vector<CartesianPoint> hemisphere_normals(const CartesianPoint& axis, std::size_t n) {
  const auto [u, w] = tangent_basis(axis);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<CartesianPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double s = std::sqrt(1.0 - h * h);
    const double psi = golden * static_cast<double>(i);
    out.push_back(h * axis + s * std::cos(psi) * u + s * std::sin(psi) * w);
  }
  return out;
}

// Nearest forward intersection of a unit ray from the origin with a sphere.
std::optional<double> ray_sphere(const CartesianPoint& dir, const CartesianPoint& center, double radius) {
  const double b = dot(dir, center);
  const double disc = b * b - dot(center, center) + radius * radius;
  if (disc < 0.0) return std::nullopt;
  const double t = b - std::sqrt(disc);
  if (t <= 0.0) return std::nullopt;
  return t;
}

}  // namespace

void DbscanParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("dbscan eps must be positive");
  if (min_pts < 1) throw std::invalid_argument("dbscan min_pts must be at least 1");
}

std::vector<int> dbscan(const std::vector<CartesianPoint>& points, const DbscanParams& params) {
  return dbscan(points, params, active_kernel());
}

std::vector<int> dbscan(const std::vector<CartesianPoint>& points, const DbscanParams& params,
                        SquaredDistanceKernel kernel) {
  params.validate();
  const std::size_t n = points.size();
  std::vector<double> xs(n), ys(n), zs(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i].finite()) throw std::invalid_argument("dbscan: non-finite point");
    xs[i] = points[i].x;
    ys[i] = points[i].y;
    zs[i] = points[i].z;
  }

  const double eps2 = params.eps * params.eps;
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel(xs.data(), ys.data(), zs.data(), n, xs[i], ys[i], zs[i], d2.data());
    for (std::size_t j = 0; j < n; ++j) {
      if (d2[j] <= eps2) neighbours[i].push_back(j);
    }
  }

  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbours[i].size() >= params.min_pts;

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (std::size_t j : neighbours[i]) {
      if (core[j]) sets.unite(i, j);
    }
  }

  // Canonical numbering by each component's smallest core point.
  std::map<std::size_t, std::size_t> smallest;  // root -> index of smallest core point
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const std::size_t root = sets.find(i);
    auto [it, inserted] = smallest.try_emplace(root, i);
    if (!inserted && lex_less(points[i], points[it->second])) it->second = i;
  }
  std::vector<std::pair<std::size_t, std::size_t>> order(smallest.begin(), smallest.end());
  std::sort(order.begin(), order.end(),
            [&](const auto& a, const auto& b) { return lex_less(points[a.second], points[b.second]); });
  std::map<std::size_t, int> id_of_root;
  for (std::size_t k = 0; k < order.size(); ++k) id_of_root[order[k].first] = static_cast<int>(k);

  std::vector<int> labels(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      labels[i] = id_of_root[sets.find(i)];
      continue;
    }
    for (std::size_t j : neighbours[i]) {
      if (!core[j]) continue;
      const int id = id_of_root[sets.find(j)];
      if (labels[i] == kNoise || id < labels[i]) labels[i] = id;
    }
  }
  return labels;
}

EstimateResult estimate_position(const SegmentedObservation& obs, const DbscanParams& params) {
  if (obs.points.empty()) throw std::invalid_argument("estimate_position: observation has no points");
  if (!(obs.bbox_center_point.z > 0.0)) throw std::invalid_argument("estimate_position: box centre depth must be positive");

  const std::vector<int> labels = dbscan(obs.points, params);
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (clusters == 0) {
    return NoCluster{"all " + std::to_string(obs.points.size()) + " points are noise"};
  }

  std::vector<std::size_t> size(clusters, 0);
  std::vector<double> depth_sum(clusters, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kNoise) continue;
    ++size[labels[i]];
    depth_sum[labels[i]] += obs.points[i].z;
  }
  int best = 0;
  for (int c = 1; c < clusters; ++c) {
    const double mean_c = depth_sum[c] / static_cast<double>(size[c]);
    const double mean_best = depth_sum[best] / static_cast<double>(size[best]);
    if (size[c] > size[best] || (size[c] == size[best] && mean_c < mean_best)) best = c;
  }

  AppleEstimate est;
  est.cluster_size = size[best];
  est.depth = depth_sum[best] / static_cast<double>(size[best]);
  const double scale = est.depth / obs.bbox_center_point.z;
  est.position = {scale * obs.bbox_center_point.x, scale * obs.bbox_center_point.y, est.depth};
  return est;
}

SegmentedObservation synthesize_observation(const ObservationSpec& spec, std::uint64_t seed) {
  if (!(spec.radius > 0.0)) throw std::invalid_argument("apple radius must be positive");
  if (!spec.center.finite() || !(spec.center.z > spec.radius)) {
    throw std::invalid_argument("apple must lie in front of the camera");
  }
  if (!(spec.occlusion >= 0.0 && spec.occlusion <= 1.0)) throw std::invalid_argument("occlusion must be in [0, 1]");
  if (spec.points == 0) throw std::invalid_argument("point budget must be positive");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> unit_interval(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // All draws happen up front and in a fixed order so that toggling one
  // option does not reshuffle the others.
  const double occ_angle = angle(rng);
  const double split_angle = angle(rng);
  const double split_offset = 0.3 * unit_interval(rng);
  const double jitter_u = gauss(rng);
  const double jitter_v = gauss(rng);

  const CartesianPoint& c = spec.center;
  const double dist = c.norm();
  const CartesianPoint toward_camera = (-1.0 / dist) * c;
  const auto [u, w] = tangent_basis(toward_camera);

  SegmentedObservation obs;
  obs.truth_position = (1.0 - spec.radius / (2.0 * dist)) * c;

  std::vector<CartesianPoint> normals = hemisphere_normals(toward_camera, spec.points);

  if (spec.occlusion > 0.0) {
    const CartesianPoint occ_dir = std::cos(occ_angle) * u + std::sin(occ_angle) * w;
    std::stable_sort(normals.begin(), normals.end(), [&](const CartesianPoint& a, const CartesianPoint& b) {
      return dot(a, occ_dir) > dot(b, occ_dir);
    });
    const auto hidden = static_cast<std::size_t>(std::llround(spec.occlusion * static_cast<double>(normals.size())));
    normals.erase(normals.begin(), normals.begin() + static_cast<std::ptrdiff_t>(std::min(hidden, normals.size())));
  }
  if (spec.leaf_split) {
    const CartesianPoint split_dir = std::cos(split_angle) * u + std::sin(split_angle) * w;
    std::erase_if(normals, [&](const CartesianPoint& n) { return std::abs(dot(n, split_dir) - split_offset) < 0.25; });
  }
  if (normals.empty()) return obs;

  for (const CartesianPoint& n : normals) obs.points.push_back(c + spec.radius * n);

  if (spec.neighbour_center) {
    const CartesianPoint& c2 = *spec.neighbour_center;
    const CartesianPoint toward2 = (-1.0 / c2.norm()) * c2;
    for (const CartesianPoint& n : hemisphere_normals(toward2, spec.points / 2)) {
      const CartesianPoint p = c2 + spec.radius * n;
      if (distance(p, c) < 1.6 * spec.radius) obs.points.push_back(p);
    }
  }

  const double sigma = spec.noise_sigma < 0.0 ? default_depth_sigma(c.z) : spec.noise_sigma;
  if (sigma > 0.0) {
    for (CartesianPoint& p : obs.points) p.z += sigma * gauss(rng);
  }

  double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
  double v_min = u_min, v_max = -u_min;
  for (const CartesianPoint& p : obs.points) {
    u_min = std::min(u_min, p.x / p.z);
    u_max = std::max(u_max, p.x / p.z);
    v_min = std::min(v_min, p.y / p.z);
    v_max = std::max(v_max, p.y / p.z);
  }
  const double uc = 0.5 * (u_min + u_max) + spec.bbox_jitter / c.z * jitter_u;
  const double vc = 0.5 * (v_min + v_max) + spec.bbox_jitter / c.z * jitter_v;
  const CartesianPoint ray = unit(CartesianPoint{uc, vc, 1.0});
  std::optional<double> hit = ray_sphere(ray, c, spec.radius);
  if (spec.neighbour_center) {
    const std::optional<double> hit2 = ray_sphere(ray, *spec.neighbour_center, spec.radius);
    if (hit2 && (!hit || *hit2 < *hit)) hit = hit2;
  }
  // Only the pixel matters to the estimate; a miss falls back to centre depth.
  const double t = hit ? *hit : c.z / ray.z;
  obs.bbox_center_point = t * ray;
  return obs;
}

SegmentedObservation read_point_cloud(std::istream& in) {
  SegmentedObservation obs;
  bool have_bbox = false;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("point cloud line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (line.front() == '#') {
      std::string hash, key;
      ls >> hash >> key;
      CartesianPoint p;
      if (!(ls >> p.x >> p.y >> p.z)) fail("header needs three numbers");
      if (key == "bbox_center") {
        obs.bbox_center_point = p;
        have_bbox = true;
      } else if (key == "truth") {
        obs.truth_position = p;
      } else {
        fail("unknown header key '" + key + "'");
      }
      continue;
    }
    CartesianPoint p;
    std::string extra;
    if (!(ls >> p.x >> p.y >> p.z) || (ls >> extra)) fail("expected exactly 'x y z'");
    if (!p.finite()) fail("non-finite coordinate");
    obs.points.push_back(p);
  }
  if (!have_bbox) throw std::invalid_argument("point cloud is missing the '# bbox_center' header");
  return obs;
}

void write_point_cloud(std::ostream& out, const SegmentedObservation& obs) {
  const auto old_precision = out.precision(17);
  out << "# bbox_center " << obs.bbox_center_point.x << ' ' << obs.bbox_center_point.y << ' '
      << obs.bbox_center_point.z << '\n';
  out << "# truth " << obs.truth_position.x << ' ' << obs.truth_position.y << ' ' << obs.truth_position.z << '\n';
  for (const CartesianPoint& p : obs.points) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  out.precision(old_precision);
}

}  // namespace harvest
