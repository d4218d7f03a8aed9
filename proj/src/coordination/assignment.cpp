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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "harvest/coordination.hpp"

namespace harvest {
namespace {

double lateral_offset(const ArmParams& p) { return p.y0 + p.y1; }

void sort_by_depth(std::vector<std::size_t>& ids, const std::vector<CartesianPoint>& apples) {
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    if (apples[a].x != apples[b].x) return apples[a].x < apples[b].x;
    return a < b;
  });
}

}  // namespace

Assignment assign_apples(const std::vector<CartesianPoint>& apples, const ArmParams& arm1, const ArmParams& arm2,
                         const CartesianPoint& ee1, const CartesianPoint& ee2) {
  Assignment out;
  std::vector<std::size_t> shared;
  for (std::size_t i = 0; i < apples.size(); ++i) {
    if (!apples[i].finite()) throw std::invalid_argument("apple positions must be finite");
    const bool r1 = std::isfinite(reach_distance(arm1, ee1, apples[i]));
    const bool r2 = std::isfinite(reach_distance(arm2, ee2, apples[i]));
    if (r1 && r2) {
      shared.push_back(i);
    } else if (r1) {
      out.arm1.push_back(i);
    } else if (r2) {
      out.arm2.push_back(i);
    } else {
      out.discarded.push_back(i);
    }
  }

  // Most arm-1-leaning first; arm 1 takes a prefix.
  const double y1 = lateral_offset(arm1), y2 = lateral_offset(arm2);
  auto lean = [&](std::size_t i) { return std::abs(apples[i].y - y1) - std::abs(apples[i].y - y2); };
  std::stable_sort(shared.begin(), shared.end(), [&](std::size_t a, std::size_t b) {
    const double la = lean(a), lb = lean(b);
    if (la != lb) return la < lb;
    return a < b;
  });

  const std::size_t total = out.arm1.size() + out.arm2.size() + shared.size();
  const std::size_t want1 = (total + 1) / 2;
  const std::size_t take =
      want1 > out.arm1.size() ? std::min(shared.size(), want1 - out.arm1.size()) : std::size_t{0};
  out.arm1.insert(out.arm1.end(), shared.begin(), shared.begin() + static_cast<std::ptrdiff_t>(take));
  out.arm2.insert(out.arm2.end(), shared.begin() + static_cast<std::ptrdiff_t>(take), shared.end());

  sort_by_depth(out.arm1, apples);
  sort_by_depth(out.arm2, apples);
  return out;
}

}  // namespace harvest
