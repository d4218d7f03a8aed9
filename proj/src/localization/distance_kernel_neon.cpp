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

#include <arm_neon.h>

#include <cstddef>

namespace harvest {

void squared_distances_neon(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                            double qy, double qz, double* out) {
  const float64x2_t vx = vdupq_n_f64(qx);
  const float64x2_t vy = vdupq_n_f64(qy);
  const float64x2_t vz = vdupq_n_f64(qz);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vy);
    const float64x2_t dz = vsubq_f64(vld1q_f64(zs + i), vz);
    // Separate multiply and add: vfmaq would round differently from scalar.
    const float64x2_t xy = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    vst1q_f64(out + i, vaddq_f64(xy, vmulq_f64(dz, dz)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

}  // namespace harvest
