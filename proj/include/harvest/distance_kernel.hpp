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

namespace harvest {

/// Squared distance from (qx, qy, qz) to n points held as separate coordinate
/// arrays. Every variant evaluates (dx*dx + dy*dy) + dz*dz without fused
/// multiply-add, so all of them produce bit-identical output.
using SquaredDistanceKernel = void (*)(const double* xs, const double* ys, const double* zs, std::size_t n,
                                       double qx, double qy, double qz, double* out);

enum class SimdLevel { Scalar, Avx2, Neon };

const char* to_string(SimdLevel level);

void squared_distances_scalar(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                              double qy, double qz, double* out);

/// True when `level` was compiled in and the running CPU supports it.
bool simd_level_available(SimdLevel level);

/// Kernel for `level`; throws std::invalid_argument when unavailable.
SquaredDistanceKernel kernel_for(SimdLevel level);

/// Best available level, unless HARVEST_SIMD=scalar forces the reference path.
/// Resolved once per process.
SimdLevel active_simd_level();

SquaredDistanceKernel active_kernel();

}  // namespace harvest
