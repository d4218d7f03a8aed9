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

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "harvest/distance_kernel.hpp"

namespace harvest {

#if defined(HARVEST_HAVE_AVX2)
void squared_distances_avx2(const double*, const double*, const double*, std::size_t, double, double, double,
                            double*);
#endif
#if defined(HARVEST_HAVE_NEON)
void squared_distances_neon(const double*, const double*, const double*, std::size_t, double, double, double,
                            double*);
#endif

const char* to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return "scalar";
    case SimdLevel::Avx2:
      return "avx2";
    case SimdLevel::Neon:
      return "neon";
  }
  return "unknown";
}

bool simd_level_available(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return true;
    case SimdLevel::Avx2:
#if defined(HARVEST_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case SimdLevel::Neon:
#if defined(HARVEST_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

SquaredDistanceKernel kernel_for(SimdLevel level) {
  if (!simd_level_available(level)) {
    throw std::invalid_argument(std::string("SIMD level not available: ") + to_string(level));
  }
  switch (level) {
#if defined(HARVEST_HAVE_AVX2)
    case SimdLevel::Avx2:
      return &squared_distances_avx2;
#endif
#if defined(HARVEST_HAVE_NEON)
    case SimdLevel::Neon:
      return &squared_distances_neon;
#endif
    default:
      return &squared_distances_scalar;
  }
}

SimdLevel active_simd_level() {
  static const SimdLevel level = [] {
    const char* forced = std::getenv("HARVEST_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return SimdLevel::Scalar;
    if (simd_level_available(SimdLevel::Avx2)) return SimdLevel::Avx2;
    if (simd_level_available(SimdLevel::Neon)) return SimdLevel::Neon;
    return SimdLevel::Scalar;
  }();
  return level;
}

SquaredDistanceKernel active_kernel() { return kernel_for(active_simd_level()); }

}  // namespace harvest
