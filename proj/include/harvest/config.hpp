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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "harvest/harvest_sim.hpp"

namespace harvest {

/// Invalid or unreadable scenario document. The message names the offending
/// key or path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line values that take precedence over the document.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<Strategy> strategy;
  /// Switches to uniform failures at this per-attempt rate.
  std::optional<double> failure_p;
};

/// Validated scenario document:
///   {"arms": {"arm1": {...}, "arm2": {...}}, "scenario": {...}}
/// Arm blocks use the tabulated form (metres, joint limits in degrees).
/// Unknown keys anywhere are rejected.
class ScenarioConfig {
 public:
  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig load(const std::string& path);

  Scenario build(const ConfigOverrides& overrides = {}) const;

  /// FNV-1a over the canonical document with overrides applied and the seed
  /// dropped, so runs that differ only by seed share a hash.
  std::uint64_t hash(const ConfigOverrides& overrides = {}) const;

  const std::string& canonical() const { return canonical_; }

 private:
  std::string canonical_;
};

std::string hash_hex(std::uint64_t hash);

}  // namespace harvest
