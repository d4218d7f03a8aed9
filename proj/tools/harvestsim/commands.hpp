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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "harvest/config.hpp"

namespace harvest::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // the work ran and found a problem
inline constexpr int kExitUsage = 2;    // bad arguments, config or input file

/// Scenario document used when no file is given.
inline constexpr const char* kDefaultScenario = R"({"scenario": {"preset": "calibration"}})";

/// Loads the scenario file, or the default document for an empty path.
ScenarioConfig load_config(const std::string& path);

/// HARVEST_OUT_DIR when set, else "harvest-out".
std::filesystem::path default_output_dir();

struct RunOptions {
  std::string scenario_path;
  ConfigOverrides overrides;
  std::filesystem::path output_dir;
};

/// Writes report.json, trace.jsonl, pressure.csv, tracking_arm1.csv and
/// tracking_arm2.csv, then prints the summary table.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct SweepGrid {
  std::vector<Strategy> strategies;
  /// Empty: keep the document's failure model ("-" in the csv).
  std::vector<double> failure_rates;
  std::vector<std::uint64_t> seeds;

  std::size_t cells() const;
};

struct SweepOptions {
  std::string scenario_path;
  SweepGrid grid;
  std::filesystem::path output;  // csv file; "-" writes to the output stream
};

inline constexpr const char* kSweepHeader =
    "strategy,failure_p,seed,config_hash,status,attempted,succeeded,success_rate,first_attempt_share,"
    "mean_cycle_time,pick_time_mean,pick_time_sd,time_per_apple,makespan,error";

/// One csv row per strategy x failure rate x seed cell. A cell that throws is
/// recorded with status "error" and the sweep moves on.
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

/// Runs the monitor over a trace file and prints the verdict.
int cmd_check_trace(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace harvest::cli
