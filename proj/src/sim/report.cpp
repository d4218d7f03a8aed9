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

#include <stdexcept>

#include "harvest/harvest_sim.hpp"
#include "json.hpp"

namespace harvest {

std::string report_to_json(const EpisodeReport& r) {
  nlohmann::ordered_json j;
  j["strategy"] = r.strategy;
  j["seed"] = r.seed;
  j["apples"] = r.apples;
  j["attempted"] = r.attempted;
  j["succeeded"] = r.succeeded;
  j["success_rate"] = r.success_rate();
  j["first_attempt_successes"] = r.first_attempt_successes;
  j["pick_attempts"] = r.pick_attempts;
  j["failed"] = r.failed;
  j["never_detected"] = r.never_detected;
  j["discarded"] = r.discarded;
  j["failure_counts"] = r.failure_counts;
  j["miss_counts"] = r.miss_counts;
  j["mean_cycle_time"] = r.mean_cycle_time;
  j["time_per_apple"] = r.time_per_apple;
  j["makespan"] = r.makespan;
  j["ticks"] = r.ticks;
  j["utilization"] = {{"arm1", r.utilization[0]}, {"arm2", r.utilization[1]}};
  j["monitor_ok"] = r.monitor_ok;
  j["cycle_times"] = r.cycle_times;
  return j.dump(2) + "\n";
}

Summary summarize(const std::vector<EpisodeReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("summarize needs at least one report");
  Summary s;
  for (const std::string& c : failure_causes()) s.failure_counts[c] = 0;
  double cycle = 0.0, per_apple = 0.0;
  for (const EpisodeReport& r : reports) {
    ++s.episodes;
    s.attempted += r.attempted;
    s.succeeded += r.succeeded;
    s.first_attempt_successes += r.first_attempt_successes;
    cycle += r.mean_cycle_time;
    per_apple += r.time_per_apple;
    for (const auto& [cause, n] : r.failure_counts) s.failure_counts[cause] += n;
  }
  s.success_rate = s.attempted == 0 ? 0.0 : static_cast<double>(s.succeeded) / s.attempted;
  s.first_attempt_share = s.succeeded == 0 ? 0.0 : static_cast<double>(s.first_attempt_successes) / s.succeeded;
  s.mean_cycle_time = cycle / s.episodes;
  s.mean_time_per_apple = per_apple / s.episodes;
  int total = 0;
  for (const auto& [cause, n] : s.failure_counts) total += n;
  for (const auto& [cause, n] : s.failure_counts) s.failure_share[cause] = total == 0 ? 0.0 : static_cast<double>(n) / total;
  return s;
}

}  // namespace harvest
