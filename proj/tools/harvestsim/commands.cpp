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

#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "harvest/harvest_sim.hpp"
#include "harvest/monitor.hpp"
#include "harvest/trace.hpp"

namespace harvest::cli {
namespace fs = std::filesystem;

ScenarioConfig load_config(const std::string& path) {
  return path.empty() ? ScenarioConfig::parse(kDefaultScenario) : ScenarioConfig::load(path);
}

fs::path default_output_dir() {
  const char* env = std::getenv("HARVEST_OUT_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("harvest-out");
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fill) {
  std::ofstream f(path, std::ios::binary);
  f << std::setprecision(10);
  fill(f);
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

void print_summary(std::ostream& out, const EpisodeReport& r, const std::string& hash) {
  out << std::fixed << std::setprecision(3);
  out << "strategy          " << r.strategy << "\n"
      << "seed              " << r.seed << "\n"
      << "config hash       " << hash << "\n"
      << "apples            " << r.apples << "\n"
      << "attempted         " << r.attempted << "\n"
      << "succeeded         " << r.succeeded << " (" << 100.0 * r.success_rate() << "%)\n"
      << "first attempt     " << r.first_attempt_successes << "\n"
      << "never detected    " << r.never_detected << "\n"
      << "out of reach      " << r.discarded << "\n"
      << "cycle time        " << r.mean_cycle_time << " s/apple\n"
      << "time per apple    " << r.time_per_apple << " s\n"
      << "makespan          " << r.makespan << " s\n"
      << "utilization       " << r.utilization[0] << " / " << r.utilization[1] << "\n";
  out << "failures         ";
  for (const std::string& cause : failure_causes()) {
    const auto it = r.failure_counts.find(cause);
    out << ' ' << cause << '=' << (it == r.failure_counts.end() ? 0 : it->second);
  }
  out << "\n";
  out.unsetf(std::ios::floatfield);
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  std::string hash;
  try {
    const ScenarioConfig config = load_config(options.scenario_path);
    scenario = config.build(options.overrides);
    hash = hash_hex(config.hash(options.overrides));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  EpisodeResult result;
  try {
    result = run_episode(scenario);
  } catch (const MonitorDefect& e) {
    err << "error: monitor defect: " << e.what() << "\n";
    return kExitFailure;
  }

  const fs::path dir = options.output_dir.empty() ? default_output_dir() : options.output_dir;
  try {
    fs::create_directories(dir);
    write_file(dir / "report.json", report_to_json(result.report));
    write_stream(dir / "trace.jsonl", [&](std::ostream& f) { write_trace(f, result.trace); });
    write_stream(dir / "pressure.csv", [&](std::ostream& f) {
      write_pressure_header(f);
      for (std::size_t k = 0; k < result.samples.t.size(); ++k) {
        write_pressure_row(f, result.samples.t[k], result.samples.pressure[k], result.samples.valves[k]);
      }
    });
    for (int arm = 0; arm < 2; ++arm) {
      write_stream(dir / ("tracking_arm" + std::to_string(arm + 1) + ".csv"),
                   [&](std::ostream& f) { write_tracking_csv(f, result.tracking[static_cast<std::size_t>(arm)]); });
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  print_summary(out, result.report, hash);
  out << "output            " << dir.string() << "\n";
  return kExitOk;
}

std::size_t SweepGrid::cells() const {
  return strategies.size() * std::max<std::size_t>(failure_rates.size(), 1) * seeds.size();
}

namespace {

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + '"';
}

}  // namespace

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  if (options.grid.cells() == 0) {
    err << "error: empty sweep grid (need at least one strategy and one seed)\n";
    return kExitUsage;
  }
  std::optional<ScenarioConfig> config;
  try {
    config = load_config(options.scenario_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::ofstream file;
  std::ostream* csv = &out;
  if (options.output != "-") {
    if (options.output.has_parent_path()) fs::create_directories(options.output.parent_path());
    file.open(options.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << options.output.string() << "\n";
      return kExitUsage;
    }
    csv = &file;
  }
  *csv << kSweepHeader << "\n" << std::setprecision(10);

  std::vector<std::optional<double>> rates;
  for (double p : options.grid.failure_rates) rates.emplace_back(p);
  if (rates.empty()) rates.emplace_back(std::nullopt);

  std::size_t failed = 0;
  for (Strategy strategy : options.grid.strategies) {
    for (const std::optional<double>& p : rates) {
      for (std::uint64_t seed : options.grid.seeds) {
        ConfigOverrides o;
        o.strategy = strategy;
        o.seed = seed;
        o.failure_p = p;
        *csv << to_string(strategy) << ',';
        if (p) {
          *csv << *p;
        } else {
          *csv << '-';
        }
        *csv << ',' << seed << ',' << hash_hex(config->hash(o)) << ',';
        try {
          const EpisodeReport r = run_episode_report(config->build(o));
          const double first = r.succeeded == 0 ? 0.0 : static_cast<double>(r.first_attempt_successes) / r.succeeded;
          double pick_mean = 0.0;
          for (double c : r.cycle_times) pick_mean += c;
          if (!r.cycle_times.empty()) pick_mean /= static_cast<double>(r.cycle_times.size());
          *csv << "ok," << r.attempted << ',' << r.succeeded << ',' << r.success_rate() << ',' << first << ','
               << r.mean_cycle_time << ',' << pick_mean << ',' << stddev(r.cycle_times) << ',' << r.time_per_apple
               << ',' << r.makespan << ",\n";
        } catch (const std::exception& e) {
          ++failed;
          *csv << "error,,,,,,,,,," << csv_field(e.what()) << "\n";
        }
      }
    }
  }
  csv->flush();
  if (failed > 0) {
    err << "error: " << failed << " of " << options.grid.cells() << " sweep cells failed\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_check_trace(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "error: cannot read trace file " << path << "\n";
    return kExitUsage;
  }
  try {
    const MonitorVerdict v = monitor_check(read_trace(in));
    out << to_string(v) << "\n";
    return v.ok ? kExitOk : kExitFailure;
  } catch (const MalformedTrace& e) {
    err << "error: " << path << ": " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace harvest::cli
