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

#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "server.hpp"

namespace {

using namespace harvest;
using namespace harvest::cli;

Strategy parse_strategy(const std::string& name) {
  const auto s = strategy_from_string(name);
  if (!s) throw CLI::ValidationError("--strategy", "unknown strategy '" + name + "' (baseline, v2023, v2024, single_arm)");
  return *s;
}

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string strategy;

  void add(CLI::App* cmd) {
    cmd->add_option("scenario", scenario, "Scenario JSON file (default: calibration preset)");
    cmd->add_option("--seed", seed, "Episode seed");
    cmd->add_option("--strategy", strategy, "baseline, v2023, v2024 or single_arm");
  }

  ConfigOverrides overrides() const {
    ConfigOverrides o;
    o.seed = seed;
    if (!strategy.empty()) o.strategy = parse_strategy(strategy);
    return o;
  }
};

int serve(const Common& common, ServeOptions options) {
  ScenarioConfig config = [&] {
    try {
      return load_config(common.scenario);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      std::exit(kExitUsage);
    }
  }();
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // inherited by the server threads

  try {
    Server server(std::move(config), common.overrides(), options);
    const int port = server.start();
    std::cout << "serving on " << options.host << ":" << port << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-arm apple harvesting simulator"};
  app.require_subcommand(1);

  Common run_common;
  RunOptions run;
  std::optional<double> run_p;
  std::string run_out;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one episode and write its report, trace and logs");
  run_common.add(run_cmd);
  run_cmd->add_option("--failure-p", run_p, "Uniform per-attempt failure probability");
  run_cmd->add_option("-o,--out", run_out, "Output directory (default: $HARVEST_OUT_DIR or harvest-out)");

  std::string sweep_scenario, sweep_out = "-";
  std::vector<std::string> sweep_strategies{"baseline", "v2023", "v2024", "single_arm"};
  std::vector<double> sweep_rates;
  std::vector<std::uint64_t> sweep_seeds;
  std::optional<std::uint64_t> seed_count;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a strategy x failure rate x seed grid to csv");
  sweep_cmd->add_option("scenario", sweep_scenario, "Scenario JSON file (default: calibration preset)");
  sweep_cmd->add_option("--strategies", sweep_strategies, "Strategies to compare")->delimiter(',');
  sweep_cmd->add_option("--failure-rates", sweep_rates, "Uniform failure probabilities")->delimiter(',');
  auto* seeds_opt = sweep_cmd->add_option("--seeds", sweep_seeds, "Seeds")->delimiter(',');
  sweep_cmd->add_option("--seed-count", seed_count, "Seeds 1..N")->excludes(seeds_opt);
  sweep_cmd->add_option("-o,--out", sweep_out, "CSV file, - for stdout");

  Common serve_common;
  ServeOptions serve_options;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the interactive simulator behind a socket");
  serve_common.add(serve_cmd);
  serve_cmd->add_option("--port", serve_options.port, "TCP port, 0 for any free port")->capture_default_str();
  serve_cmd->add_option("--host", serve_options.host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--rtf", serve_options.realtime_factor, "Real-time factor, 0 for unthrottled")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  serve_cmd->add_flag("--autostart", serve_options.autostart, "Start stepping without a start command");

  std::string trace_path;
  CLI::App* check_cmd = app.add_subcommand("check-trace", "Check a trace file against the coordination monitor");
  check_cmd->add_option("trace", trace_path, "trace.jsonl")->required();

  try {
    app.parse(argc, argv);
    if (*run_cmd) {
      run.scenario_path = run_common.scenario;
      run.overrides = run_common.overrides();
      run.overrides.failure_p = run_p;
      run.output_dir = run_out;
      return cmd_run(run, std::cout, std::cerr);
    }
    if (*sweep_cmd) {
      SweepOptions sweep;
      sweep.scenario_path = sweep_scenario;
      for (const std::string& s : sweep_strategies) sweep.grid.strategies.push_back(parse_strategy(s));
      sweep.grid.failure_rates = sweep_rates;
      if (seed_count) {
        for (std::uint64_t s = 1; s <= *seed_count; ++s) sweep.grid.seeds.push_back(s);
      } else if (seeds_opt->count() > 0) {
        sweep.grid.seeds = sweep_seeds;
      } else {
        sweep.grid.seeds = {1};
      }
      sweep.output = sweep_out;
      return cmd_sweep(sweep, std::cout, std::cerr);
    }
    if (*serve_cmd) return serve(serve_common, serve_options);
    return cmd_check_trace(trace_path, std::cout, std::cerr);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
