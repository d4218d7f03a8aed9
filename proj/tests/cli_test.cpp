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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "harvest/trace.hpp"

namespace harvest::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("harvest_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ideal_ = (dir_ / "ideal.json").string();
    std::ofstream(ideal_) << R"({"scenario": {"preset": "ideal"}})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::string ideal_;
};

TEST_F(CliTest, RunWritesEveryArtifact) {
  RunOptions o;
  o.scenario_path = ideal_;
  o.output_dir = dir_ / "out";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(o, out, err), kExitOk) << err.str();
  for (const char* name : {"report.json", "trace.jsonl", "pressure.csv", "tracking_arm1.csv", "tracking_arm2.csv"}) {
    EXPECT_GT(fs::file_size(o.output_dir / name), 0u) << name;
  }
  EXPECT_NE(out.str().find("cycle time        2.250"), std::string::npos) << out.str();
  EXPECT_EQ(slurp(o.output_dir / "pressure.csv").rfind("t,p_arm1,p_arm2,p_source,v1,v2,v3,v4\n", 0), 0u);
  std::ifstream trace(o.output_dir / "trace.jsonl");
  EXPECT_TRUE(monitor_check(read_trace(trace)).ok);
}

TEST_F(CliTest, RunTwiceIsByteIdentical) {
  RunOptions a, b;
  a.scenario_path = b.scenario_path = "";
  a.overrides.seed = b.overrides.seed = 17;
  a.output_dir = dir_ / "a";
  b.output_dir = dir_ / "b";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(a, out, err), kExitOk) << err.str();
  ASSERT_EQ(cmd_run(b, out, err), kExitOk) << err.str();
  for (const char* name : {"report.json", "trace.jsonl", "pressure.csv", "tracking_arm1.csv", "tracking_arm2.csv"}) {
    EXPECT_EQ(slurp(a.output_dir / name), slurp(b.output_dir / name)) << name;
  }
}

TEST_F(CliTest, MissingScenarioNamesThePath) {
  RunOptions o;
  o.scenario_path = (dir_ / "nope.json").string();
  o.output_dir = dir_ / "out";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(o, out, err), kExitUsage);
  EXPECT_NE(err.str().find(o.scenario_path), std::string::npos) << err.str();
  EXPECT_EQ(err.str().find('\n'), err.str().size() - 1);
  EXPECT_FALSE(fs::exists(o.output_dir));
}

TEST_F(CliTest, BadDocumentIsAUsageError) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"scenario": {"preset": "ideal", "speed": 2}})";
  RunOptions o;
  o.scenario_path = bad.string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(o, out, err), kExitUsage);
  EXPECT_NE(err.str().find("scenario.speed"), std::string::npos) << err.str();
}

TEST_F(CliTest, OutputDirFromEnvironment) {
  const fs::path env = dir_ / "env";
  ::setenv("HARVEST_OUT_DIR", env.c_str(), 1);
  EXPECT_EQ(default_output_dir(), env);
  RunOptions o;
  o.scenario_path = ideal_;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(o, out, err), kExitOk);
  EXPECT_TRUE(fs::exists(env / "report.json"));
  ::unsetenv("HARVEST_OUT_DIR");
  EXPECT_EQ(default_output_dir(), fs::path("harvest-out"));
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

TEST_F(CliTest, SweepReproducesIdealCycleTimes) {
  SweepOptions o;
  o.scenario_path = ideal_;
  o.grid.strategies = {Strategy::Baseline, Strategy::V2023, Strategy::V2024};
  o.grid.seeds = {1, 2};
  o.output = "-";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(o, out, err), kExitOk) << err.str();
  const auto table = rows(out.str());
  ASSERT_EQ(table.size(), 7u);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kSweepHeader);
  const double expected[3] = {4.5, 2.5, 2.25};
  for (std::size_t r = 1; r < table.size(); ++r) {
    ASSERT_EQ(table[r].size(), 15u);
    EXPECT_EQ(table[r][4], "ok");
    EXPECT_NEAR(std::stod(table[r][9]), expected[(r - 1) / 2], 0.05) << table[r][0];
  }
  // Two seeds of one cell: distinct rows sharing the config hash.
  EXPECT_NE(table[1][2], table[2][2]);
  EXPECT_EQ(table[1][3], table[2][3]);
  EXPECT_NE(table[1][3], table[3][3]);
}

TEST_F(CliTest, SweepRejectsAnEmptyGrid) {
  SweepOptions o;
  o.grid.strategies = {Strategy::V2024};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(o, out, err), kExitUsage);
  EXPECT_TRUE(out.str().empty());
}

TEST_F(CliTest, SweepRecordsFailedCellsAndContinues) {
  SweepOptions o;
  o.scenario_path = ideal_;
  o.grid.strategies = {Strategy::V2024};
  o.grid.failure_rates = {1.5, 0.1};
  o.grid.seeds = {3};
  o.output = dir_ / "sweep" / "grid.csv";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(o, out, err), kExitFailure);
  const std::string csv = slurp(o.output);
  const auto table = rows(csv);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[1][4], "error");
  EXPECT_NE(csv.find(",\"invalid scenario: failure p must be in [0, 1]\"\n"), std::string::npos) << csv;
  EXPECT_EQ(table[2][4], "ok");
  EXPECT_EQ(table[2][1], "0.1");
}

TEST_F(CliTest, CheckTraceVerdicts) {
  RunOptions o;
  o.scenario_path = ideal_;
  o.output_dir = dir_ / "out";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(o, out, err), kExitOk);
  const fs::path trace = o.output_dir / "trace.jsonl";
  std::ostringstream ok;
  EXPECT_EQ(cmd_check_trace(trace.string(), ok, err), kExitOk);
  EXPECT_EQ(ok.str(), "ok\n");

  // Plant a second attaching arm on one record.
  std::ifstream in(trace);
  std::vector<TraceRecord> records = read_trace(in);
  records[40].arms[0].phase = Phase::Attaching;
  records[40].arms[1].phase = Phase::Attaching;
  records[40].arms[0].props.attaching = records[40].arms[1].props.attaching = true;
  const fs::path planted = dir_ / "planted.jsonl";
  {
    std::ofstream f(planted);
    write_trace(f, records);
  }
  std::ostringstream bad;
  EXPECT_EQ(cmd_check_trace(planted.string(), bad, err), kExitFailure);
  EXPECT_EQ(bad.str().rfind("violation ", 0), 0u) << bad.str();

  std::ofstream(dir_ / "junk.jsonl") << "{\"tick\": 0}\n";
  std::ostringstream junk, junk_err;
  EXPECT_EQ(cmd_check_trace((dir_ / "junk.jsonl").string(), junk, junk_err), kExitUsage);
  EXPECT_NE(junk_err.str().find("junk.jsonl"), std::string::npos);
  EXPECT_EQ(cmd_check_trace((dir_ / "absent.jsonl").string(), junk, junk_err), kExitUsage);
}

TEST_F(CliTest, ShippedScenariosRun) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(HARVEST_SCENARIO_DIR)) {
    RunOptions o;
    o.scenario_path = entry.path().string();
    o.overrides.strategy = Strategy::V2024;
    o.output_dir = dir_ / entry.path().stem();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(o, out, err), kExitOk) << entry.path() << ": " << err.str();
    ++count;
  }
  EXPECT_GE(count, 3);
}

}  // namespace
}  // namespace harvest::cli
