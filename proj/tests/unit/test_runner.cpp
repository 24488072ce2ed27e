#include "ihoc/app/runner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ihoc/app/io.hpp"
#include "ihoc/app/scenario.hpp"
#include "oracles.hpp"

namespace ihoc::app {
namespace {

namespace fs = std::filesystem;

ScenarioConfig linear_config(const fs::path& out) {
  ScenarioConfig c = default_config(ScenarioId::custom_linear);
  c.output_dir = out.string();
  return c;
}

TEST(Io, FormatNumberRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = d(rng) * std::pow(10.0, k % 20 - 10);
    const std::string s = format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto dir = oracle::scratch_dir("atomic");
  const auto path = (dir / "a.txt").string();
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  EXPECT_EQ(oracle::read_file(path), "second\n");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
}

TEST(Io, CsvDocument) {
  EXPECT_EQ(csv_document({"a", "b"}, {{"1", "2"}, {"3", "4"}}), "a,b\n1,2\n3,4\n");
}

TEST(Io, TrajectoryCsvShape) {
  std::vector<Vector> xs{Vector::Ones(2), Vector::Zero(2), Vector::Zero(2)};
  std::vector<Vector> us{Vector::Ones(1), Vector::Ones(1)};
  const std::string csv = trajectory_csv(0.5, {"x1", "x2"}, {"u"}, xs, us, {1.5, 0.5}, {1, 2});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_seconds,x1,x2,u,stage_cost,phase");
  EXPECT_EQ(oracle::count_lines(csv), 4);
  EXPECT_NE(csv.find("\n1,0,0,0,0,"), std::string::npos);
}

TEST(Runner, SolveWritesArtifactsWithExpectedRows) {
  const auto dir = oracle::scratch_dir("runner_solve");
  const ScenarioConfig c = linear_config(dir);
  const RunResult r = run("solve", c);
  ASSERT_EQ(r.exit_code, kExitOk) << r.summary.dump();
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  const std::string traj = oracle::read_file(dir / "trajectory.csv");
  // Header, then one row per state of the transfer phase.
  const int steps = static_cast<int>(std::lround(c.transfer_time / c.dt));
  EXPECT_EQ(oracle::count_lines(traj), steps + 2);
  EXPECT_EQ(r.summary["schema"], kSummarySchema);
  EXPECT_EQ(r.summary["command"], "solve");
  EXPECT_EQ(r.summary["scenario"], "custom-linear");
  // x+ = x + u with c = x^2 + u^2: the optimum is phi x0^2.
  EXPECT_NEAR(r.summary["total_cost"].get<double>(), (1 + std::sqrt(5.0)) / 2.0, 1e-9);
}

TEST(Runner, RepeatedRunsProduceIdenticalCsv) {
  const auto a = oracle::scratch_dir("runner_det_a");
  const auto b = oracle::scratch_dir("runner_det_b");
  for (const char* command : {"solve", "sweep", "simulate", "convergence"}) {
    ScenarioConfig ca = linear_config(a);
    ScenarioConfig cb = linear_config(b);
    cb.workers = 3;
    ASSERT_EQ(run(command, ca).exit_code, kExitOk) << command;
    ASSERT_EQ(run(command, cb).exit_code, kExitOk) << command;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      EXPECT_EQ(oracle::read_file(entry.path()), oracle::read_file(b / entry.path().filename()))
          << command << " " << entry.path().filename();
    }
  }
}

TEST(Runner, SimulateRowCountCoversHorizon) {
  const auto dir = oracle::scratch_dir("runner_sim");
  const ScenarioConfig c = linear_config(dir);
  ASSERT_EQ(run("simulate", c).exit_code, kExitOk);
  const int steps = static_cast<int>(std::lround(c.horizon / c.dt));
  EXPECT_EQ(oracle::count_lines(oracle::read_file(dir / "trajectory.csv")), steps + 2);
}

TEST(Runner, VerifyPassesOnLinearInstance) {
  const auto dir = oracle::scratch_dir("runner_verify");
  const RunResult r = run("verify", linear_config(dir));
  EXPECT_EQ(r.exit_code, kExitOk) << r.summary.dump(2);
  EXPECT_TRUE(fs::exists(dir / "verify.json"));
}

TEST(Runner, ConfigErrorsBecomeExitTwo) {
  const auto dir = oracle::scratch_dir("runner_errors");
  ScenarioConfig landing = default_config(ScenarioId::soft_landing);
  landing.output_dir = dir.string();
  const RunResult sweep = run("sweep", landing);
  EXPECT_EQ(sweep.exit_code, kExitConfig);
  EXPECT_TRUE(fs::exists(dir / "error.json"));

  ScenarioConfig attitude = default_config(ScenarioId::attitude);
  attitude.output_dir = dir.string();
  EXPECT_EQ(run("convergence", attitude).exit_code, kExitConfig);
  EXPECT_EQ(run("launch", attitude).exit_code, kExitConfig);
}

TEST(Runner, ErrorDocumentShape) {
  const Json doc = error_document("solve", "attitude", "config", "dt: must be positive");
  EXPECT_EQ(doc["command"], "solve");
  EXPECT_EQ(doc["scenario"], "attitude");
  EXPECT_EQ(doc["error"]["kind"], "config");
}

TEST(Scenario, SamplePointsAreAwayFromSingularity) {
  std::mt19937_64 rng(5);
  for (ScenarioId id : {ScenarioId::attitude, ScenarioId::soft_landing}) {
    const Scenario sc = build_scenario(default_config(id));
    for (int k = 0; k < 50; ++k) {
      const auto [x, u] = sample_point(sc, rng);
      EXPECT_GT(std::abs(std::cos(x(1))), 1e-3);
      EXPECT_EQ(u.size(), sc.problem.model.control_dim());
    }
  }
}

TEST(Scenario, AttitudeConfigIsInDegrees) {
  ScenarioConfig config = default_config(ScenarioId::attitude);
  config.initial_state = {30.0, -10.0, 45.0, 1.0, 0.0, -2.0};
  const Scenario sc = build_scenario(config);
  EXPECT_NEAR(sc.problem.x0(0), 30.0 * M_PI / 180.0, 1e-15);
  EXPECT_NEAR(sc.problem.x0(5), -2.0 * M_PI / 180.0, 1e-15);
  // Weights given per degree squared become per radian squared.
  EXPECT_NEAR(sc.problem.cost.Q(0, 0), std::pow(180.0 / M_PI, 2), 1e-9);
}

TEST(Scenario, TouchdownInterpolatesCrossing) {
  const Scenario sc = build_scenario(default_config(ScenarioId::soft_landing));
  Vector above = Vector::Zero(13), below = Vector::Zero(13);
  above(12) = below(12) = 700.0;
  above(8) = 3.0;
  below(8) = -1.0;
  above(11) = -1.0;
  below(11) = -3.0;
  const Touchdown td = find_touchdown(sc, {sc.state_in(above), sc.state_in(below)});
  ASSERT_TRUE(td.reached);
  EXPECT_EQ(td.index, 1);
  EXPECT_NEAR(td.time, 0.75 * sc.config.dt, 1e-12);
  EXPECT_NEAR(td.state(11), -2.5, 1e-9);
}

}  // namespace
}  // namespace ihoc::app
