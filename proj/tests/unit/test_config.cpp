#include "ihoc/app/config.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace ihoc::app {
namespace {

const ScenarioId kAll[] = {ScenarioId::attitude, ScenarioId::rendezvous, ScenarioId::soft_landing,
                           ScenarioId::custom_linear};

std::string field_of(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

Json attitude_doc() { return Json{{"scenario", "attitude"}}; }

TEST(Config, ScenarioNames) {
  for (ScenarioId id : kAll) EXPECT_EQ(parse_scenario_id(to_string(id)), id);
  EXPECT_EQ(to_string(ScenarioId::soft_landing), "soft-landing");
  EXPECT_THROW(parse_scenario_id("lunar"), ConfigError);
}

TEST(Config, RoundTripEveryScenario) {
  for (ScenarioId id : kAll) {
    const Json emitted = emit_config(default_config(id));
    const ScenarioConfig parsed = parse_config(emitted);
    EXPECT_EQ(emit_config(parsed), emitted) << to_string(id);
    // And once more through text.
    EXPECT_EQ(emit_config(parse_config(Json::parse(emitted.dump()))).dump(), emitted.dump());
  }
}

TEST(Config, RoundTripPreservesNonDefaultValues) {
  Json doc = attitude_doc();
  doc["dt"] = 0.05;
  doc["horizon"] = 50.0;
  doc["transfer_time"] = 20.0;
  doc["Q"] = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  doc["terminal_set"] = {{"level", 0.25}};
  doc["sweep"] = {{"grid", {5.0, 10.0}}, {"warm_start", false}};
  doc["seed"] = 99;
  const ScenarioConfig c = parse_config(doc);
  EXPECT_DOUBLE_EQ(c.dt, 0.05);
  EXPECT_DOUBLE_EQ(c.Q(4, 4), 5.0);
  EXPECT_DOUBLE_EQ(c.Q(0, 1), 0.0);
  ASSERT_TRUE(c.terminal_set.level.has_value());
  EXPECT_DOUBLE_EQ(*c.terminal_set.level, 0.25);
  EXPECT_FALSE(c.sweep.warm_start);
  EXPECT_EQ(c.seed, 99u);
  const ScenarioConfig again = parse_config(emit_config(c));
  EXPECT_EQ(emit_config(again), emit_config(c));
}

TEST(Config, DefaultsMatchScenarioSetup) {
  const ScenarioConfig att = default_config(ScenarioId::attitude);
  EXPECT_DOUBLE_EQ(att.dt, 0.1);
  EXPECT_EQ(att.initial_state.size(), 6u);
  EXPECT_EQ(att.Q.rows(), 6);
  EXPECT_EQ(att.R.rows(), 3);
  EXPECT_EQ(att.solver.max_iterations, 500);
  EXPECT_DOUBLE_EQ(att.solver.tolerance, 1e-8);
  EXPECT_DOUBLE_EQ(att.solver.line_search_factor, 0.7);
  EXPECT_EQ(att.solver.line_search_steps, 16);

  const ScenarioConfig land = default_config(ScenarioId::soft_landing);
  // The initial mass comes from soft_landing.mass, not from initial_state.
  EXPECT_EQ(land.initial_state.size(), 12u);
  ASSERT_TRUE(land.soft_landing.has_value());
  EXPECT_DOUBLE_EQ(land.soft_landing->penalty_weight, 100.0);
  EXPECT_DOUBLE_EQ(land.soft_landing->penalty_rate, 1.0);
  EXPECT_DOUBLE_EQ(land.soft_landing->touchdown_speed_limit, 2.0);

  const ScenarioConfig rv = default_config(ScenarioId::rendezvous);
  ASSERT_TRUE(rv.rendezvous.has_value());
  EXPECT_DOUBLE_EQ(rv.rendezvous->mu, 398600.0);
}

TEST(Config, Overrides) {
  Json doc = attitude_doc();
  apply_override(doc, "dt=0.2");
  apply_override(doc, "terminal_set.level=1e-3");
  apply_override(doc, "sweep.grid=[10, 80]");
  apply_override(doc, "scenario=attitude");
  EXPECT_EQ(doc["dt"], 0.2);
  EXPECT_EQ(doc["terminal_set"]["level"], 1e-3);
  EXPECT_EQ(doc["sweep"]["grid"].size(), 2u);
  EXPECT_EQ(doc["scenario"], "attitude");
  EXPECT_THROW(apply_override(doc, "no-equals-sign"), ConfigError);
  EXPECT_THROW(apply_override(doc, "dt.x=1"), ConfigError);
}

TEST(Config, LoadFromFileWithOverrides) {
  const auto dir = oracle::scratch_dir("config_load");
  const auto path = (dir / "c.json").string();
  {
    std::ofstream out(path);
    out << R"({"scenario": "custom-linear", "horizon": 20})";
  }
  const ScenarioConfig c = load_config(path, {"transfer_time=5"});
  EXPECT_EQ(c.scenario, ScenarioId::custom_linear);
  EXPECT_DOUBLE_EQ(c.horizon, 20.0);
  EXPECT_DOUBLE_EQ(c.transfer_time, 5.0);
  EXPECT_THROW(load_config((dir / "missing.json").string(), {}), ConfigError);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(load_config(path, {}), ConfigError);
}

TEST(Config, ValidationNamesTheField) {
  auto with = [](const char* key, Json value) {
    Json doc = attitude_doc();
    doc[key] = std::move(value);
    return doc;
  };
  EXPECT_EQ(field_of(with("dt", -1.0)), "dt");
  EXPECT_EQ(field_of(with("horizon", 200.05)), "horizon");
  EXPECT_EQ(field_of(with("transfer_time", 400.0)), "transfer_time");
  EXPECT_EQ(field_of(with("Q", {1, 1, 1, 1, 1})), "Q");
  EXPECT_EQ(field_of(with("Q", {1, 1, 1, 1, 1, -1})), "Q");
  EXPECT_EQ(field_of(with("R", {1, 0, 1})), "R");
  EXPECT_EQ(field_of(with("initial_state", {0, 90, 0, 0, 0, 0})), "initial_state[1]");
  EXPECT_EQ(field_of(with("goal_state", {1, 0, 0, 0, 0, 0})), "goal_state[0]");
  EXPECT_EQ(field_of(with("bogus", 1)), "bogus");
  EXPECT_EQ(field_of(with("dt", "fast")), "dt");
  EXPECT_EQ(field_of(Json{{"dt", 0.1}}), "scenario");
  EXPECT_EQ(field_of(Json{{"scenario", "warp"}}), "scenario");

  Json solver = attitude_doc();
  solver["solver"] = {{"max_iterations", 0}};
  EXPECT_EQ(field_of(solver), "solver.max_iterations");

  Json unknown_nested = attitude_doc();
  unknown_nested["solver"] = {{"mystery", 1}};
  EXPECT_EQ(field_of(unknown_nested), "solver.mystery");

  Json orbit{{"scenario", "rendezvous"}};
  orbit["rendezvous"] = {{"target", {{"e", 1.2}}}};
  EXPECT_EQ(field_of(orbit), "rendezvous.target.e");

  Json asymmetric = attitude_doc();
  asymmetric["Q"] = Json::array();
  for (int r = 0; r < 6; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 6; ++c) row.push_back(r == c ? 1.0 : (r == 0 && c == 1 ? 0.5 : 0.0));
    asymmetric["Q"].push_back(row);
  }
  EXPECT_EQ(field_of(asymmetric), "Q");

  Json indefinite = attitude_doc();
  indefinite["Q"] = Json::array();
  for (int r = 0; r < 6; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 6; ++c) row.push_back((r < 2 && c < 2) ? (r == c ? 1.0 : 2.0) : (r == c ? 1.0 : 0.0));
    indefinite["Q"].push_back(row);
  }
  EXPECT_EQ(field_of(indefinite), "Q");
}

TEST(Config, DimensionHelpers) {
  EXPECT_EQ(weighted_state_dim(default_config(ScenarioId::attitude)), 6);
  EXPECT_EQ(weighted_state_dim(default_config(ScenarioId::rendezvous)), 6);
  EXPECT_EQ(weighted_state_dim(default_config(ScenarioId::soft_landing)), 12);
  EXPECT_EQ(control_dim(default_config(ScenarioId::soft_landing)), 6);
  EXPECT_EQ(initial_state_dim(default_config(ScenarioId::soft_landing)), 12);
  EXPECT_EQ(weighted_state_dim(default_config(ScenarioId::custom_linear)), 1);
}

}  // namespace
}  // namespace ihoc::app
