#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ihoc/types.hpp"

namespace ihoc::app {

using Json = nlohmann::ordered_json;

enum class ScenarioId { attitude, rendezvous, soft_landing, custom_linear };

std::string to_string(ScenarioId id);
ScenarioId parse_scenario_id(const std::string& name);

/// A configuration problem; `field` is the dotted path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }
  std::string kind() const override { return "config"; }

 private:
  std::string field_;
};

/// Keplerian elements as written in the configuration (angles in degrees).
struct ElementsConfig {
  double a = 7000.0;
  double e = 0.0;
  double i_deg = 0.0;
  double raan_deg = 0.0;
  double argp_deg = 0.0;
  double nu_deg = 0.0;
};

struct SolverConfig {
  int max_iterations = 500;
  double tolerance = 1e-8;
  double line_search_factor = 0.7;
  int line_search_steps = 16;
  double lambda_init = 1e-6;
  double lambda_min = 1e-8;
  double lambda_max = 1e8;
  double lambda_growth = 10.0;
  double lambda_shrink = 0.1;
};

struct TerminalSetConfig {
  std::optional<double> level;   // M; unset = no level bound
  double epsilon = 1e-2;
  double floor = 1e-8;
  long max_steps = 0;            // 0 = 10 * horizon / dt
  double state_tolerance = 1e-6;
  double divergence_cap = 1e15;
};

struct SweepConfig {
  std::vector<double> grid;      // empty = log-spaced over the horizon
  int points = 20;
  double lo_fraction = 0.05;
  bool warm_start = true;
};

struct AttitudeConfig {
  Matrix inertia;                // kg m^2
};

struct RendezvousConfig {
  double mu = 398600.0;
  double alpha = 5e-4;
  double mass = 1000.0;
  double min_radius = 1.0;
  ElementsConfig chaser;
  ElementsConfig target;
};

struct LandingConfig {
  Matrix inertia;
  double isp = 225.0;
  double g_ref = 3.7114;
  double mass = 1000.0;
  double penalty_weight = 100.0;
  double penalty_rate = 1.0;
  double touchdown_speed_limit = 2.0;   // m/s
};

struct LinearConfig {
  Matrix A;
  Matrix B;
};

struct VerifyConfig {
  int jacobian_points = 100;
  double jacobian_tolerance = 1e-5;
  int bellman_steps = 3;
  double bellman_tolerance = 1e-3;
};

struct ConvergenceConfig {
  std::vector<double> M_grid;
  std::vector<double> T_grid;
};

struct SimulateConfig {
  std::vector<double> perturbation;   // trajectory-CSV units, added to the initial state
  bool open_loop = false;
};

/// Everything a run needs. Values are held in the units written in the file:
/// angles in degrees, rates in deg/s, lander positions in m. Q and R weight
/// those same units; the scenario builder converts to solver variables.
struct ScenarioConfig {
  ScenarioId scenario = ScenarioId::attitude;
  double dt = 0.1;
  double horizon = 200.0;
  double transfer_time = 80.0;
  std::vector<double> initial_state;
  std::vector<double> goal_state;
  Matrix Q;
  Matrix R;
  SolverConfig solver;
  TerminalSetConfig terminal_set;
  SweepConfig sweep;
  VerifyConfig verify;
  ConvergenceConfig convergence;
  SimulateConfig simulate;
  std::optional<AttitudeConfig> attitude;
  std::optional<RendezvousConfig> rendezvous;
  std::optional<LandingConfig> soft_landing;
  std::optional<LinearConfig> linear;
  unsigned workers = 0;          // 0 = available parallelism
  std::uint64_t seed = 1;
  std::string output_dir;
};

/// Number of weighted state coordinates (the goal/Q dimension) and controls.
Index weighted_state_dim(const ScenarioConfig& config);
Index control_dim(const ScenarioConfig& config);
/// Length of initial_state in the file.
Index initial_state_dim(const ScenarioConfig& config);

ScenarioConfig default_config(ScenarioId id);

/// Fill defaults for the scenario named in `doc`, overlay `doc`, validate.
/// Unknown keys are rejected.
ScenarioConfig parse_config(const Json& doc);

/// Read a file (an empty file is an empty object), apply `key=value`
/// overrides, then parse.
ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// Set a dotted key in a document. The value is read as JSON when it parses,
/// otherwise as a string.
void apply_override(Json& doc, const std::string& assignment);

/// Complete document; parse_config(emit_config(c)) reproduces c.
Json emit_config(const ScenarioConfig& config);

/// Field-level validation; throws ConfigError.
void validate(const ScenarioConfig& config);

}  // namespace ihoc::app
