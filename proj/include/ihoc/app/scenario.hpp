#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ihoc/acocp.hpp"
#include "ihoc/app/config.hpp"

namespace ihoc::app {

/// A configured scenario in solver variables, with the conversions needed to
/// report results in output units (SI / km; radians for angles).
struct Scenario {
  ScenarioConfig config;
  Problem problem;
  bool two_phase = true;                 // false: single-phase penalized solve
  std::vector<std::string> state_names;  // output columns
  std::vector<std::string> control_names;
  std::vector<Index> error_indices;      // coordinates compared against the goal
  std::function<Vector(const Vector&)> state_out;    // solver -> output units
  std::function<Vector(const Vector&)> control_out;
  std::function<Vector(const Vector&)> state_in;     // output -> solver units

  Index horizon_steps() const;
  Index transfer_steps() const;
  /// Transfer-time grid from the configuration (explicit or log-spaced).
  std::vector<double> sweep_grid() const;
  /// Goal error of a solver-unit state, in output units.
  Vector goal_error(const Vector& x) const;
};

/// Converts configuration units, builds the model, cost, initial state,
/// control guess and regulator.
Scenario build_scenario(const ScenarioConfig& config);

/// Random non-singular state and control (solver units) for derivative
/// checks; ranges are representative of the scenario's operating envelope.
std::pair<Vector, Vector> sample_point(const Scenario& scenario, std::mt19937_64& rng);

/// Soft-landing touchdown: linear interpolation of the first altitude
/// crossing between two samples.
struct Touchdown {
  bool reached = false;
  double time = 0.0;
  Index index = 0;             // first state at or below ground
  Vector state;                // output units, interpolated to the crossing
};

Touchdown find_touchdown(const Scenario& scenario, const std::vector<Vector>& states);

}  // namespace ihoc::app
