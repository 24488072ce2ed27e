#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ihoc/ilqr.hpp"
#include "ihoc/lqr.hpp"

namespace ihoc {

/// Builds the terminal regulator for a given transfer state. For systems
/// whose goal equilibrium does not depend on the transfer point the argument
/// is ignored.
using RegulatorFactory = std::function<LqrSolution(const Vector& x_transfer)>;

/// An infinite-horizon problem: nonlinear model, quadratic stage cost,
/// initial state, and the terminal regulator used past the transfer time.
struct Problem {
  DiscreteModel model;
  QuadraticCostSpec cost;
  Vector x0;
  Vector control_guess;
  RegulatorFactory regulator;
  TerminalSetSpec terminal_set;
  SolverSettings solver;
};

/// Regulator from the linearization at (x_eq, u_eq) and the stage-cost weights.
RegulatorFactory goal_regulator(const DiscreteModel& model, const QuadraticCostSpec& cost,
                                const Vector& x_eq, const Vector& u_eq);

/// Scalar x+ = x + u with c = x^2 + u^2; J*(x0) = (1 + sqrt 5)/2 x0^2.
Problem make_scalar_linear_problem(double x0 = 1.0);

/// Time-invariant linear problem x+ = Ax + Bu with c = 0.5 (x'Qx + u'Ru).
Problem make_linear_problem(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                            const Vector& x0, double dt = 1.0);

/// Number of steps for a horizon of T seconds; T must be a positive multiple of dt.
Index horizon_steps(double T, double dt);

struct SweepOptions {
  bool warm_start = true;
  unsigned workers = 1;   // used only when warm_start is off
};

struct SweepPoint {
  double T = 0.0;
  Index steps = 0;
  double ilqr_phase_cost = 0.0;
  double regulation_cost = 0.0;
  double terminal_value = 0.0;
  double total_cost = 0.0;
  bool in_omega = false;
  Vector final_state_error;
  int iterations = 0;
  std::string status;
  bool ok = false;
  std::string error;

  std::shared_ptr<const SolveReport> plan;
  std::shared_ptr<const LqrSolution> regulator;
  std::shared_ptr<const RegulationResult> regulation;
};

/// One transfer-time evaluation: solve the finite-horizon problem with
/// terminal cost x_T' P x_T, then regulate from x_T.
SweepPoint evaluate_transfer(const Problem& problem, Index steps,
                             std::vector<Vector> initial_controls);

/// Sorted by T. Per-point failures are recorded, not thrown.
std::vector<SweepPoint> sweep_transfer_time(const Problem& problem,
                                            const std::vector<double>& T_grid,
                                            const SweepOptions& options = {});

/// n log-spaced horizons in [lo_fraction * T_max, T_max], snapped to multiples of dt.
std::vector<double> log_spaced_grid(double T_max, double dt, int n = 20, double lo_fraction = 0.05);

struct AcocpSolution {
  double transfer_time = 0.0;
  Index transfer_steps = 0;
  double level = 0.0;         // M
  double cost = 0.0;          // phase-1 stage costs + max(x_T'Px_T, M)
  SweepPoint point;
  /// Both phases concatenated; phase[i] is the phase of the step from states[i].
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<int> phase;
  std::vector<SweepPoint> sweep;
};

class HittingTimeNotFound : public Error {
 public:
  HittingTimeNotFound(const std::string& what, std::vector<SweepPoint> sweep)
      : Error(what), sweep_(std::move(sweep)) {}
  const std::vector<SweepPoint>& sweep() const { return sweep_; }
  std::string kind() const override { return "hitting_time_not_found"; }

 private:
  std::vector<SweepPoint> sweep_;
};

/// Ascending search over the grid for the first T whose terminal state lies
/// in Omega_M. Throws HittingTimeNotFound if none does.
AcocpSolution solve_acocp(const Problem& problem, double M, const std::vector<double>& T_grid,
                          const SweepOptions& options = {});

struct ClosedLoop {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> stage_costs;
  std::vector<int> phase;        // per control step: 1 iLQR policy, 2 LQR
  Index switch_index = 0;        // index into states where phase 2 starts
  double phase1_cost = 0.0;
  double phase2_cost = 0.0;
  bool diverged = false;
  std::string message;
  Vector pre_switch_state;

  double total_cost() const { return phase1_cost + phase2_cost; }
};

struct SimulateOptions {
  Vector perturbation;           // added to x0 if non-empty
  long total_steps = 0;          // > 0: run exactly this many steps overall
  bool open_loop = false;        // replay u*_t without feedback in phase 1
};

/// Phase 1 applies u*_t + K_t (x_t - x*_t); from T* on, u = -K_inf x. Without
/// total_steps, phase 2 stops at the terminal-set state tolerance or N_reg.
ClosedLoop two_phase_simulate(const Problem& problem, const SweepPoint& transfer,
                              const SimulateOptions& options = {});

struct ConvergenceRow {
  double M = 0.0;
  double cost = 0.0;       // J^M
  double optimal = 0.0;    // x0' P x0
  double gap = 0.0;
  double transfer_time = 0.0;
};

/// J^M versus the exact linear optimum over a decreasing M grid.
std::vector<ConvergenceRow> convergence_study(const Problem& linear_problem,
                                              const std::vector<double>& M_grid,
                                              const std::vector<double>& T_grid);

struct BellmanResidual {
  Index t = 0;
  bool checked = false;     // false: x_t inside Omega_M (out of scope)
  bool available = false;   // false: re-solve failed
  double cost_to_go = 0.0;  // J(x_t)
  double stage = 0.0;       // c(x_t, u_t)
  double cost_to_go_next = 0.0;
  double residual = 0.0;
  std::string note;
};

struct BellmanReport {
  std::vector<BellmanResidual> residuals;
  bool lyapunov_decreasing = true;
  double max_residual = 0.0;
};

/// Re-solves the transfer problem from consecutive states of the optimal
/// trajectory (same final time) and reports
///   |J(x_t) - c(x_t, u_t) - J(x_{t+1})| / max(J(x_t), 1).
BellmanReport bellman_check(const Problem& problem, const AcocpSolution& solution,
                            Index steps_to_check);

struct LyapunovTail {
  std::vector<double> tail;   // remaining accumulated cost from each state
  Index checked = 0;          // number of states outside Omega_M examined
  bool strictly_decreasing = true;
};

/// Remaining accumulated cost along a closed loop; checked for strict
/// decrease at states with x'Px > M.
LyapunovTail lyapunov_tail_check(const ClosedLoop& loop, const LqrSolution& regulator, double M);

}  // namespace ihoc
