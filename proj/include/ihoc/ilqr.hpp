#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ihoc/cost.hpp"
#include "ihoc/dynamics.hpp"

namespace ihoc {

/// States x_0..x_T, controls u_0..u_{T-1} and their costs.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> stage_costs;
  double terminal_cost = 0.0;
  double total_cost = 0.0;

  Index horizon() const { return static_cast<Index>(controls.size()); }
  double stage_sum() const;
};

/// Terminal cost x'Px (optional) plus, optionally, the state part of the stage cost.
struct TerminalCost {
  std::optional<Matrix> P;
  bool include_state_cost = false;

  static TerminalCost none() { return {}; }
  static TerminalCost quadratic(Matrix P) { return {std::move(P), false}; }

  double value(const Vector& x, const QuadraticCostSpec& cost) const;
};

struct GainSchedule {
  std::vector<Vector> k;   // feedforward
  std::vector<Matrix> K;   // feedback
  double dV1 = 0.0;        // sum k' Q_u
  double dV2 = 0.0;        // 0.5 sum k' Q_uu k
  double gradient_norm = 0.0;  // max_t |Q_u(t)|
  double lambda = 0.0;

  /// Predicted cost decrease of the quadratic model at step length alpha.
  double expected_reduction(double alpha) const { return -(alpha * dV1 + alpha * alpha * dV2); }
};

struct SolverSettings {
  int max_iterations = 500;
  double tolerance = 1e-8;
  std::vector<double> alphas = default_alphas();
  double lambda_init = 1e-6;
  double lambda_min = 1e-8;
  double lambda_max = 1e8;
  double lambda_growth = 10.0;
  double lambda_shrink = 0.1;

  /// 1, 0.7, 0.7^2, ..., 0.7^15.
  static std::vector<double> default_alphas();
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double gradient_norm = 0.0;
  bool accepted = false;
};

enum class SolveStatus { converged, max_iterations, stalled };

std::string to_string(SolveStatus status);

struct SolveReport {
  Trajectory trajectory;
  GainSchedule gains;
  std::vector<IterationRecord> log;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;

  bool converged() const { return status == SolveStatus::converged; }
};

/// A failed solve; carries the iteration log up to the failure.
class SolveError : public Error {
 public:
  SolveError(const std::string& what, std::string cause_kind, std::vector<IterationRecord> log)
      : Error(what), cause_(std::move(cause_kind)), log_(std::move(log)) {}
  std::string kind() const override { return cause_; }
  const std::vector<IterationRecord>& log() const { return log_; }

 private:
  std::string cause_;
  std::vector<IterationRecord> log_;
};

/// Open-loop rollout of the controls from x0. Throws on model errors.
Trajectory rollout(const DiscreteModel& model, const QuadraticCostSpec& cost,
                   const TerminalCost& terminal, const Vector& x0,
                   const std::vector<Vector>& controls);

/// Gauss-Newton backward pass over the nominal. Q_uu is regularized as
/// Q_uu + lambda I; throws RegularizationError if that is not positive definite.
GainSchedule backward_pass(const Trajectory& traj, const DiscreteModel& model,
                           const QuadraticCostSpec& cost, const TerminalCost& terminal,
                           double lambda);

/// u_t = u_t^k + alpha k_t + K_t (x_t^{k+1} - x_t^k) on the nonlinear model.
/// Returns nullopt if the rollout leaves the model's domain or goes non-finite.
std::optional<Trajectory> forward_pass(const Trajectory& traj, const GainSchedule& gains,
                                       double alpha, const DiscreteModel& model,
                                       const QuadraticCostSpec& cost,
                                       const TerminalCost& terminal);

/// Finite-horizon problem: min sum c(x_t, u_t) + terminal(x_T). The horizon is
/// the length of the initial control sequence.
SolveReport solve_fhocp(const DiscreteModel& model, const QuadraticCostSpec& cost,
                        const TerminalCost& terminal, const Vector& x0,
                        std::vector<Vector> initial_controls, const SolverSettings& settings);

SolveReport solve_fhocp(const DiscreteModel& model, const QuadraticCostSpec& cost,
                        const TerminalCost& terminal, const Vector& x0, Index steps,
                        const Vector& control_guess, const SolverSettings& settings);

/// Header: iteration,cost,alpha,lambda,gradient_norm
void write_iteration_log_csv(std::ostream& os, const std::vector<IterationRecord>& log);

struct ClosedLoopSegment {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> stage_costs;
  bool stopped = false;   // stop predicate fired
  bool diverged = false;
  std::string message;
};

/// Runs the time-varying policy u = u*_t + K_t (x - x*_t) from x0 over the
/// nominal's horizon. `stop`, if given, is evaluated on every new state and
/// ends the simulation (the triggering state is kept).
ClosedLoopSegment simulate_tracking(const DiscreteModel& model, const QuadraticCostSpec& cost,
                                    const Trajectory& nominal, const GainSchedule& gains,
                                    const Vector& x0,
                                    const std::function<bool(const Vector&)>& stop = {});

}  // namespace ihoc
