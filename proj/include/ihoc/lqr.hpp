#pragma once

#include <limits>
#include <vector>

#include "ihoc/cost.hpp"
#include "ihoc/dynamics.hpp"

namespace ihoc {

/// Stationary LQR solution. u = -K x; x^T P x is the cost-to-go under the
/// weights it was computed for.
struct LqrSolution {
  Matrix P;
  Matrix K;
  double spectral_radius = 0.0;
  double residual = 0.0;
  long iterations = 0;
  /// State coordinates the regulator drives to zero; empty means all.
  std::vector<Index> regulated;
};

struct DareOptions {
  double tolerance = 1e-12;        // relative change in P (Frobenius)
  long max_iterations = 1000000;
};

LqrSolution solve_dare_impl(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                            const DareOptions& options);

/// Discrete algebraic Riccati equation by backward value iteration from P = Q:
///   P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA,  K = (R + B'PB)^-1 B'PA.
/// Throws StabilizabilityError if the iteration does not settle.
template <typename DA, typename DB, typename DQ, typename DR>
LqrSolution solve_dare(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B,
                       const Eigen::MatrixBase<DQ>& Q, const Eigen::MatrixBase<DR>& R,
                       const DareOptions& options = {}) {
  return solve_dare_impl(A.template cast<double>().eval(), B.template cast<double>().eval(),
                         Q.template cast<double>().eval(), R.template cast<double>().eval(),
                         options);
}

/// Relative Frobenius residual of the Riccati fixed point.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P);

double spectral_radius(const Matrix& M);

/// Jacobians at an equilibrium. Throws NotFixedPointError if
/// |step(x_eq, u_eq) - x_eq| > 1e-9 (1 + |x_eq|).
Linearization linearize_at_goal(const DiscreteModel& model, const Vector& x_eq,
                                const Vector& u_eq);

/// LQR for the stage cost 0.5 (x'Qx + u'Ru): the Riccati equation is solved
/// with (Q/2, R/2) so that x'Px is the exact accumulated stage cost.
LqrSolution lqr_for_stage_cost(const Linearization& lin, const Matrix& Q, const Matrix& R,
                               const DareOptions& options = {});

/// Lift a solution on a subset of coordinates into a full-state solution with
/// zero rows/columns elsewhere.
LqrSolution embed_solution(const LqrSolution& reduced, const std::vector<Index>& regulated,
                           Index full_dim);

/// Norm of the regulated part of x.
double regulated_norm(const LqrSolution& sol, const Vector& x);
Vector regulated_part(const LqrSolution& sol, const Vector& x);

struct TerminalSetSpec {
  double level = std::numeric_limits<double>::infinity();  // M
  double epsilon = 1e-2;          // relative predicted-vs-actual tolerance
  double floor = 1e-8;            // absolute floor for the relative test
  long max_steps = 10000;         // N_reg
  double state_tolerance = 1e-6;
  double divergence_cap = 1e15;
};

struct RegulationResult {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> stage_costs;
  double cost = 0.0;
  /// x'Px at the state where the tolerance stopped the rollout; the cost the
  /// rollout did not accumulate. Zero otherwise.
  double tail_value = 0.0;
  bool reached_tolerance = false;
  bool diverged = false;
  std::string message;
};

/// Closed loop u = -K x on the nonlinear model until the regulated state norm
/// falls below the tolerance or max_steps is reached.
RegulationResult regulation_rollout(const DiscreteModel& model, const Vector& x0,
                                    const LqrSolution& sol, const QuadraticCostSpec& cost,
                                    const TerminalSetSpec& stop);

struct Membership {
  bool inside = false;
  double predicted = 0.0;
  double actual = 0.0;
  bool diverged = false;
};

/// Membership decision from a predicted value and an already computed rollout;
/// the actual cost includes the rollout's tail value.
Membership classify_membership(double predicted, const RegulationResult& rollout,
                               const TerminalSetSpec& spec);

Membership in_terminal_set(const DiscreteModel& model, const Vector& x, const LqrSolution& sol,
                           const QuadraticCostSpec& cost, const TerminalSetSpec& stop);

}  // namespace ihoc
