#include "ihoc/lqr.hpp"

#include <cmath>

namespace ihoc {

namespace {

Matrix riccati_map(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                   const Matrix& P, Matrix* K_out) {
  const Matrix PB = P * B;
  const Matrix S = R + B.transpose() * PB;
  Matrix K = S.ldlt().solve(PB.transpose() * A);
  Matrix next = Q + A.transpose() * P * A - A.transpose() * PB * K;
  if (K_out) *K_out = std::move(K);
  return 0.5 * (next + next.transpose());
}

}  // namespace

double spectral_radius(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(M, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

LqrSolution solve_dare_impl(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                            const DareOptions& options) {
  const Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols()) {
    throw DimensionError("solve_dare: inconsistent matrix shapes");
  }
  Matrix P = 0.5 * (Q + Q.transpose());
  long it = 0;
  bool settled = false;
  while (it < options.max_iterations) {
    ++it;
    Matrix next = riccati_map(A, B, Q, R, P, nullptr);
    if (!next.allFinite()) break;
    const double change = (next - P).norm();
    P = std::move(next);
    if (change <= options.tolerance * std::max(P.norm(), std::numeric_limits<double>::min())) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw StabilizabilityError("solve_dare: Riccati iteration did not converge after " +
                               std::to_string(it) + " iterations; (A, B) may not be stabilizable");
  }
  LqrSolution sol;
  riccati_map(A, B, Q, R, P, &sol.K);
  sol.P = P;
  sol.iterations = it;
  sol.spectral_radius = spectral_radius(A - B * sol.K);
  sol.residual = dare_residual(A, B, Q, R, P);
  if (!(sol.spectral_radius < 1.0)) {
    throw StabilizabilityError("solve_dare: closed loop not stable (spectral radius " +
                               std::to_string(sol.spectral_radius) + ")");
  }
  return sol;
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
  const double scale = P.norm();
  const double diff = (P - riccati_map(A, B, Q, R, P, nullptr)).norm();
  return scale > 0.0 ? diff / scale : diff;
}

Linearization linearize_at_goal(const DiscreteModel& model, const Vector& x_eq,
                                const Vector& u_eq) {
  const Vector next = model.step(x_eq, u_eq);
  const double residual = (next - x_eq).norm();
  if (residual > 1e-9 * (1.0 + x_eq.norm())) {
    throw NotFixedPointError(
        "linearize_at_goal: (x_eq, u_eq) is not a fixed point of the discrete map (residual " +
            std::to_string(residual) + ")",
        residual);
  }
  return jacobians(model, x_eq, u_eq);
}

LqrSolution lqr_for_stage_cost(const Linearization& lin, const Matrix& Q, const Matrix& R,
                               const DareOptions& options) {
  return solve_dare(lin.A, lin.B, 0.5 * Q, 0.5 * R, options);
}

LqrSolution embed_solution(const LqrSolution& reduced, const std::vector<Index>& regulated,
                           Index full_dim) {
  const auto n = static_cast<Index>(regulated.size());
  if (reduced.P.rows() != n) throw DimensionError("embed_solution: index count mismatch");
  LqrSolution full = reduced;
  full.P = Matrix::Zero(full_dim, full_dim);
  full.K = Matrix::Zero(reduced.K.rows(), full_dim);
  for (Index i = 0; i < n; ++i) {
    full.K.col(regulated[i]) = reduced.K.col(i);
    for (Index j = 0; j < n; ++j) full.P(regulated[i], regulated[j]) = reduced.P(i, j);
  }
  full.regulated = regulated;
  return full;
}

Vector regulated_part(const LqrSolution& sol, const Vector& x) {
  if (sol.regulated.empty()) return x;
  Vector z(static_cast<Index>(sol.regulated.size()));
  for (std::size_t i = 0; i < sol.regulated.size(); ++i) z[i] = x[sol.regulated[i]];
  return z;
}

double regulated_norm(const LqrSolution& sol, const Vector& x) {
  return regulated_part(sol, x).norm();
}

RegulationResult regulation_rollout(const DiscreteModel& model, const Vector& x0,
                                    const LqrSolution& sol, const QuadraticCostSpec& cost,
                                    const TerminalSetSpec& stop) {
  RegulationResult out;
  if (!x0.allFinite()) throw DomainError("regulation_rollout: non-finite initial state");
  Vector x = x0;
  out.states.push_back(x);
  for (long k = 0;; ++k) {
    if (regulated_norm(sol, x) < stop.state_tolerance) {
      out.reached_tolerance = true;
      out.tail_value = terminal_value(x, sol.P);
      break;
    }
    if (k >= stop.max_steps) break;
    const Vector u = -sol.K * x;
    const double c = stage_cost(x, u, cost);
    out.cost += c;
    if (!std::isfinite(out.cost) || out.cost > stop.divergence_cap) {
      out.diverged = true;
      out.message = "accumulated regulation cost exceeded cap";
      break;
    }
    try {
      x = model.step(x, u);
    } catch (const Error& e) {
      out.diverged = true;
      out.message = e.what();
      break;
    }
    out.controls.push_back(u);
    out.stage_costs.push_back(c);
    out.states.push_back(x);
  }
  return out;
}

Membership classify_membership(double predicted, const RegulationResult& rollout,
                               const TerminalSetSpec& spec) {
  Membership m;
  m.predicted = predicted;
  m.actual = rollout.cost + rollout.tail_value;
  m.diverged = rollout.diverged;
  m.inside = !rollout.diverged &&
             std::abs(m.actual - m.predicted) <= spec.epsilon * std::max(m.predicted, spec.floor) &&
             m.predicted <= spec.level;
  return m;
}

Membership in_terminal_set(const DiscreteModel& model, const Vector& x, const LqrSolution& sol,
                           const QuadraticCostSpec& cost, const TerminalSetSpec& stop) {
  return classify_membership(terminal_value(x, sol.P),
                             regulation_rollout(model, x, sol, cost, stop), stop);
}

}  // namespace ihoc
