#include "ihoc/ilqr.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace ihoc {

double Trajectory::stage_sum() const {
  double s = 0.0;
  for (double c : stage_costs) s += c;
  return s;
}

double TerminalCost::value(const Vector& x, const QuadraticCostSpec& cost) const {
  double v = 0.0;
  if (P) v += terminal_value(x, *P);
  if (include_state_cost) v += state_cost(x, cost);
  return v;
}

std::vector<double> SolverSettings::default_alphas() {
  std::vector<double> a;
  double alpha = 1.0;
  for (int i = 0; i < 16; ++i) {
    a.push_back(alpha);
    alpha *= 0.7;
  }
  return a;
}

void SolverSettings::validate() const {
  if (max_iterations <= 0) throw DomainError("solver: max_iterations must be positive");
  if (!(tolerance > 0.0)) throw DomainError("solver: tolerance must be positive");
  if (alphas.empty() || alphas.front() != 1.0) {
    throw DomainError("solver: line-search schedule must start at 1");
  }
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!(alphas[i] < alphas[i - 1]) || !(alphas[i] > 0.0)) {
      throw DomainError("solver: line-search schedule must be strictly decreasing and positive");
    }
  }
  if (!(lambda_min > 0.0) || !(lambda_init >= lambda_min) || !(lambda_max >= lambda_init)) {
    throw DomainError("solver: require 0 < lambda_min <= lambda_init <= lambda_max");
  }
  if (!(lambda_growth > 1.0) || !(lambda_shrink > 0.0 && lambda_shrink < 1.0)) {
    throw DomainError("solver: require lambda_growth > 1 and 0 < lambda_shrink < 1");
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stalled: return "stalled";
  }
  return "unknown";
}

Trajectory rollout(const DiscreteModel& model, const QuadraticCostSpec& cost,
                   const TerminalCost& terminal, const Vector& x0,
                   const std::vector<Vector>& controls) {
  Trajectory traj;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  traj.controls = controls;
  traj.stage_costs.reserve(controls.size());
  for (const auto& u : controls) {
    const Vector& x = traj.states.back();
    traj.stage_costs.push_back(stage_cost(x, u, cost));
    traj.states.push_back(model.step(x, u));
  }
  traj.terminal_cost = terminal.value(traj.states.back(), cost);
  traj.total_cost = traj.stage_sum() + traj.terminal_cost;
  return traj;
}

GainSchedule backward_pass(const Trajectory& traj, const DiscreteModel& model,
                           const QuadraticCostSpec& cost, const TerminalCost& terminal,
                           double lambda) {
  const Index T = traj.horizon();
  const Index nx = model.state_dim();
  const Index nu = model.control_dim();
  const Vector& xT = traj.states.back();

  Vector Vx = Vector::Zero(nx);
  Matrix Vxx = Matrix::Zero(nx, nx);
  if (terminal.P) {
    Vx += terminal_gradient(xT, *terminal.P);
    Vxx += 2.0 * *terminal.P;
  }
  if (terminal.include_state_cost) {
    const auto d = cost_derivatives(xT, Vector::Zero(nu), cost);
    Vx += d.lx;
    Vxx += d.lxx;
  }

  GainSchedule gains;
  gains.k.resize(T);
  gains.K.resize(T);
  gains.lambda = lambda;
  const Matrix reg = lambda * Matrix::Identity(nu, nu);

  for (Index t = T - 1; t >= 0; --t) {
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];
    const Linearization lin = jacobians(model, x, u);
    const CostDerivatives l = cost_derivatives(x, u, cost);

    const Vector Qx = l.lx + lin.A.transpose() * Vx;
    const Vector Qu = l.lu + lin.B.transpose() * Vx;
    const Matrix VxxA = Vxx * lin.A;
    const Matrix Qxx = l.lxx + lin.A.transpose() * VxxA;
    const Matrix Qux = lin.B.transpose() * VxxA;
    const Matrix Quu = l.luu + lin.B.transpose() * Vxx * lin.B;

    Eigen::LLT<Matrix> llt(0.5 * (Quu + Quu.transpose()) + reg);
    if (llt.info() != Eigen::Success) {
      throw RegularizationError("backward_pass: Q_uu + lambda I not positive definite at t = " +
                                std::to_string(t) + " (lambda = " + std::to_string(lambda) + ")");
    }
    Vector k = -llt.solve(Qu);
    Matrix K = -llt.solve(Qux);

    gains.dV1 += k.dot(Qu);
    gains.dV2 += 0.5 * k.dot(Quu * k);
    gains.gradient_norm = std::max(gains.gradient_norm, Qu.norm());

    Vx = Qx + K.transpose() * (Quu * k) + K.transpose() * Qu + Qux.transpose() * k;
    Matrix next = Qxx + K.transpose() * Quu * K + K.transpose() * Qux + Qux.transpose() * K;
    Vxx = 0.5 * (next + next.transpose());

    gains.k[t] = std::move(k);
    gains.K[t] = std::move(K);
  }
  return gains;
}

std::optional<Trajectory> forward_pass(const Trajectory& traj, const GainSchedule& gains,
                                       double alpha, const DiscreteModel& model,
                                       const QuadraticCostSpec& cost,
                                       const TerminalCost& terminal) {
  const Index T = traj.horizon();
  Trajectory next;
  next.states.reserve(T + 1);
  next.controls.reserve(T);
  next.stage_costs.reserve(T);
  next.states.push_back(traj.states.front());
  try {
    for (Index t = 0; t < T; ++t) {
      const Vector& x = next.states.back();
      Vector u = traj.controls[t] + alpha * gains.k[t] + gains.K[t] * (x - traj.states[t]);
      const double c = stage_cost(x, u, cost);
      Vector xn = model.step(x, u);
      if (!std::isfinite(c) || !xn.allFinite()) return std::nullopt;
      next.stage_costs.push_back(c);
      next.controls.push_back(std::move(u));
      next.states.push_back(std::move(xn));
    }
    next.terminal_cost = terminal.value(next.states.back(), cost);
  } catch (const Error&) {
    return std::nullopt;
  }
  next.total_cost = next.stage_sum() + next.terminal_cost;
  if (!std::isfinite(next.total_cost)) return std::nullopt;
  return next;
}

SolveReport solve_fhocp(const DiscreteModel& model, const QuadraticCostSpec& cost,
                        const TerminalCost& terminal, const Vector& x0,
                        std::vector<Vector> initial_controls, const SolverSettings& settings) {
  settings.validate();
  if (initial_controls.empty()) throw DomainError("solve_fhocp: horizon must be at least 1");
  if (!x0.allFinite()) throw DomainError("solve_fhocp: non-finite initial state");

  SolveReport report;
  try {
    report.trajectory = rollout(model, cost, terminal, x0, initial_controls);
  } catch (const Error& e) {
    throw SolveError(std::string("solve_fhocp: initial rollout failed: ") + e.what(), e.kind(), {});
  }
  if (!std::isfinite(report.trajectory.total_cost)) {
    throw SolveError("solve_fhocp: initial rollout has non-finite cost", "divergence", {});
  }

  constexpr double kTiny = std::numeric_limits<double>::min();
  double lambda = settings.lambda_init;
  report.log.push_back({0, report.trajectory.total_cost, 0.0, lambda, 0.0, true});

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    report.iterations = iter;
    GainSchedule gains;
    for (;;) {
      try {
        gains = backward_pass(report.trajectory, model, cost, terminal, lambda);
        break;
      } catch (const RegularizationError& e) {
        lambda *= settings.lambda_growth;
        if (lambda > settings.lambda_max) {
          throw SolveError(e.what(), e.kind(), report.log);
        }
      }
    }
    report.gains = gains;

    const double J = report.trajectory.total_cost;
    const double scale = std::max(std::abs(J), kTiny);
    if (gains.expected_reduction(1.0) <= settings.tolerance * scale) {
      report.log.push_back({iter, J, 0.0, lambda, gains.gradient_norm, false});
      report.status = SolveStatus::converged;
      return report;
    }

    bool accepted = false;
    for (double alpha : settings.alphas) {
      auto candidate = forward_pass(report.trajectory, gains, alpha, model, cost, terminal);
      if (candidate && candidate->total_cost < J) {
        report.trajectory = std::move(*candidate);
        report.log.push_back({iter, report.trajectory.total_cost, alpha, lambda,
                              gains.gradient_norm, true});
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      report.log.push_back({iter, J, 0.0, lambda, gains.gradient_norm, false});
      lambda *= settings.lambda_growth;
      if (lambda > settings.lambda_max) {
        report.status = SolveStatus::stalled;
        return report;
      }
      continue;
    }

    lambda = std::max(lambda * settings.lambda_shrink, settings.lambda_min);
    const double rel = (J - report.trajectory.total_cost) / scale;
    if (rel < settings.tolerance) {
      report.status = SolveStatus::converged;
      // Gains must describe the returned nominal.
      try {
        report.gains = backward_pass(report.trajectory, model, cost, terminal, lambda);
      } catch (const RegularizationError&) {
      }
      return report;
    }
  }
  report.status = SolveStatus::max_iterations;
  try {
    report.gains = backward_pass(report.trajectory, model, cost, terminal, lambda);
  } catch (const RegularizationError&) {
  }
  return report;
}

SolveReport solve_fhocp(const DiscreteModel& model, const QuadraticCostSpec& cost,
                        const TerminalCost& terminal, const Vector& x0, Index steps,
                        const Vector& control_guess, const SolverSettings& settings) {
  if (steps < 1) throw DomainError("solve_fhocp: horizon must be at least 1");
  require_dim(control_guess, model.control_dim(), "solve_fhocp control guess");
  return solve_fhocp(model, cost, terminal, x0,
                     std::vector<Vector>(static_cast<std::size_t>(steps), control_guess), settings);
}

void write_iteration_log_csv(std::ostream& os, const std::vector<IterationRecord>& log) {
  os << "iteration,cost,alpha,lambda,gradient_norm\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.cost, r.alpha,
                  r.lambda, r.gradient_norm);
    os << buf;
  }
}

ClosedLoopSegment simulate_tracking(const DiscreteModel& model, const QuadraticCostSpec& cost,
                                    const Trajectory& nominal, const GainSchedule& gains,
                                    const Vector& x0,
                                    const std::function<bool(const Vector&)>& stop) {
  ClosedLoopSegment seg;
  seg.states.push_back(x0);
  const Index T = nominal.horizon();
  for (Index t = 0; t < T; ++t) {
    const Vector& x = seg.states.back();
    Vector u = nominal.controls[t];
    if (t < static_cast<Index>(gains.K.size())) u += gains.K[t] * (x - nominal.states[t]);
    const double c = stage_cost(x, u, cost);
    Vector xn;
    try {
      xn = model.step(x, u);
    } catch (const Error& e) {
      seg.diverged = true;
      seg.message = e.what();
      break;
    }
    seg.stage_costs.push_back(c);
    seg.controls.push_back(std::move(u));
    seg.states.push_back(std::move(xn));
    if (stop && stop(seg.states.back())) {
      seg.stopped = true;
      break;
    }
  }
  return seg;
}

}  // namespace ihoc
