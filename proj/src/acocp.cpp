#include "ihoc/acocp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace ihoc {

RegulatorFactory goal_regulator(const DiscreteModel& model, const QuadraticCostSpec& cost,
                                const Vector& x_eq, const Vector& u_eq) {
  const Linearization lin = linearize_at_goal(model, x_eq, u_eq);
  auto sol = std::make_shared<const LqrSolution>(lqr_for_stage_cost(lin, cost.Q, cost.R));
  return [sol](const Vector&) { return *sol; };
}

Problem make_linear_problem(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                            const Vector& x0, double dt) {
  DiscreteModel model = make_linear_model(A, B, dt);
  QuadraticCostSpec cost{Q, R, std::nullopt};
  validate(cost);
  const Vector xe = Vector::Zero(A.rows());
  const Vector ue = Vector::Zero(B.cols());
  RegulatorFactory reg = goal_regulator(model, cost, xe, ue);
  return Problem{model, cost, x0, ue, std::move(reg), TerminalSetSpec{}, SolverSettings{}};
}

Problem make_scalar_linear_problem(double x0) {
  return make_linear_problem(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                             Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 2.0),
                             Vector::Constant(1, x0));
}

Index horizon_steps(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("horizon must be positive");
  const double ratio = T / dt;
  const auto steps = static_cast<Index>(std::llround(ratio));
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw DomainError("horizon " + std::to_string(T) + " s is not a positive multiple of dt = " +
                      std::to_string(dt));
  }
  return steps;
}

std::vector<double> log_spaced_grid(double T_max, double dt, int n, double lo_fraction) {
  if (n < 1) throw DomainError("log_spaced_grid: need at least one point");
  std::vector<double> grid;
  const double lo = lo_fraction * T_max;
  for (int k = 0; k < n; ++k) {
    const double frac = n == 1 ? 1.0 : static_cast<double>(k) / (n - 1);
    const double T = lo * std::pow(T_max / lo, frac);
    const double snapped = std::max<double>(1, std::llround(T / dt)) * dt;
    if (grid.empty() || snapped > grid.back() + 0.5 * dt) grid.push_back(snapped);
  }
  return grid;
}

SweepPoint evaluate_transfer(const Problem& problem, Index steps,
                             std::vector<Vector> initial_controls) {
  SweepPoint pt;
  pt.steps = steps;
  pt.T = static_cast<double>(steps) * problem.model.dt();
  try {
    if (!problem.regulator) throw DomainError("problem has no terminal regulator");
    initial_controls.resize(static_cast<std::size_t>(steps), problem.control_guess);
    const Trajectory guess =
        rollout(problem.model, problem.cost, TerminalCost::none(), problem.x0, initial_controls);
    auto regulator = std::make_shared<const LqrSolution>(problem.regulator(guess.states.back()));

    auto plan = std::make_shared<const SolveReport>(
        solve_fhocp(problem.model, problem.cost, TerminalCost::quadratic(regulator->P), problem.x0,
                    std::move(initial_controls), problem.solver));
    const Vector& xT = plan->trajectory.states.back();
    auto regulation = std::make_shared<const RegulationResult>(
        regulation_rollout(problem.model, xT, *regulator, problem.cost, problem.terminal_set));

    pt.ilqr_phase_cost = plan->trajectory.stage_sum();
    pt.terminal_value = terminal_value(xT, regulator->P);
    pt.regulation_cost = regulation->cost;
    pt.total_cost = pt.ilqr_phase_cost + pt.regulation_cost;
    pt.in_omega = classify_membership(pt.terminal_value, *regulation, problem.terminal_set).inside;
    pt.final_state_error = regulated_part(*regulator, xT);
    pt.iterations = plan->iterations;
    pt.status = to_string(plan->status);
    pt.ok = !regulation->diverged;
    if (regulation->diverged) pt.error = "regulation diverged: " + regulation->message;
    pt.plan = std::move(plan);
    pt.regulator = std::move(regulator);
    pt.regulation = std::move(regulation);
  } catch (const Error& e) {
    pt.ok = false;
    pt.status = "failed";
    pt.error = e.what();
  }
  return pt;
}

namespace {

std::vector<Index> grid_steps(const std::vector<double>& T_grid, double dt) {
  if (T_grid.empty()) throw DomainError("transfer-time grid is empty");
  std::vector<Index> steps;
  for (double T : T_grid) steps.push_back(horizon_steps(T, dt));
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

std::vector<Vector> warm_controls(const SweepPoint* previous) {
  if (previous == nullptr || !previous->plan) return {};
  return previous->plan->trajectory.controls;
}

}  // namespace

std::vector<SweepPoint> sweep_transfer_time(const Problem& problem,
                                            const std::vector<double>& T_grid,
                                            const SweepOptions& options) {
  const std::vector<Index> steps = grid_steps(T_grid, problem.model.dt());
  std::vector<SweepPoint> points(steps.size());

  if (options.warm_start || options.workers <= 1) {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const SweepPoint* prev = (options.warm_start && i > 0) ? &points[i - 1] : nullptr;
      points[i] = evaluate_transfer(problem, steps[i], warm_controls(prev));
    }
    return points;
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < steps.size(); i = next++) {
      points[i] = evaluate_transfer(problem, steps[i], {});
    }
  };
  const unsigned n = std::min<unsigned>(options.workers, static_cast<unsigned>(steps.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return points;
}

AcocpSolution solve_acocp(const Problem& problem, double M, const std::vector<double>& T_grid,
                          const SweepOptions& options) {
  if (!(M > 0.0)) throw DomainError("solve_acocp: level M must be positive");
  Problem p = problem;
  p.terminal_set.level = M;
  const std::vector<Index> steps = grid_steps(T_grid, p.model.dt());

  std::vector<SweepPoint> sweep;
  for (Index s : steps) {
    const SweepPoint* prev = (options.warm_start && !sweep.empty()) ? &sweep.back() : nullptr;
    sweep.push_back(evaluate_transfer(p, s, warm_controls(prev)));
    const SweepPoint& pt = sweep.back();
    if (!pt.ok || !pt.in_omega) continue;

    AcocpSolution sol;
    sol.transfer_time = pt.T;
    sol.transfer_steps = pt.steps;
    sol.level = M;
    sol.cost = pt.ilqr_phase_cost + std::max(pt.terminal_value, M);
    sol.point = pt;
    const Trajectory& traj = pt.plan->trajectory;
    sol.states = traj.states;
    sol.controls = traj.controls;
    sol.phase.assign(traj.controls.size(), 1);
    const RegulationResult& reg = *pt.regulation;
    for (std::size_t i = 0; i < reg.controls.size(); ++i) {
      sol.controls.push_back(reg.controls[i]);
      sol.states.push_back(reg.states[i + 1]);
      sol.phase.push_back(2);
    }
    sol.sweep = std::move(sweep);
    return sol;
  }
  throw HittingTimeNotFound("solve_acocp: no grid horizon reaches Omega_M (M = " +
                                std::to_string(M) + ")",
                            std::move(sweep));
}

ClosedLoop two_phase_simulate(const Problem& problem, const SweepPoint& transfer,
                              const SimulateOptions& options) {
  if (!transfer.plan || !transfer.regulator) {
    throw DomainError("two_phase_simulate: transfer point has no solution");
  }
  const Trajectory& nominal = transfer.plan->trajectory;
  const GainSchedule& gains = transfer.plan->gains;
  const LqrSolution& reg = *transfer.regulator;
  const auto& model = problem.model;
  const auto& stop = problem.terminal_set;

  ClosedLoop loop;
  Vector x = problem.x0;
  if (options.perturbation.size() > 0) x += options.perturbation;
  loop.states.push_back(x);
  const bool fixed = options.total_steps > 0;

  auto advance = [&](const Vector& u, int phase) {
    const double c = stage_cost(x, u, problem.cost);
    try {
      x = model.step(x, u);
    } catch (const Error& e) {
      loop.diverged = true;
      loop.message = e.what();
      return false;
    }
    loop.controls.push_back(u);
    loop.stage_costs.push_back(c);
    loop.phase.push_back(phase);
    loop.states.push_back(x);
    (phase == 1 ? loop.phase1_cost : loop.phase2_cost) += c;
    return true;
  };

  for (Index t = 0; t < nominal.horizon(); ++t) {
    if (fixed && static_cast<long>(loop.controls.size()) >= options.total_steps) break;
    Vector u = nominal.controls[t];
    if (!options.open_loop) u += gains.K[t] * (x - nominal.states[t]);
    if (!advance(u, 1)) return loop;
  }
  loop.switch_index = static_cast<Index>(loop.states.size()) - 1;
  loop.pre_switch_state = x;

  for (long k = 0;; ++k) {
    if (fixed) {
      if (static_cast<long>(loop.controls.size()) >= options.total_steps) break;
    } else if (regulated_norm(reg, x) < stop.state_tolerance || k >= stop.max_steps) {
      break;
    }
    if (!advance(-reg.K * x, 2)) break;
    if (!std::isfinite(loop.phase2_cost) || loop.phase2_cost > stop.divergence_cap) {
      loop.diverged = true;
      loop.message = "regulation cost exceeded cap";
      break;
    }
  }
  return loop;
}

std::vector<ConvergenceRow> convergence_study(const Problem& linear_problem,
                                              const std::vector<double>& M_grid,
                                              const std::vector<double>& T_grid) {
  if (!linear_problem.regulator) throw DomainError("convergence_study: problem has no regulator");
  const LqrSolution reg = linear_problem.regulator(linear_problem.x0);
  const double optimal = terminal_value(linear_problem.x0, reg.P);
  std::vector<ConvergenceRow> rows;
  for (double M : M_grid) {
    const AcocpSolution sol = solve_acocp(linear_problem, M, T_grid, SweepOptions{false, 1});
    rows.push_back({M, sol.cost, optimal, sol.cost - optimal, sol.transfer_time});
  }
  return rows;
}

BellmanReport bellman_check(const Problem& problem, const AcocpSolution& solution,
                            Index steps_to_check) {
  const SweepPoint& pt = solution.point;
  if (!pt.plan || !pt.regulator) throw DomainError("bellman_check: solution has no plan");
  const Trajectory& plan = pt.plan->trajectory;
  const Matrix& P = pt.regulator->P;
  const double M = solution.level;
  const Index N = plan.horizon();
  const Index checks = std::min(steps_to_check, N - 1);

  auto ac_cost = [&](const Trajectory& tr) {
    return tr.stage_sum() + std::max(terminal_value(tr.states.back(), P), M);
  };

  // J(x_t) for t = 0..checks, re-solved with the same final time.
  std::vector<double> J(static_cast<std::size_t>(checks + 1), 0.0);
  std::vector<bool> ok(static_cast<std::size_t>(checks + 1), true);
  std::vector<std::string> notes(static_cast<std::size_t>(checks + 1));
  J[0] = ac_cost(plan);
  for (Index t = 1; t <= checks; ++t) {
    if (terminal_value(plan.states[t - 1], P) <= M) {
      ok[t] = false;
      continue;
    }
    try {
      // Same settings as the original solve: cold start from the control guess.
      const SolveReport r = solve_fhocp(problem.model, problem.cost, TerminalCost::quadratic(P),
                                        plan.states[t], N - t, problem.control_guess,
                                        problem.solver);
      J[t] = ac_cost(r.trajectory);
    } catch (const Error& e) {
      ok[t] = false;
      notes[t] = e.what();
    }
  }

  BellmanReport report;
  for (Index t = 0; t < checks; ++t) {
    BellmanResidual r;
    r.t = t;
    r.stage = plan.stage_costs[t];
    r.checked = terminal_value(plan.states[t], P) > M;
    if (!r.checked) {
      r.note = "inside Omega_M";
      report.residuals.push_back(r);
      continue;
    }
    r.available = ok[t] && ok[t + 1];
    r.note = notes[t + 1];
    if (r.available) {
      r.cost_to_go = J[t];
      r.cost_to_go_next = J[t + 1];
      r.residual = std::abs(J[t] - r.stage - J[t + 1]) / std::max(J[t], 1.0);
      report.max_residual = std::max(report.max_residual, r.residual);
      if (!(J[t + 1] < J[t])) report.lyapunov_decreasing = false;
    }
    report.residuals.push_back(r);
  }
  return report;
}

LyapunovTail lyapunov_tail_check(const ClosedLoop& loop, const LqrSolution& regulator, double M) {
  LyapunovTail out;
  const std::size_t n = loop.stage_costs.size();
  out.tail.assign(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) out.tail[i] = out.tail[i + 1] + loop.stage_costs[i];
  for (std::size_t i = 0; i < n; ++i) {
    if (terminal_value(loop.states[i], regulator.P) <= M) continue;
    ++out.checked;
    if (!(out.tail[i + 1] < out.tail[i])) out.strictly_decreasing = false;
  }
  return out;
}

}  // namespace ihoc
