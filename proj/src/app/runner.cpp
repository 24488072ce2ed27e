#include "ihoc/app/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "ihoc/app/io.hpp"
#include "ihoc/app/scenario.hpp"
#include "ihoc/models.hpp"

namespace ihoc::app {
namespace {

namespace fs = std::filesystem;

struct Context {
  std::string command;
  const Scenario& scenario;
  fs::path out;
  RunResult& result;
  Json summary;

  std::string path(const std::string& name) const { return (out / name).string(); }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(path(name), content);
    result.artifacts.push_back(path(name));
    spdlog::debug("wrote {}", path(name));
  }
};

/// A run that produced results but must report a nonzero exit.
class RunFailure : public Error {
 public:
  RunFailure(std::string kind, const std::string& what, int exit_code)
      : Error(what), kind_(std::move(kind)), exit_code_(exit_code) {}
  std::string kind() const override { return kind_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string kind_;
  int exit_code_;
};

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Vector> map_states(const Scenario& sc, const std::vector<Vector>& xs) {
  std::vector<Vector> out;
  out.reserve(xs.size());
  for (const Vector& x : xs) out.push_back(sc.state_out(x));
  return out;
}

std::vector<Vector> map_controls(const Scenario& sc, const std::vector<Vector>& us) {
  std::vector<Vector> out;
  out.reserve(us.size());
  for (const Vector& u : us) out.push_back(sc.control_out(u));
  return out;
}

std::string trajectory_document(const Scenario& sc, const std::vector<Vector>& states,
                                const std::vector<Vector>& controls,
                                const std::vector<double>& stage_costs,
                                const std::vector<int>& phase) {
  return trajectory_csv(sc.config.dt, sc.state_names, sc.control_names, map_states(sc, states),
                        map_controls(sc, controls), stage_costs, phase);
}

Json names_json(const std::vector<std::string>& names, const std::vector<Index>& idx) {
  Json j = Json::array();
  for (Index i : idx) j.push_back(names[static_cast<std::size_t>(i)]);
  return j;
}

Json error_json(const Scenario& sc, const Vector& error) {
  return Json{{"names", names_json(sc.state_names, sc.error_indices)},
              {"values", to_json(error)},
              {"norm", error.norm()}};
}

Json point_json(const Scenario& sc, const SweepPoint& p) {
  Json j{{"T", p.T},
         {"steps", p.steps},
         {"ok", p.ok},
         {"status", p.status},
         {"iterations", p.iterations}};
  if (!p.ok) {
    j["error"] = p.error;
    return j;
  }
  j["ilqr_phase_cost"] = p.ilqr_phase_cost;
  j["regulation_cost"] = p.regulation_cost;
  j["terminal_value"] = p.terminal_value;
  j["total_cost"] = p.total_cost;
  j["in_omega"] = p.in_omega;
  j["final_state_error"] = error_json(sc, sc.goal_error(p.plan->trajectory.states.back()));
  return j;
}

double level_or(const ScenarioConfig& c, double fallback) {
  return c.terminal_set.level.value_or(fallback);
}

SweepPoint fixed_transfer(const Scenario& sc) {
  SweepPoint pt = evaluate_transfer(sc.problem, sc.transfer_steps(), {});
  if (!pt.plan) throw RunFailure("solve_failed", "transfer solve failed: " + pt.error, kExitFailure);
  return pt;
}

SolveReport single_phase_plan(const Scenario& sc) {
  const Problem& p = sc.problem;
  return solve_fhocp(p.model, p.cost, TerminalCost::none(), p.x0, sc.horizon_steps(),
                     p.control_guess, p.solver);
}

Vector perturbation(const Scenario& sc) {
  const auto& d = sc.config.simulate.perturbation;
  if (d.empty()) return {};
  const Vector v = Eigen::Map<const Vector>(d.data(), static_cast<Index>(d.size()));
  // Perturbations are given in output units; only the lander is scaled.
  if (sc.config.scenario == ScenarioId::soft_landing) return scale_lander_state(v);
  return v;
}

// ---------------------------------------------------------------------------

void cmd_solve(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  if (!sc.two_phase) {
    const SolveReport report = single_phase_plan(sc);
    const Trajectory& tr = report.trajectory;
    ctx.write("trajectory.csv", trajectory_document(sc, tr.states, tr.controls, tr.stage_costs, {}));
    ctx.write("iterations.csv", iteration_csv(report.log));
    ctx.summary["horizon"] = sc.config.horizon;
    ctx.summary["total_cost"] = tr.total_cost;
    ctx.summary["iterations"] = report.iterations;
    ctx.summary["status"] = to_string(report.status);
    ctx.summary["final_state_error"] = error_json(sc, sc.goal_error(tr.states.back()));
    return;
  }
  const SweepPoint pt = fixed_transfer(sc);
  const Trajectory& tr = pt.plan->trajectory;
  ctx.write("trajectory.csv", trajectory_document(sc, tr.states, tr.controls, tr.stage_costs, {}));
  ctx.write("iterations.csv", iteration_csv(pt.plan->log));
  ctx.summary["transfer_time"] = pt.T;
  ctx.summary["result"] = point_json(sc, pt);
  ctx.summary["total_cost"] = pt.ok ? pt.total_cost : std::nan("");
  ctx.summary["iterations"] = pt.iterations;
  ctx.summary["status"] = pt.status;
  ctx.summary["final_state_error"] = error_json(sc, sc.goal_error(tr.states.back()));
  if (!pt.ok) throw RunFailure("instability", pt.error, kExitFailure);
}

void cmd_sweep(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  if (!sc.two_phase) {
    throw ConfigError("scenario", "sweep needs a terminal regulator; " +
                                      to_string(sc.config.scenario) + " is solved single-phase");
  }
  const std::vector<double> grid = sc.sweep_grid();
  SweepOptions options{sc.config.sweep.warm_start, resolve_workers(sc.config.workers)};
  spdlog::info("sweeping {} transfer times (warm start {}, {} workers)", grid.size(),
               options.warm_start, options.warm_start ? 1u : options.workers);
  const std::vector<SweepPoint> points = sweep_transfer_time(sc.problem, grid, options);
  ctx.write("sweep.csv", sweep_csv(points));

  Json rows = Json::array();
  std::vector<double> failed;
  for (const SweepPoint& p : points) {
    rows.push_back(point_json(sc, p));
    if (!p.ok) failed.push_back(p.T);
  }
  ctx.summary["points"] = rows;
  if (sc.config.terminal_set.level) {
    Json hit = nullptr;
    for (const SweepPoint& p : points) {
      if (p.ok && p.in_omega) {
        hit = p.T;
        break;
      }
    }
    ctx.summary["first_hitting_time"] = hit;
  }
  if (!failed.empty()) {
    std::string list;
    for (double T : failed) list += (list.empty() ? "" : ", ") + format_number(T);
    throw RunFailure("sweep_incomplete", "solves failed at T = " + list, kExitFailure);
  }
}

void simulate_single_phase(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  const SolveReport report = single_phase_plan(sc);
  Vector x0 = sc.problem.x0;
  const Vector dx = perturbation(sc);
  if (dx.size() > 0) x0 += dx;
  auto on_ground = [](const Vector& x) { return x[lander_index::kAltitude] <= 0.0; };
  const ClosedLoopSegment seg = simulate_tracking(sc.problem.model, sc.problem.cost,
                                                  report.trajectory, report.gains, x0, on_ground);
  ctx.write("trajectory.csv", trajectory_document(sc, seg.states, seg.controls, seg.stage_costs, {}));
  ctx.write("iterations.csv", iteration_csv(report.log));

  const Touchdown td = find_touchdown(sc, seg.states);
  double closed_loop_cost = 0.0;
  for (double c : seg.stage_costs) closed_loop_cost += c;
  const double limit = sc.config.soft_landing->touchdown_speed_limit;

  Json touchdown{{"reached", td.reached}};
  Vector final_out = sc.state_out(seg.states.back());
  if (td.reached) {
    final_out = td.state;
    const double vz = td.state[lander_index::kVelocity + 2];
    touchdown["time"] = td.time;
    touchdown["step"] = td.index;
    touchdown["vertical_speed"] = vz;
    touchdown["speed_limit"] = limit;
    touchdown["soft"] = std::abs(vz) < limit && report.converged();
  }
  Vector err(static_cast<Index>(sc.error_indices.size()));
  for (std::size_t i = 0; i < sc.error_indices.size(); ++i) {
    err[static_cast<Index>(i)] = final_out[sc.error_indices[i]] - sc.config.goal_state[i];
  }
  ctx.summary["touchdown"] = touchdown;
  ctx.summary["plan_cost"] = report.trajectory.total_cost;
  ctx.summary["closed_loop_cost"] = closed_loop_cost;
  ctx.summary["iterations"] = report.iterations;
  ctx.summary["status"] = to_string(report.status);
  ctx.summary["final_state_error"] = error_json(sc, err);
  ctx.summary["final_mass"] = final_out[lander_index::kMass];
  if (seg.diverged) throw RunFailure("instability", seg.message, kExitFailure);
}

void cmd_simulate(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  if (!sc.two_phase) {
    simulate_single_phase(ctx);
    return;
  }
  SweepPoint pt;
  if (sc.config.terminal_set.level) {
    const AcocpSolution sol = solve_acocp(sc.problem, *sc.config.terminal_set.level,
                                          sc.sweep_grid(), {sc.config.sweep.warm_start, 1});
    pt = sol.point;
    ctx.summary["acocp_cost"] = sol.cost;
  } else {
    pt = fixed_transfer(sc);
  }
  SimulateOptions options;
  options.perturbation = perturbation(sc);
  options.total_steps = static_cast<long>(sc.horizon_steps());
  options.open_loop = sc.config.simulate.open_loop;
  const ClosedLoop loop = two_phase_simulate(sc.problem, pt, options);
  ctx.write("trajectory.csv",
            trajectory_document(sc, loop.states, loop.controls, loop.stage_costs, loop.phase));
  ctx.write("iterations.csv", iteration_csv(pt.plan->log));

  const double M = level_or(sc.config, pt.terminal_value);
  const LyapunovTail tail = lyapunov_tail_check(loop, *pt.regulator, M);
  ctx.summary["transfer_time"] = pt.T;
  ctx.summary["switch_time"] = static_cast<double>(loop.switch_index) * sc.config.dt;
  ctx.summary["level"] = M;
  ctx.summary["transfer"] = point_json(sc, pt);
  ctx.summary["phase1_cost"] = loop.phase1_cost;
  ctx.summary["phase2_cost"] = loop.phase2_cost;
  ctx.summary["total_cost"] = loop.total_cost();
  ctx.summary["iterations"] = pt.iterations;
  ctx.summary["lyapunov"] = Json{{"checked", tail.checked},
                                 {"strictly_decreasing", tail.strictly_decreasing}};
  ctx.summary["diverged"] = loop.diverged;
  ctx.summary["final_state_error"] = error_json(sc, sc.goal_error(loop.states.back()));
  if (loop.diverged) {
    ctx.summary["pre_switch_state"] = to_json(sc.state_out(loop.pre_switch_state));
    throw RunFailure("instability", "regulation diverged: " + loop.message, kExitFailure);
  }
}

// ---------------------------------------------------------------------------
// verify

/// Fourth-order central differences of the stage cost (gradient) and of its
/// analytic gradient (Hessian). Steps are relative to each coordinate; the
/// altitude step is set in physical units when a penalty scales it.
double cost_derivative_mismatch(const Vector& x, const Vector& u, const QuadraticCostSpec& spec) {
  const Index n = x.size();
  const Index m = u.size();
  Vector z(n + m);
  z << x, u;
  auto split_cost = [&](const Vector& w) { return stage_cost(w.head(n), w.tail(m), spec); };
  auto split_grad = [&](const Vector& w) {
    const CostDerivatives d = cost_derivatives(w.head(n), w.tail(m), spec);
    Vector g(n + m);
    g << d.lx, d.lu;
    return g;
  };
  Vector fd_g(n + m);
  Matrix fd_H(n + m, n + m);
  for (Index j = 0; j < n + m; ++j) {
    double h = 1e-4 * std::max(1.0, std::abs(z[j]));
    if (spec.penalty && j == spec.penalty->index) h /= std::max(1.0, spec.penalty->scale);
    auto shifted = [&](double k) {
      Vector w = z;
      w[j] += k * h;
      return w;
    };
    fd_g[j] = (-split_cost(shifted(2)) + 8 * split_cost(shifted(1)) - 8 * split_cost(shifted(-1)) +
               split_cost(shifted(-2))) / (12 * h);
    fd_H.col(j) = (-split_grad(shifted(2)) + 8 * split_grad(shifted(1)) -
                   8 * split_grad(shifted(-1)) + split_grad(shifted(-2))) / (12 * h);
  }
  const CostDerivatives d = cost_derivatives(x, u, spec);
  Vector g(n + m);
  g << d.lx, d.lu;
  Matrix H = Matrix::Zero(n + m, n + m);
  H.topLeftCorner(n, n) = d.lxx;
  H.bottomRightCorner(m, m) = d.luu;
  auto rel = [](double diff, double ref) { return diff / std::max(ref, 1e-12); };
  return std::max(rel((g - fd_g).norm(), std::max(g.norm(), fd_g.norm())),
                  rel((H - fd_H).norm(), std::max(H.norm(), fd_H.norm())));
}

void cmd_verify(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  const Problem& p = sc.problem;
  const VerifyConfig& vc = sc.config.verify;
  bool pass = true;
  Json checks;

  std::mt19937_64 rng(sc.config.seed);
  double jac_max = 0.0, cost_max = 0.0;
  for (int k = 0; k < vc.jacobian_points; ++k) {
    const auto [x, u] = sample_point(sc, rng);
    jac_max = std::max(jac_max, jacobian_mismatch(jacobians_fd(p.model, x, u), jacobians(p.model, x, u)));
    cost_max = std::max(cost_max, cost_derivative_mismatch(x, u, p.cost));
  }
  const bool analytic = p.model.inner().analytic_jacobians(p.x0, p.control_guess).has_value();
  const bool jac_ok = jac_max < vc.jacobian_tolerance;
  const bool cost_ok = cost_max < 1e-6;
  checks["jacobians"] = Json{{"points", vc.jacobian_points}, {"analytic", analytic},
                             {"max_relative_error", jac_max}, {"tolerance", vc.jacobian_tolerance},
                             {"pass", jac_ok}};
  checks["cost_derivatives"] = Json{{"points", vc.jacobian_points}, {"max_relative_error", cost_max},
                                    {"tolerance", 1e-6}, {"pass", cost_ok}};
  pass = pass && jac_ok && cost_ok;

  try {
    const LqrSolution reg = p.regulator(p.x0);
    const bool ok = reg.residual < 1e-9 && reg.spectral_radius < 1.0;
    checks["riccati"] = Json{{"available", true}, {"residual", reg.residual},
                             {"spectral_radius", reg.spectral_radius},
                             {"iterations", reg.iterations}, {"pass", ok}};
    pass = pass && ok;
  } catch (const NotFixedPointError& e) {
    // Expected for the lander: hover thrust keeps the goal off equilibrium.
    checks["riccati"] = Json{{"available", false}, {"reason", e.kind()}, {"message", e.what()},
                             {"pass", !sc.two_phase}};
    pass = pass && !sc.two_phase;
  }

  if (sc.two_phase && vc.bellman_steps > 0) {
    const SweepPoint pt = fixed_transfer(sc);
    const double M = level_or(sc.config, pt.terminal_value);
    const AcocpSolution sol = solve_acocp(p, M, {sc.config.transfer_time}, {false, 1});
    const BellmanReport br = bellman_check(p, sol, vc.bellman_steps);
    Json rows = Json::array();
    bool ok = br.lyapunov_decreasing;
    for (const BellmanResidual& r : br.residuals) {
      Json row{{"t", r.t}, {"checked", r.checked}, {"available", r.available}};
      if (r.checked && r.available) {
        row["cost_to_go"] = r.cost_to_go;
        row["stage_cost"] = r.stage;
        row["cost_to_go_next"] = r.cost_to_go_next;
        row["residual"] = r.residual;
        ok = ok && r.residual < vc.bellman_tolerance;
      } else if (r.checked) {
        ok = false;
      }
      if (!r.note.empty()) row["note"] = r.note;
      rows.push_back(row);
    }
    const ClosedLoop loop = two_phase_simulate(p, sol.point);
    const LyapunovTail tail = lyapunov_tail_check(loop, *sol.point.regulator, M);
    ok = ok && tail.strictly_decreasing && !loop.diverged;
    checks["bellman"] = Json{{"level", M}, {"transfer_time", sol.transfer_time},
                             {"residuals", rows}, {"max_residual", br.max_residual},
                             {"tolerance", vc.bellman_tolerance},
                             {"lyapunov_decreasing", br.lyapunov_decreasing},
                             {"tail_checked", tail.checked},
                             {"tail_strictly_decreasing", tail.strictly_decreasing},
                             {"pass", ok}};
    pass = pass && ok;
  }

  checks["pass"] = pass;
  ctx.write("verify.json", checks.dump(2) + "\n");
  ctx.summary["verify"] = checks;
  if (!pass) throw RunFailure("verification_failed", "one or more checks failed", kExitVerification);
}

void cmd_convergence(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  if (sc.config.scenario != ScenarioId::custom_linear) {
    throw ConfigError("scenario", "convergence needs an exact linear optimum; use custom-linear");
  }
  if (sc.config.convergence.M_grid.empty()) throw ConfigError("convergence.M_grid", "must not be empty");
  std::vector<double> T_grid = sc.config.convergence.T_grid;
  if (T_grid.empty()) {
    for (Index k = 1; k <= sc.horizon_steps(); ++k) T_grid.push_back(static_cast<double>(k) * sc.config.dt);
  }
  const std::vector<ConvergenceRow> rows = convergence_study(sc.problem, sc.config.convergence.M_grid, T_grid);
  ctx.write("convergence.csv", convergence_csv(rows));
  Json table = Json::array();
  bool nonnegative = true;
  for (const ConvergenceRow& r : rows) {
    table.push_back(Json{{"M", r.M}, {"cost", r.cost}, {"optimal", r.optimal}, {"gap", r.gap},
                         {"transfer_time", r.transfer_time}});
    nonnegative = nonnegative && r.gap >= -1e-9;
  }
  ctx.summary["rows"] = table;
  ctx.summary["optimal"] = rows.front().optimal;
  ctx.summary["finest_gap"] = rows.back().gap;
  ctx.summary["gaps_nonnegative"] = nonnegative;
}

Json artifact_schemas() {
  return Json{{"summary.json", kSummarySchema},     {"trajectory.csv", kTrajectorySchema},
              {"sweep.csv", kSweepSchema},         {"iterations.csv", kIterationSchema},
              {"convergence.csv", kConvergenceSchema}};
}

}  // namespace

Json error_document(const std::string& command, const std::string& scenario,
                    const std::string& kind, const std::string& message) {
  return Json{{"schema", kSummarySchema},
              {"command", command},
              {"scenario", scenario},
              {"error", Json{{"kind", kind}, {"message", message}}}};
}

RunResult run(const std::string& command, const ScenarioConfig& config) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  const std::string scenario_name = to_string(config.scenario);
  const fs::path out = config.output_dir.empty() ? fs::path(".") : fs::path(config.output_dir);

  auto fail = [&](const std::string& kind, const std::string& message, int code, Json partial) {
    spdlog::error("{} {}: {} ({})", command, scenario_name, message, kind);
    Json doc = error_document(command, scenario_name, kind, message);
    if (!partial.is_null()) doc["partial"] = std::move(partial);
    result.exit_code = code;
    result.summary = doc;
    try {
      write_json_atomic((out / "error.json").string(), doc);
      result.artifacts.push_back((out / "error.json").string());
    } catch (const std::exception& e) {
      spdlog::error("could not write error.json: {}", e.what());
    }
  };

  Json partial;
  try {
    const Scenario scenario = build_scenario(config);
    Context ctx{command, scenario, out, result, Json{}};
    ctx.summary["schema"] = kSummarySchema;
    ctx.summary["command"] = command;
    ctx.summary["scenario"] = scenario_name;
    ctx.summary["artifact_schemas"] = artifact_schemas();
    ctx.summary["config"] = emit_config(config);

    spdlog::info("{} {} (dt {}, horizon {})", command, scenario_name, config.dt, config.horizon);
    try {
      if (command == "solve") {
        cmd_solve(ctx);
      } else if (command == "sweep") {
        cmd_sweep(ctx);
      } else if (command == "simulate") {
        cmd_simulate(ctx);
      } else if (command == "verify") {
        cmd_verify(ctx);
      } else if (command == "convergence") {
        cmd_convergence(ctx);
      } else {
        throw ConfigError("command", "unknown command '" + command + "'");
      }
    } catch (...) {
      partial = ctx.summary;
      throw;
    }
    ctx.summary["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json_atomic(ctx.path("summary.json"), ctx.summary);
    result.artifacts.push_back(ctx.path("summary.json"));
    result.summary = std::move(ctx.summary);
  } catch (const RunFailure& e) {
    fail(e.kind(), e.what(), e.exit_code(), partial);
  } catch (const ConfigError& e) {
    fail(e.kind(), e.what(), kExitConfig, partial);
  } catch (const Error& e) {
    fail(e.kind(), e.what(), kExitFailure, partial);
  } catch (const std::exception& e) {
    fail("internal", e.what(), kExitFailure, partial);
  }
  return result;
}

}  // namespace ihoc::app
