#include "ihoc/app/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ihoc/acocp.hpp"
#include "ihoc/models.hpp"

namespace ihoc::app {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// ---------------------------------------------------------------------------
// Reading typed values with field paths in the error messages.

double read_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long read_integer(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v)) return static_cast<long>(v);
  }
  throw ConfigError(path, "expected an integer");
}

bool read_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string read_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> read_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_double(j[i], indexed(path, i)));
  return out;
}

/// A flat list is a diagonal; a list of equal-length lists is a full matrix.
Matrix read_matrix(const Json& j, const std::string& path, bool allow_diagonal) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty list");
  if (!j[0].is_array()) {
    if (!allow_diagonal) throw ConfigError(path, "expected a list of rows");
    const std::vector<double> d = read_list(j, path);
    return Eigen::Map<const Vector>(d.data(), static_cast<Index>(d.size())).asDiagonal();
  }
  const std::size_t cols = j[0].size();
  Matrix M(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::vector<double> row = read_list(j[r], indexed(path, r));
    if (row.size() != cols) throw ConfigError(indexed(path, r), "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) M(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
  }
  return M;
}

Json emit_list(const std::vector<double>& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(x);
  return j;
}

Json emit_rows(const Matrix& M) {
  Json j = Json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    j.push_back(row);
  }
  return j;
}

/// Diagonal matrices are written as their diagonal.
Json emit_matrix(const Matrix& M) {
  if (M.rows() == M.cols() && M.isApprox(Matrix(M.diagonal().asDiagonal()), 0.0)) {
    Json j = Json::array();
    for (Index i = 0; i < M.rows(); ++i) j.push_back(M(i, i));
    return j;
  }
  return emit_rows(M);
}

// ---------------------------------------------------------------------------
// Overlay with unknown-key rejection. The defaults document is the schema.

void overlay(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string field = join(path, it.key());
    if (!base.contains(it.key())) throw ConfigError(field, "unknown key");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), field);
    } else {
      slot = it.value();
    }
  }
}

// ---------------------------------------------------------------------------

ElementsConfig read_elements(const Json& j, const std::string& path) {
  ElementsConfig el;
  el.a = read_double(j.at("a"), join(path, "a"));
  el.e = read_double(j.at("e"), join(path, "e"));
  el.i_deg = read_double(j.at("i_deg"), join(path, "i_deg"));
  el.raan_deg = read_double(j.at("raan_deg"), join(path, "raan_deg"));
  el.argp_deg = read_double(j.at("argp_deg"), join(path, "argp_deg"));
  el.nu_deg = read_double(j.at("nu_deg"), join(path, "nu_deg"));
  return el;
}

Json emit_elements(const ElementsConfig& el) {
  return Json{{"a", el.a},           {"e", el.e},       {"i_deg", el.i_deg},
              {"raan_deg", el.raan_deg}, {"argp_deg", el.argp_deg}, {"nu_deg", el.nu_deg}};
}

ScenarioConfig from_json(const Json& j) {
  ScenarioConfig c;
  c.scenario = parse_scenario_id(read_string(j.at("scenario"), "scenario"));
  c.dt = read_double(j.at("dt"), "dt");
  c.horizon = read_double(j.at("horizon"), "horizon");
  c.transfer_time = read_double(j.at("transfer_time"), "transfer_time");
  c.initial_state = read_list(j.at("initial_state"), "initial_state");
  c.goal_state = read_list(j.at("goal_state"), "goal_state");
  c.Q = read_matrix(j.at("Q"), "Q", true);
  c.R = read_matrix(j.at("R"), "R", true);

  const Json& s = j.at("solver");
  c.solver.max_iterations = static_cast<int>(read_integer(s.at("max_iterations"), "solver.max_iterations"));
  c.solver.tolerance = read_double(s.at("tolerance"), "solver.tolerance");
  c.solver.line_search_factor = read_double(s.at("line_search_factor"), "solver.line_search_factor");
  c.solver.line_search_steps = static_cast<int>(read_integer(s.at("line_search_steps"), "solver.line_search_steps"));
  c.solver.lambda_init = read_double(s.at("lambda_init"), "solver.lambda_init");
  c.solver.lambda_min = read_double(s.at("lambda_min"), "solver.lambda_min");
  c.solver.lambda_max = read_double(s.at("lambda_max"), "solver.lambda_max");
  c.solver.lambda_growth = read_double(s.at("lambda_growth"), "solver.lambda_growth");
  c.solver.lambda_shrink = read_double(s.at("lambda_shrink"), "solver.lambda_shrink");

  const Json& t = j.at("terminal_set");
  if (!t.at("level").is_null()) c.terminal_set.level = read_double(t.at("level"), "terminal_set.level");
  c.terminal_set.epsilon = read_double(t.at("epsilon"), "terminal_set.epsilon");
  c.terminal_set.floor = read_double(t.at("floor"), "terminal_set.floor");
  c.terminal_set.max_steps = read_integer(t.at("max_steps"), "terminal_set.max_steps");
  c.terminal_set.state_tolerance = read_double(t.at("state_tolerance"), "terminal_set.state_tolerance");
  c.terminal_set.divergence_cap = read_double(t.at("divergence_cap"), "terminal_set.divergence_cap");

  const Json& w = j.at("sweep");
  c.sweep.grid = read_list(w.at("grid"), "sweep.grid");
  c.sweep.points = static_cast<int>(read_integer(w.at("points"), "sweep.points"));
  c.sweep.lo_fraction = read_double(w.at("lo_fraction"), "sweep.lo_fraction");
  c.sweep.warm_start = read_bool(w.at("warm_start"), "sweep.warm_start");

  const Json& v = j.at("verify");
  c.verify.jacobian_points = static_cast<int>(read_integer(v.at("jacobian_points"), "verify.jacobian_points"));
  c.verify.jacobian_tolerance = read_double(v.at("jacobian_tolerance"), "verify.jacobian_tolerance");
  c.verify.bellman_steps = static_cast<int>(read_integer(v.at("bellman_steps"), "verify.bellman_steps"));
  c.verify.bellman_tolerance = read_double(v.at("bellman_tolerance"), "verify.bellman_tolerance");

  const Json& cv = j.at("convergence");
  c.convergence.M_grid = read_list(cv.at("M_grid"), "convergence.M_grid");
  c.convergence.T_grid = read_list(cv.at("T_grid"), "convergence.T_grid");

  const Json& sim = j.at("simulate");
  c.simulate.perturbation = read_list(sim.at("perturbation"), "simulate.perturbation");
  c.simulate.open_loop = read_bool(sim.at("open_loop"), "simulate.open_loop");

  if (j.contains("attitude")) {
    const Json& a = j.at("attitude");
    c.attitude = AttitudeConfig{read_matrix(a.at("inertia"), "attitude.inertia", true)};
  }
  if (j.contains("rendezvous")) {
    const Json& r = j.at("rendezvous");
    RendezvousConfig rc;
    rc.mu = read_double(r.at("mu"), "rendezvous.mu");
    rc.alpha = read_double(r.at("alpha"), "rendezvous.alpha");
    rc.mass = read_double(r.at("mass"), "rendezvous.mass");
    rc.min_radius = read_double(r.at("min_radius"), "rendezvous.min_radius");
    rc.chaser = read_elements(r.at("chaser"), "rendezvous.chaser");
    rc.target = read_elements(r.at("target"), "rendezvous.target");
    c.rendezvous = rc;
  }
  if (j.contains("soft_landing")) {
    const Json& l = j.at("soft_landing");
    LandingConfig lc;
    lc.inertia = read_matrix(l.at("inertia"), "soft_landing.inertia", true);
    lc.isp = read_double(l.at("isp"), "soft_landing.isp");
    lc.g_ref = read_double(l.at("g_ref"), "soft_landing.g_ref");
    lc.mass = read_double(l.at("mass"), "soft_landing.mass");
    lc.penalty_weight = read_double(l.at("penalty_weight"), "soft_landing.penalty_weight");
    lc.penalty_rate = read_double(l.at("penalty_rate"), "soft_landing.penalty_rate");
    lc.touchdown_speed_limit =
        read_double(l.at("touchdown_speed_limit"), "soft_landing.touchdown_speed_limit");
    c.soft_landing = lc;
  }
  if (j.contains("linear")) {
    const Json& l = j.at("linear");
    c.linear = LinearConfig{read_matrix(l.at("A"), "linear.A", false),
                            read_matrix(l.at("B"), "linear.B", false)};
  }

  const long workers = read_integer(j.at("workers"), "workers");
  if (workers < 0) throw ConfigError("workers", "must be >= 0");
  c.workers = static_cast<unsigned>(workers);
  const long seed = read_integer(j.at("seed"), "seed");
  if (seed < 0) throw ConfigError("seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = read_string(j.at("output_dir"), "output_dir");
  return c;
}

// ---------------------------------------------------------------------------
// Validation helpers.

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void require_multiple_of_dt(double T, double dt, const std::string& field) {
  try {
    (void)horizon_steps(T, dt);
  } catch (const DomainError&) {
    throw ConfigError(field, "must be a positive multiple of dt");
  }
}

void require_symmetric(const Matrix& M, const std::string& field) {
  require(M.rows() == M.cols(), field, "must be square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  require((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, field, "must be symmetric");
}

double min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void require_psd(const Matrix& M, const std::string& field) {
  require_symmetric(M, field);
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  require(min_eigenvalue(M) >= -1e-12 * scale, field, "must be positive semidefinite");
}

void require_pd(const Matrix& M, const std::string& field) {
  require_symmetric(M, field);
  require(min_eigenvalue(M) > 0.0, field, "must be positive definite");
}

void require_dim(const Matrix& M, Index n, const std::string& field) {
  if (M.rows() != n || M.cols() != n) {
    throw ConfigError(field, "expected " + std::to_string(n) + " diagonal entries or a " +
                                 std::to_string(n) + "x" + std::to_string(n) + " matrix, got " +
                                 std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
  }
}

void require_length(const std::vector<double>& v, Index n, const std::string& field) {
  if (static_cast<Index>(v.size()) != n) {
    throw ConfigError(field, "expected " + std::to_string(n) + " entries, got " +
                                 std::to_string(v.size()));
  }
}

void require_not_gimbal_locked(double pitch_deg, const std::string& field) {
  require(std::abs(std::cos(pitch_deg * kDegToRad)) >= kGimbalGuard, field,
          "pitch at the 3-2-1 Euler singularity (|cos theta| < 1e-8)");
}

void validate_elements(const ElementsConfig& el, const std::string& path) {
  require(el.a > 0.0, join(path, "a"), "must be positive");
  require(el.e >= 0.0 && el.e < 1.0, join(path, "e"), "only elliptic orbits (0 <= e < 1) are supported");
}

void validate_time_grid(const std::vector<double>& grid, double dt, const std::string& field) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require_multiple_of_dt(grid[i], dt, indexed(field, i));
    if (i > 0) require(grid[i] > grid[i - 1], indexed(field, i), "grid must be ascending");
  }
}

}  // namespace

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::attitude: return "attitude";
    case ScenarioId::rendezvous: return "rendezvous";
    case ScenarioId::soft_landing: return "soft-landing";
    case ScenarioId::custom_linear: return "custom-linear";
  }
  return "unknown";
}

ScenarioId parse_scenario_id(const std::string& name) {
  if (name == "attitude") return ScenarioId::attitude;
  if (name == "rendezvous") return ScenarioId::rendezvous;
  if (name == "soft-landing") return ScenarioId::soft_landing;
  if (name == "custom-linear") return ScenarioId::custom_linear;
  throw ConfigError("scenario", "unknown scenario '" + name +
                                    "' (attitude | rendezvous | soft-landing | custom-linear)");
}

Index weighted_state_dim(const ScenarioConfig& c) {
  switch (c.scenario) {
    case ScenarioId::attitude: return 6;
    case ScenarioId::rendezvous: return 6;
    case ScenarioId::soft_landing: return 12;
    case ScenarioId::custom_linear: return c.linear ? c.linear->A.rows() : 0;
  }
  return 0;
}

Index control_dim(const ScenarioConfig& c) {
  switch (c.scenario) {
    case ScenarioId::attitude: return 3;
    case ScenarioId::rendezvous: return 3;
    case ScenarioId::soft_landing: return 6;
    case ScenarioId::custom_linear: return c.linear ? c.linear->B.cols() : 0;
  }
  return 0;
}

Index initial_state_dim(const ScenarioConfig& c) {
  // Rendezvous states come from the orbital elements unless given in full.
  if (c.scenario == ScenarioId::rendezvous) return c.initial_state.empty() ? 0 : 13;
  return weighted_state_dim(c);
}

ScenarioConfig default_config(ScenarioId id) {
  ScenarioConfig c;
  c.scenario = id;
  switch (id) {
    case ScenarioId::attitude:
      c.dt = 0.1;
      c.horizon = 200.0;
      c.transfer_time = 80.0;
      c.initial_state = {85.94, -68.75, -120.32, 5.72, -5.72, 2.86};
      c.Q = Matrix::Identity(6, 6);
      c.R = Matrix::Identity(3, 3);
      c.attitude = AttitudeConfig{Eigen::Vector3d(4500.0, 2000.0, 7500.0).asDiagonal()};
      c.verify.bellman_steps = 3;
      break;
    case ScenarioId::rendezvous: {
      c.dt = 2.0;
      c.horizon = 6000.0;
      c.transfer_time = 2400.0;
      c.Q = Matrix::Identity(6, 6);
      c.R = Matrix::Identity(3, 3);
      RendezvousConfig rc;
      rc.chaser = ElementsConfig{7200.0, 0.22, 64.0, 66.0, 28.0, 81.0};
      rc.target = ElementsConfig{7000.0, 0.1, 40.0, 35.0, 10.0, 120.0};
      c.rendezvous = rc;
      c.verify.bellman_steps = 0;
      break;
    }
    case ScenarioId::soft_landing: {
      c.dt = 0.2;
      c.horizon = 30.0;
      c.transfer_time = 30.0;
      c.initial_state = {22.91, 17.18, 11.45, 5.72, 11.45, -11.45, 300.0, -200.0, 1000.0, 100.0, 120.0, 0.0};
      Vector q(12);
      q << 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
      Vector r(6);
      r << 1.0, 1.0, 1.0, 1e-3, 1e-3, 1e-3;
      c.Q = q.asDiagonal();
      c.R = r.asDiagonal();
      LandingConfig lc;
      lc.inertia = Eigen::Vector3d(4500.0, 2000.0, 7500.0).asDiagonal();
      c.soft_landing = lc;
      c.verify.bellman_steps = 0;
      break;
    }
    case ScenarioId::custom_linear:
      // x+ = x + u with c = x^2 + u^2: the cost-to-go is the golden ratio.
      c.dt = 1.0;
      c.horizon = 40.0;
      c.transfer_time = 10.0;
      c.initial_state = {1.0};
      c.Q = Matrix::Constant(1, 1, 2.0);
      c.R = Matrix::Constant(1, 1, 2.0);
      c.linear = LinearConfig{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)};
      c.convergence.M_grid = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
      for (int k = 1; k <= 40; ++k) c.convergence.T_grid.push_back(k);
      c.verify.bellman_steps = 3;
      c.verify.bellman_tolerance = 1e-6;
      break;
  }
  c.goal_state.assign(static_cast<std::size_t>(weighted_state_dim(c)), 0.0);
  return c;
}

Json emit_config(const ScenarioConfig& c) {
  Json j;
  j["scenario"] = to_string(c.scenario);
  j["dt"] = c.dt;
  j["horizon"] = c.horizon;
  j["transfer_time"] = c.transfer_time;
  j["initial_state"] = emit_list(c.initial_state);
  j["goal_state"] = emit_list(c.goal_state);
  j["Q"] = emit_matrix(c.Q);
  j["R"] = emit_matrix(c.R);
  j["solver"] = Json{{"max_iterations", c.solver.max_iterations},
                     {"tolerance", c.solver.tolerance},
                     {"line_search_factor", c.solver.line_search_factor},
                     {"line_search_steps", c.solver.line_search_steps},
                     {"lambda_init", c.solver.lambda_init},
                     {"lambda_min", c.solver.lambda_min},
                     {"lambda_max", c.solver.lambda_max},
                     {"lambda_growth", c.solver.lambda_growth},
                     {"lambda_shrink", c.solver.lambda_shrink}};
  Json level = nullptr;
  if (c.terminal_set.level) level = *c.terminal_set.level;
  j["terminal_set"] = Json{{"level", level},
                           {"epsilon", c.terminal_set.epsilon},
                           {"floor", c.terminal_set.floor},
                           {"max_steps", c.terminal_set.max_steps},
                           {"state_tolerance", c.terminal_set.state_tolerance},
                           {"divergence_cap", c.terminal_set.divergence_cap}};
  j["sweep"] = Json{{"grid", emit_list(c.sweep.grid)},
                    {"points", c.sweep.points},
                    {"lo_fraction", c.sweep.lo_fraction},
                    {"warm_start", c.sweep.warm_start}};
  j["verify"] = Json{{"jacobian_points", c.verify.jacobian_points},
                     {"jacobian_tolerance", c.verify.jacobian_tolerance},
                     {"bellman_steps", c.verify.bellman_steps},
                     {"bellman_tolerance", c.verify.bellman_tolerance}};
  j["convergence"] = Json{{"M_grid", emit_list(c.convergence.M_grid)},
                          {"T_grid", emit_list(c.convergence.T_grid)}};
  j["simulate"] = Json{{"perturbation", emit_list(c.simulate.perturbation)},
                       {"open_loop", c.simulate.open_loop}};
  if (c.attitude) j["attitude"] = Json{{"inertia", emit_matrix(c.attitude->inertia)}};
  if (c.rendezvous) {
    const RendezvousConfig& r = *c.rendezvous;
    j["rendezvous"] = Json{{"mu", r.mu},
                           {"alpha", r.alpha},
                           {"mass", r.mass},
                           {"min_radius", r.min_radius},
                           {"chaser", emit_elements(r.chaser)},
                           {"target", emit_elements(r.target)}};
  }
  if (c.soft_landing) {
    const LandingConfig& l = *c.soft_landing;
    j["soft_landing"] = Json{{"inertia", emit_matrix(l.inertia)},
                             {"isp", l.isp},
                             {"g_ref", l.g_ref},
                             {"mass", l.mass},
                             {"penalty_weight", l.penalty_weight},
                             {"penalty_rate", l.penalty_rate},
                             {"touchdown_speed_limit", l.touchdown_speed_limit}};
  }
  if (c.linear) j["linear"] = Json{{"A", emit_rows(c.linear->A)}, {"B", emit_rows(c.linear->B)}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

void validate(const ScenarioConfig& c) {
  require(c.dt > 0.0, "dt", "must be positive");
  require_multiple_of_dt(c.horizon, c.dt, "horizon");
  require_multiple_of_dt(c.transfer_time, c.dt, "transfer_time");
  require(c.transfer_time <= c.horizon * (1.0 + 1e-12), "transfer_time", "must not exceed the horizon");

  if (c.scenario == ScenarioId::attitude) require(bool(c.attitude), "attitude", "section missing");
  if (c.scenario == ScenarioId::rendezvous) require(bool(c.rendezvous), "rendezvous", "section missing");
  if (c.scenario == ScenarioId::soft_landing) require(bool(c.soft_landing), "soft_landing", "section missing");
  if (c.scenario == ScenarioId::custom_linear) require(bool(c.linear), "linear", "section missing");

  if (c.linear) {
    const Matrix& A = c.linear->A;
    const Matrix& B = c.linear->B;
    require(A.rows() == A.cols(), "linear.A", "must be square");
    require(B.rows() == A.rows(), "linear.B", "must have as many rows as A");
  }

  const Index n = weighted_state_dim(c);
  const Index m = control_dim(c);
  if (c.scenario != ScenarioId::rendezvous || !c.initial_state.empty()) {
    require_length(c.initial_state, c.scenario == ScenarioId::rendezvous ? 13 : n, "initial_state");
  }
  require_length(c.goal_state, n, "goal_state");
  for (std::size_t i = 0; i < c.goal_state.size(); ++i) {
    require(c.goal_state[i] == 0.0, indexed("goal_state", i),
            "only the origin is supported as goal (shift coordinates instead)");
  }
  if (c.scenario == ScenarioId::attitude || c.scenario == ScenarioId::soft_landing) {
    require_not_gimbal_locked(c.initial_state[1], "initial_state[1]");
  }
  if (!c.simulate.perturbation.empty()) {
    require_length(c.simulate.perturbation, static_cast<Index>(c.initial_state.empty() ? 13 : c.initial_state.size()),
                   "simulate.perturbation");
  }

  require_dim(c.Q, n, "Q");
  require_dim(c.R, m, "R");
  require_psd(c.Q, "Q");
  require_pd(c.R, "R");

  const SolverConfig& s = c.solver;
  require(s.max_iterations >= 1, "solver.max_iterations", "must be >= 1");
  require(s.tolerance > 0.0, "solver.tolerance", "must be positive");
  require(s.line_search_factor > 0.0 && s.line_search_factor < 1.0, "solver.line_search_factor",
          "must lie in (0, 1)");
  require(s.line_search_steps >= 1, "solver.line_search_steps", "must be >= 1");
  require(s.lambda_min > 0.0, "solver.lambda_min", "must be positive");
  require(s.lambda_max >= s.lambda_min, "solver.lambda_max", "must be >= lambda_min");
  require(s.lambda_init >= s.lambda_min && s.lambda_init <= s.lambda_max, "solver.lambda_init",
          "must lie in [lambda_min, lambda_max]");
  require(s.lambda_growth > 1.0, "solver.lambda_growth", "must exceed 1");
  require(s.lambda_shrink > 0.0 && s.lambda_shrink < 1.0, "solver.lambda_shrink", "must lie in (0, 1)");

  const TerminalSetConfig& t = c.terminal_set;
  if (t.level) require(*t.level > 0.0, "terminal_set.level", "must be positive");
  require(t.epsilon > 0.0, "terminal_set.epsilon", "must be positive");
  require(t.floor > 0.0, "terminal_set.floor", "must be positive");
  require(t.max_steps >= 0, "terminal_set.max_steps", "must be >= 0");
  require(t.state_tolerance > 0.0, "terminal_set.state_tolerance", "must be positive");
  require(t.divergence_cap > 0.0, "terminal_set.divergence_cap", "must be positive");

  validate_time_grid(c.sweep.grid, c.dt, "sweep.grid");
  require(c.sweep.points >= 1, "sweep.points", "must be >= 1");
  require(c.sweep.lo_fraction > 0.0 && c.sweep.lo_fraction <= 1.0, "sweep.lo_fraction",
          "must lie in (0, 1]");

  require(c.verify.jacobian_points >= 1, "verify.jacobian_points", "must be >= 1");
  require(c.verify.jacobian_tolerance > 0.0, "verify.jacobian_tolerance", "must be positive");
  require(c.verify.bellman_steps >= 0, "verify.bellman_steps", "must be >= 0");
  require(c.verify.bellman_tolerance > 0.0, "verify.bellman_tolerance", "must be positive");

  for (std::size_t i = 0; i < c.convergence.M_grid.size(); ++i) {
    require(c.convergence.M_grid[i] > 0.0, indexed("convergence.M_grid", i), "must be positive");
    if (i > 0) {
      require(c.convergence.M_grid[i] < c.convergence.M_grid[i - 1], indexed("convergence.M_grid", i),
              "grid must be decreasing");
    }
  }
  validate_time_grid(c.convergence.T_grid, c.dt, "convergence.T_grid");

  if (c.attitude) {
    require_dim(c.attitude->inertia, 3, "attitude.inertia");
    require_pd(c.attitude->inertia, "attitude.inertia");
  }
  if (c.rendezvous) {
    const RendezvousConfig& r = *c.rendezvous;
    require(r.mu > 0.0, "rendezvous.mu", "must be positive");
    require(r.alpha > 0.0, "rendezvous.alpha", "must be positive");
    require(r.mass > 0.0, "rendezvous.mass", "must be positive");
    require(r.min_radius > 0.0, "rendezvous.min_radius", "must be positive");
    validate_elements(r.chaser, "rendezvous.chaser");
    validate_elements(r.target, "rendezvous.target");
  }
  if (c.soft_landing) {
    const LandingConfig& l = *c.soft_landing;
    require_dim(l.inertia, 3, "soft_landing.inertia");
    require_pd(l.inertia, "soft_landing.inertia");
    require(l.isp > 0.0, "soft_landing.isp", "must be positive");
    require(l.g_ref > 0.0, "soft_landing.g_ref", "must be positive");
    require(l.mass > 0.0, "soft_landing.mass", "must be positive");
    require(l.penalty_weight >= 0.0, "soft_landing.penalty_weight", "must be >= 0");
    require(l.penalty_rate > 0.0, "soft_landing.penalty_rate", "must be positive");
    require(l.touchdown_speed_limit > 0.0, "soft_landing.touchdown_speed_limit", "must be positive");
  }
}

ScenarioConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be an object");
  if (!doc.contains("scenario")) throw ConfigError("scenario", "required");
  const ScenarioId id = parse_scenario_id(read_string(doc.at("scenario"), "scenario"));
  Json merged = emit_config(default_config(id));
  overlay(merged, doc, "");
  ScenarioConfig c = from_json(merged);
  validate(c);
  return c;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("", "override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    node = &child;
    start = dot + 1;
  }
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  Json doc = Json::object();
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError("", "parse error in '" + path + "': " + e.what());
    }
  }
  for (const std::string& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

}  // namespace ihoc::app
