#include "ihoc/app/scenario.hpp"

#include <cmath>
#include <numbers>

#include "ihoc/models.hpp"

namespace ihoc::app {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Weights written for boundary units b = S x become S W S on solver units x.
Matrix to_solver_weights(const Matrix& W, const Vector& S) {
  return S.asDiagonal() * W * S.asDiagonal();
}

std::vector<Index> iota(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

TerminalSetSpec terminal_spec(const ScenarioConfig& c) {
  TerminalSetSpec t;
  t.level = c.terminal_set.level.value_or(std::numeric_limits<double>::infinity());
  t.epsilon = c.terminal_set.epsilon;
  t.floor = c.terminal_set.floor;
  t.max_steps = c.terminal_set.max_steps > 0 ? c.terminal_set.max_steps
                                             : 10 * ihoc::horizon_steps(c.horizon, c.dt);
  t.state_tolerance = c.terminal_set.state_tolerance;
  t.divergence_cap = c.terminal_set.divergence_cap;
  return t;
}

SolverSettings solver_settings(const SolverConfig& s) {
  SolverSettings out;
  out.max_iterations = s.max_iterations;
  out.tolerance = s.tolerance;
  out.alphas.clear();
  double a = 1.0;
  for (int i = 0; i < s.line_search_steps; ++i, a *= s.line_search_factor) out.alphas.push_back(a);
  out.lambda_init = s.lambda_init;
  out.lambda_min = s.lambda_min;
  out.lambda_max = s.lambda_max;
  out.lambda_growth = s.lambda_growth;
  out.lambda_shrink = s.lambda_shrink;
  out.validate();
  return out;
}

OrbitalElements to_elements(const ElementsConfig& e) {
  return OrbitalElements{e.a, e.e, e.i_deg * kDegToRad, e.raan_deg * kDegToRad,
                         e.argp_deg * kDegToRad, e.nu_deg * kDegToRad};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

/// Degrees -> radians on the first six (attitude) coordinates.
Vector attitude_block_to_radians(Vector x) {
  x.head<6>() *= kDegToRad;
  return x;
}

Scenario build_attitude(const ScenarioConfig& c) {
  AttitudeParams params;
  params.J = c.attitude->inertia;
  auto model = std::make_shared<AttitudeModel>(params);
  DiscreteModel discrete(model, c.dt);

  const Vector S = Vector::Constant(6, kRadToDeg);
  QuadraticCostSpec cost{to_solver_weights(c.Q, S), c.R, std::nullopt};
  validate(cost);
  const Vector x0 = attitude_block_to_radians(to_vector(c.initial_state));

  Scenario s{c,
             Problem{discrete, cost, x0, Vector::Zero(3),
                     goal_regulator(discrete, cost, Vector::Zero(6), Vector::Zero(3)),
                     terminal_spec(c), solver_settings(c.solver)},
             true, model->state_names(), model->control_names(), iota(6),
             [](const Vector& x) { return x; }, [](const Vector& u) { return u; },
             [](const Vector& x) { return x; }};
  return s;
}

Scenario build_rendezvous(const ScenarioConfig& c) {
  const RendezvousConfig& rc = *c.rendezvous;
  RendezvousParams params{rc.mu, rc.alpha, rc.min_radius};
  auto model = std::make_shared<RendezvousModel>(params);
  DiscreteModel discrete(model, c.dt);

  Vector x0(13);
  if (c.initial_state.empty()) {
    const CartesianState chaser = kepler_to_cartesian(to_elements(rc.chaser), rc.mu);
    const CartesianState target = kepler_to_cartesian(to_elements(rc.target), rc.mu);
    x0 << target.r - chaser.r, target.v - chaser.v, rc.mass, target.r, target.v;
  } else {
    x0 = to_vector(c.initial_state);
  }

  Matrix Q = Matrix::Zero(13, 13);
  Q.topLeftCorner(6, 6) = c.Q;
  QuadraticCostSpec cost{Q, c.R, std::nullopt};
  validate(cost);

  // The full model has no equilibrium at zero error (the target keeps
  // orbiting), so the regulator is designed on the error dynamics with the
  // target position and chaser mass frozen at the transfer state.
  const double dt = c.dt;
  const Matrix Qe = c.Q;
  const Matrix Re = c.R;
  RegulatorFactory regulator = [params, dt, Qe, Re](const Vector& x_transfer) {
    namespace ri = rendezvous_index;
    auto frozen = std::make_shared<FrozenTargetErrorModel>(
        params, Vector3(x_transfer.segment<3>(ri::kTargetPos)), x_transfer[ri::kMass]);
    const DiscreteModel reduced(frozen, dt);
    const Linearization lin = linearize_at_goal(reduced, Vector::Zero(6), Vector::Zero(3));
    return embed_solution(lqr_for_stage_cost(lin, Qe, Re), iota(6), 13);
  };

  Scenario s{c,
             Problem{discrete, cost, x0, Vector::Zero(3), std::move(regulator), terminal_spec(c),
                     solver_settings(c.solver)},
             true, model->state_names(), model->control_names(), iota(6),
             [](const Vector& x) { return x; }, [](const Vector& u) { return u; },
             [](const Vector& x) { return x; }};
  return s;
}

Scenario build_soft_landing(const ScenarioConfig& c) {
  const LandingConfig& lc = *c.soft_landing;
  LanderParams params;
  params.J = lc.inertia;
  params.isp = lc.isp;
  params.g_ref = lc.g_ref;
  params.m0 = lc.mass;
  params.penalty_weight = lc.penalty_weight;
  params.penalty_rate = lc.penalty_rate;
  const LanderScaling scaling = params.scaling;
  auto model = std::make_shared<LanderModel>(params);
  DiscreteModel discrete(model, c.dt);

  // Boundary units per solver unit: degrees, metres, m/s, N m and N.
  Vector Sx(12);
  Sx << Vector::Constant(6, kRadToDeg), Vector::Constant(3, scaling.position),
      Vector::Constant(3, scaling.velocity);
  Vector Su(6);
  Su << Vector::Constant(3, scaling.torque), Vector::Constant(3, scaling.thrust);
  Matrix Q = Matrix::Zero(13, 13);
  Q.topLeftCorner(12, 12) = to_solver_weights(c.Q, Sx);
  // The penalty acts on the physical altitude in metres.
  AltitudePenalty penalty{lc.penalty_weight, lc.penalty_rate, lander_index::kAltitude,
                          scaling.position};
  QuadraticCostSpec cost{Q, to_solver_weights(c.R, Su), penalty};
  validate(cost);

  Vector x_si(13);
  x_si << attitude_block_to_radians(to_vector(c.initial_state)), lc.mass;
  const Vector x0 = scale_lander_state(x_si, scaling);
  const Vector guess = scale_lander_control(hover_control_unscaled(lc.mass, params), scaling);

  // Hover needs thrust and burns mass, so the goal is not an equilibrium and
  // no terminal regulator exists; asking for one reports why.
  RegulatorFactory regulator = [discrete](const Vector& x_transfer) -> LqrSolution {
    Vector goal = Vector::Zero(13);
    goal[lander_index::kMass] = x_transfer[lander_index::kMass];
    (void)linearize_at_goal(discrete, goal, Vector::Zero(6));
    throw NotFixedPointError("soft landing has no terminal regulator", 0.0);
  };

  Scenario s{c,
             Problem{discrete, cost, x0, guess, std::move(regulator), terminal_spec(c),
                     solver_settings(c.solver)},
             false, model->state_names(), model->control_names(), iota(12),
             [scaling](const Vector& x) { return unscale_lander_state(x, scaling); },
             [scaling](const Vector& u) { return unscale_lander_control(u, scaling); },
             [scaling](const Vector& x) { return scale_lander_state(x, scaling); }};
  return s;
}

Scenario build_custom_linear(const ScenarioConfig& c) {
  const Vector x0 = to_vector(c.initial_state);
  Problem p = make_linear_problem(c.linear->A, c.linear->B, c.Q, c.R, x0, c.dt);
  p.terminal_set = terminal_spec(c);
  p.solver = solver_settings(c.solver);
  const Index n = c.linear->A.rows();
  std::vector<std::string> xs, us;
  for (Index i = 0; i < n; ++i) xs.push_back("x" + std::to_string(i + 1));
  for (Index i = 0; i < c.linear->B.cols(); ++i) us.push_back("u" + std::to_string(i + 1));
  Scenario s{c,
             std::move(p),
             true, xs, us, iota(n),
             [](const Vector& x) { return x; }, [](const Vector& u) { return u; },
             [](const Vector& x) { return x; }};
  return s;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector uniform_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

Vector random_attitude(std::mt19937_64& rng) {
  Vector x(6);
  x << uniform(rng, -std::numbers::pi, std::numbers::pi), uniform(rng, -1.4, 1.4),
      uniform(rng, -std::numbers::pi, std::numbers::pi), uniform_vector(rng, 3, -0.2, 0.2);
  return x;
}

}  // namespace

Index Scenario::horizon_steps() const { return ihoc::horizon_steps(config.horizon, config.dt); }

Index Scenario::transfer_steps() const {
  return ihoc::horizon_steps(config.transfer_time, config.dt);
}

std::vector<double> Scenario::sweep_grid() const {
  if (!config.sweep.grid.empty()) return config.sweep.grid;
  return log_spaced_grid(config.horizon, config.dt, config.sweep.points, config.sweep.lo_fraction);
}

Vector Scenario::goal_error(const Vector& x) const {
  const Vector out = state_out(x);
  Vector e(static_cast<Index>(error_indices.size()));
  for (std::size_t i = 0; i < error_indices.size(); ++i) {
    e[static_cast<Index>(i)] = out[error_indices[i]] - config.goal_state[i];
  }
  return e;
}

Scenario build_scenario(const ScenarioConfig& config) {
  validate(config);
  switch (config.scenario) {
    case ScenarioId::attitude: return build_attitude(config);
    case ScenarioId::rendezvous: return build_rendezvous(config);
    case ScenarioId::soft_landing: return build_soft_landing(config);
    case ScenarioId::custom_linear: return build_custom_linear(config);
  }
  throw ConfigError("scenario", "unsupported scenario");
}

std::pair<Vector, Vector> sample_point(const Scenario& scenario, std::mt19937_64& rng) {
  switch (scenario.config.scenario) {
    case ScenarioId::attitude:
      return {random_attitude(rng), uniform_vector(rng, 3, -10.0, 10.0)};
    case ScenarioId::rendezvous: {
      const double mu = scenario.config.rendezvous->mu;
      OrbitalElements el{uniform(rng, 6800.0, 8000.0),     uniform(rng, 0.0, 0.3),
                         uniform(rng, 0.0, std::numbers::pi), uniform(rng, 0.0, 2 * std::numbers::pi),
                         uniform(rng, 0.0, 2 * std::numbers::pi), uniform(rng, 0.0, 2 * std::numbers::pi)};
      const CartesianState t = kepler_to_cartesian(el, mu);
      Vector x(13);
      x << uniform_vector(rng, 3, -50.0, 50.0), uniform_vector(rng, 3, -0.05, 0.05),
          uniform(rng, 500.0, 1500.0), t.r, t.v;
      return {x, uniform_vector(rng, 3, -5.0, 5.0)};
    }
    case ScenarioId::soft_landing: {
      Vector x(13);
      x << random_attitude(rng), uniform_vector(rng, 2, -0.05, 0.05), uniform(rng, 0.0, 0.1),
          uniform_vector(rng, 3, -0.1, 0.1), uniform(rng, 500.0, 1500.0);
      Vector u(6);
      u << uniform_vector(rng, 3, -1.0, 1.0), uniform_vector(rng, 3, -1.0, 1.0);
      return {x, u};
    }
    case ScenarioId::custom_linear: {
      std::normal_distribution<double> n01;
      const Index n = scenario.problem.model.state_dim();
      const Index m = scenario.problem.model.control_dim();
      Vector x(n), u(m);
      for (Index i = 0; i < n; ++i) x[i] = n01(rng);
      for (Index i = 0; i < m; ++i) u[i] = n01(rng);
      return {x, u};
    }
  }
  throw ConfigError("scenario", "unsupported scenario");
}

Touchdown find_touchdown(const Scenario& scenario, const std::vector<Vector>& states) {
  Touchdown td;
  if (scenario.config.scenario != ScenarioId::soft_landing) return td;
  const Index k = lander_index::kAltitude;
  for (std::size_t i = 1; i < states.size(); ++i) {
    const Vector cur = scenario.state_out(states[i]);
    if (cur[k] > 0.0) continue;
    const Vector prev = scenario.state_out(states[i - 1]);
    const double s = prev[k] / (prev[k] - cur[k]);
    td.reached = true;
    td.index = static_cast<Index>(i);
    td.time = (static_cast<double>(i - 1) + s) * scenario.config.dt;
    td.state = prev + s * (cur - prev);
    return td;
  }
  return td;
}

}  // namespace ihoc::app
