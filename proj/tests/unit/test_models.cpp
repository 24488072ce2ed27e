#include "ihoc/models.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace ihoc {
namespace {

constexpr double kMu = 398600.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector uniform_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

void expect_jacobians_agree(const DiscreteModel& model, const Vector& x, const Vector& u,
                            double tolerance) {
  const auto exact = model.inner().analytic_jacobians(x, u);
  ASSERT_TRUE(exact.has_value());
  const double dt = model.dt();
  const Linearization analytic{Matrix::Identity(x.size(), x.size()) + dt * exact->fx, dt * exact->fu};
  EXPECT_LT(jacobian_mismatch(analytic, jacobians_fd(model, x, u)), tolerance);
}

// ---------------------------------------------------------------------------
// Attitude

TEST(Attitude, OriginIsEquilibrium) {
  const AttitudeModel model;
  EXPECT_LE(model.deriv(Vector::Zero(6), Vector::Zero(3)).norm(), 0.0);
}

TEST(Attitude, KinematicBlockAtOriginIsAxisPermutation) {
  // 3-2-1 angles (psi, theta, phi) at zero attitude: psi' = w3, theta' = w2, phi' = w1.
  const AttitudeModel model;
  const auto jac = model.analytic_jacobians(Vector::Zero(6), Vector::Zero(3));
  ASSERT_TRUE(jac.has_value());
  Matrix3 perm;
  perm << 0, 0, 1, 0, 1, 0, 1, 0, 0;
  EXPECT_LE((jac->fx.topRightCorner(3, 3) - perm).norm(), 1e-15);
  EXPECT_LE(jac->fx.topLeftCorner(3, 3).norm(), 1e-15);
}

TEST(Attitude, TorqueOnlyAcceleration) {
  const AttitudeModel model;
  Vector u(3);
  u << 45.0, -20.0, 75.0;
  const Vector d = model.deriv(Vector::Zero(6), u);
  EXPECT_NEAR(d(3), 0.01, 1e-15);
  EXPECT_NEAR(d(4), -0.01, 1e-15);
  EXPECT_NEAR(d(5), 0.01, 1e-15);
}

TEST(Attitude, TorqueFreeMotionConservesKineticEnergy) {
  // d/dt (0.5 w'Jw) = w'J w_dot = -w'(w x Jw) = 0 and likewise |Jw|.
  std::mt19937_64 rng(11);
  const AttitudeParams p;
  const Matrix3 J_inv = p.J.inverse();
  for (int k = 0; k < 20; ++k) {
    const Vector3 w = uniform_vector(rng, 3, -0.5, 0.5);
    const Vector3 wdot = rigid_body_accel(w, Vector3::Zero(), p.J, J_inv);
    EXPECT_NEAR(w.dot(p.J * wdot), 0.0, 1e-12);
    EXPECT_NEAR((p.J * w).dot(p.J * wdot), 0.0, 1e-9);
  }
}

TEST(Attitude, GimbalSingularityThrows) {
  const AttitudeModel model;
  Vector x = Vector::Zero(6);
  x(1) = 90.0 * kDegToRad;
  EXPECT_THROW(model.deriv(x, Vector::Zero(3)), SingularityError);
  EXPECT_THROW(model.analytic_jacobians(x, Vector::Zero(3)), SingularityError);
  x(1) = 89.0 * kDegToRad;
  EXPECT_NO_THROW(model.deriv(x, Vector::Zero(3)));
}

TEST(Attitude, AnalyticJacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  const DiscreteModel model(std::make_shared<AttitudeModel>(), 0.1);
  for (int k = 0; k < 100; ++k) {
    Vector x(6);
    x << uniform_vector(rng, 3, -1.5, 1.5), uniform_vector(rng, 3, -0.5, 0.5);
    x(1) = uniform(rng, -1.2, 1.2);
    expect_jacobians_agree(model, x, uniform_vector(rng, 3, -100.0, 100.0), 1e-5);
  }
}

TEST(Attitude, RejectsBadInertia) {
  AttitudeParams p;
  p.J(0, 1) = 5.0;
  EXPECT_THROW(AttitudeModel{p}, DomainError);
  p.J = -Matrix3::Identity();
  EXPECT_THROW(AttitudeModel{p}, DomainError);
}

// ---------------------------------------------------------------------------
// Orbits

TEST(Kepler, VisVivaAndConicRadius) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    OrbitalElements el;
    el.a = uniform(rng, 6600.0, 42000.0);
    el.e = uniform(rng, 0.0, 0.9);
    el.i = uniform(rng, 0.0, M_PI);
    el.raan = uniform(rng, 0.0, 2 * M_PI);
    el.argp = uniform(rng, 0.0, 2 * M_PI);
    el.nu = uniform(rng, 0.0, 2 * M_PI);
    const CartesianState s = kepler_to_cartesian(el, kMu);
    const double r = s.r.norm();
    const double vis_viva = kMu * (2.0 / r - 1.0 / el.a);
    EXPECT_LE(std::abs(s.v.squaredNorm() - vis_viva) / vis_viva, 1e-10);
    EXPECT_NEAR(r, el.a * (1 - el.e * el.e) / (1 + el.e * std::cos(el.nu)), 1e-9 * r);
    // The angular momentum makes angle i with the z axis.
    const Vector3 h = s.r.cross(s.v);
    EXPECT_NEAR(h.z() / h.norm(), std::cos(el.i), 1e-12);
  }
}

TEST(Kepler, CircularEquatorialOrbit) {
  OrbitalElements el;
  el.a = 7000.0;
  const CartesianState s = kepler_to_cartesian(el, kMu);
  EXPECT_LE((s.r - Vector3(7000.0, 0.0, 0.0)).norm(), 1e-9);
  EXPECT_LE((s.v - Vector3(0.0, std::sqrt(kMu / 7000.0), 0.0)).norm(), 1e-12);
}

TEST(Kepler, RejectsOpenOrbits) {
  OrbitalElements el;
  el.e = 1.0;
  EXPECT_THROW(kepler_to_cartesian(el, kMu), UnsupportedOrbitError);
  el.e = 0.1;
  el.a = -1.0;
  EXPECT_THROW(kepler_to_cartesian(el, kMu), UnsupportedOrbitError);
}

// ---------------------------------------------------------------------------
// Rendezvous

Vector rendezvous_state(std::mt19937_64& rng) {
  OrbitalElements target;
  target.a = 7000.0;
  target.e = 0.1;
  target.i = 0.7;
  target.nu = uniform(rng, 0.0, 6.0);
  const CartesianState t = kepler_to_cartesian(target, kMu);
  Vector x(13);
  x << uniform_vector(rng, 3, -300.0, 300.0), uniform_vector(rng, 3, -0.3, 0.3),
      uniform(rng, 500.0, 1000.0), t.r, t.v;
  return x;
}

TEST(Rendezvous, ZeroErrorAndThrustIsRelativeEquilibrium) {
  std::mt19937_64 rng(2);
  Vector x = rendezvous_state(rng);
  x.head<6>().setZero();
  const Vector d = RendezvousModel().deriv(x, Vector::Zero(3));
  EXPECT_LE(d.head<7>().norm(), 1e-15);
  // The target follows two-body motion.
  EXPECT_LE((d.segment<3>(10) + point_mass_gravity(x.segment<3>(7), kMu)).norm(), 1e-15);
}

TEST(Rendezvous, MassFlowProportionalToThrust) {
  std::mt19937_64 rng(4);
  const Vector x = rendezvous_state(rng);
  Vector u(3);
  u << 3.0, 0.0, 4.0;
  EXPECT_NEAR(RendezvousModel().deriv(x, u)(6), -5e-4 * 5.0, 1e-18);
}

TEST(Rendezvous, AnalyticJacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  const DiscreteModel model(std::make_shared<RendezvousModel>(), 2.0);
  for (int k = 0; k < 100; ++k) {
    expect_jacobians_agree(model, rendezvous_state(rng), uniform_vector(rng, 3, -1.0, 1.0), 1e-5);
  }
}

TEST(Rendezvous, FrozenTargetModelMatchesFullModelErrorBlock) {
  std::mt19937_64 rng(12);
  const Vector x = rendezvous_state(rng);
  const Vector u = uniform_vector(rng, 3, -1.0, 1.0);
  const FrozenTargetErrorModel frozen({}, x.segment<3>(7), x(6));
  const Vector full = RendezvousModel().deriv(x, u);
  EXPECT_LE((frozen.deriv(x.head<6>(), u) - full.head<6>()).norm(), 1e-15);
  EXPECT_LE(frozen.deriv(Vector::Zero(6), Vector::Zero(3)).norm(), 1e-18);
}

TEST(Rendezvous, GravityJacobian) {
  const Vector3 r(7000.0, -1200.0, 400.0);
  const Matrix3 G = point_mass_gravity_jacobian(r, kMu);
  const double h = 1e-3;
  for (int j = 0; j < 3; ++j) {
    Vector3 a = r, b = r;
    a(j) += h;
    b(j) -= h;
    const Vector3 col = (point_mass_gravity(a, kMu) - point_mass_gravity(b, kMu)) / (2 * h);
    EXPECT_LE((G.col(j) - col).norm(), 1e-9 * G.norm());
  }
}

TEST(Rendezvous, RejectsInvalidStates) {
  std::mt19937_64 rng(1);
  Vector x = rendezvous_state(rng);
  x(6) = 0.0;
  EXPECT_THROW(RendezvousModel().deriv(x, Vector::Zero(3)), DomainError);
  x = rendezvous_state(rng);
  x.segment<3>(7).setZero();
  EXPECT_THROW(RendezvousModel().deriv(x, Vector::Zero(3)), DomainError);
}

// ---------------------------------------------------------------------------
// Lander

TEST(Lander, ScalingRoundTrip) {
  std::mt19937_64 rng(6);
  const Vector x = uniform_vector(rng, 13, -2000.0, 2000.0);
  const Vector u = uniform_vector(rng, 6, -5000.0, 5000.0);
  const auto [xs, us] = apply_scaling(x, u);
  EXPECT_NEAR(xs(6), x(6) / 1e4, 1e-15);
  EXPECT_NEAR(xs(9), x(9) / 1e3, 1e-15);
  EXPECT_NEAR(us(0), u(0) / 1e2, 1e-15);
  EXPECT_NEAR(us(3), u(3) / 1e4, 1e-15);
  EXPECT_DOUBLE_EQ(xs(12), x(12));
  const auto [xr, ur] = remove_scaling(xs, us);
  EXPECT_LE((xr - x).norm(), 1e-12 * x.norm());
  EXPECT_LE((ur - u).norm(), 1e-12 * u.norm());
}

TEST(Lander, HoverHoldsStill) {
  const LanderParams p;
  const LanderModel model(p);
  Vector x = Vector::Zero(13);
  x(8) = 0.5;       // 5 km altitude, scaled
  x(12) = 900.0;
  const Vector u = scale_lander_control(hover_control_unscaled(900.0, p));
  const Vector d = model.deriv(x, u);
  EXPECT_LE(d.head<12>().norm(), 1e-15);
  EXPECT_NEAR(d(12), -900.0 / 225.0, 1e-12);
}

TEST(Lander, MassFlowAtReferenceThrust) {
  // |u| = Isp g_ref = 225 * 3.7114 N gives one kilogram per second.
  const LanderModel model;
  Vector x = Vector::Zero(13);
  x(12) = 1000.0;
  Vector u_si = Vector::Zero(6);
  u_si << 0, 0, 0, 835.065 * 0.6, 0.0, 835.065 * 0.8;
  EXPECT_NEAR(model.deriv(x, scale_lander_control(u_si))(12), -1.0, 1e-12);
}

TEST(Lander, AnalyticJacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  const DiscreteModel model(std::make_shared<LanderModel>(), 0.2);
  for (int k = 0; k < 100; ++k) {
    Vector x_si(13);
    x_si << uniform_vector(rng, 3, -1.0, 1.0), uniform_vector(rng, 3, -0.5, 0.5),
        uniform_vector(rng, 3, -2000.0, 2000.0), uniform_vector(rng, 3, -100.0, 100.0),
        uniform(rng, 500.0, 1000.0);
    x_si(1) = uniform(rng, -1.2, 1.2);
    Vector u_si(6);
    u_si << uniform_vector(rng, 3, -100.0, 100.0), uniform_vector(rng, 3, -3000.0, 3000.0);
    const auto [x, u] = apply_scaling(x_si, u_si);
    expect_jacobians_agree(model, x, u, 1e-5);
  }
}

TEST(Lander, RejectsBadParameters) {
  LanderParams p;
  p.isp = 0.0;
  EXPECT_THROW(LanderModel{p}, DomainError);
  Vector x = Vector::Zero(13);
  EXPECT_THROW(LanderModel().deriv(x, Vector::Zero(6)), DomainError);
}

}  // namespace
}  // namespace ihoc
