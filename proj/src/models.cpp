#include "ihoc/models.hpp"

#include <cmath>

namespace ihoc {

namespace {

void check_gimbal(double theta, const Vector& x) {
  if (std::abs(std::cos(theta)) < kGimbalGuard) {
    throw SingularityError("3-2-1 Euler kinematics singular at theta = " + std::to_string(theta),
                           x);
  }
}

Vector3 safe_unit(const Vector3& v) {
  const double n = v.norm();
  if (n == 0.0) return Vector3::Zero();
  return v / n;
}

}  // namespace

Matrix3 skew(const Vector3& v) {
  Matrix3 S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

Vector3 euler_321_rates(const Vector3& angles, const Vector3& omega) {
  const double theta = angles[1];
  const double phi = angles[2];
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const double a = sp * omega[1] + cp * omega[2];
  return {a / ct, cp * omega[1] - sp * omega[2], omega[0] + st / ct * a};
}

std::pair<Matrix3, Matrix3> euler_321_rates_jacobian(const Vector3& angles, const Vector3& omega) {
  const double theta = angles[1];
  const double phi = angles[2];
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const double tt = st / ct;
  const double a = sp * omega[1] + cp * omega[2];
  const double a_phi = cp * omega[1] - sp * omega[2];

  Matrix3 d_angles = Matrix3::Zero();
  d_angles(0, 1) = a * st / (ct * ct);
  d_angles(0, 2) = a_phi / ct;
  d_angles(1, 2) = -a;
  d_angles(2, 1) = a / (ct * ct);
  d_angles(2, 2) = tt * a_phi;

  Matrix3 d_omega;
  d_omega << 0.0, sp / ct, cp / ct,
             0.0, cp, -sp,
             1.0, tt * sp, tt * cp;
  return {d_angles, d_omega};
}

Vector3 rigid_body_accel(const Vector3& omega, const Vector3& torque, const Matrix3& J,
                         const Matrix3& J_inv) {
  return J_inv * (torque - omega.cross(J * omega));
}

Matrix3 rigid_body_accel_jacobian(const Vector3& omega, const Matrix3& J, const Matrix3& J_inv) {
  // d(w x Jw)/dw = [w]x J - [Jw]x
  return -J_inv * (skew(omega) * J - skew(J * omega));
}

// ---------------------------------------------------------------------------

Vector attitude_deriv(const Vector& x, const Vector& torque, const AttitudeParams& p) {
  return AttitudeModel(p).deriv(x, torque);
}

AttitudeModel::AttitudeModel(AttitudeParams params) : params_(params) {
  if (!params_.J.isApprox(params_.J.transpose())) {
    throw DomainError("AttitudeParams: inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(params_.J);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw DomainError("AttitudeParams: inertia must be positive definite");
  }
  J_inv_ = params_.J.inverse();
}

Vector AttitudeModel::deriv(const Vector& x, const Vector& u) const {
  require_dim(x, 6, "attitude state");
  require_dim(u, 3, "attitude torque");
  check_gimbal(x[1], x);
  const Vector3 angles = x.head<3>();
  const Vector3 omega = x.tail<3>();
  Vector out(6);
  out.head<3>() = euler_321_rates(angles, omega);
  out.tail<3>() = rigid_body_accel(omega, u.head<3>(), params_.J, J_inv_);
  return out;
}

std::optional<ContinuousJacobians> AttitudeModel::analytic_jacobians(const Vector& x,
                                                                     const Vector& u) const {
  require_dim(x, 6, "attitude state");
  require_dim(u, 3, "attitude torque");
  check_gimbal(x[1], x);
  const Vector3 angles = x.head<3>();
  const Vector3 omega = x.tail<3>();
  ContinuousJacobians jac{Matrix::Zero(6, 6), Matrix::Zero(6, 3)};
  auto [d_angles, d_omega] = euler_321_rates_jacobian(angles, omega);
  jac.fx.block<3, 3>(0, 0) = d_angles;
  jac.fx.block<3, 3>(0, 3) = d_omega;
  jac.fx.block<3, 3>(3, 3) = rigid_body_accel_jacobian(omega, params_.J, J_inv_);
  jac.fu.block<3, 3>(3, 0) = J_inv_;
  return jac;
}

std::vector<std::string> AttitudeModel::state_names() const {
  return {"psi_rad", "theta_rad", "phi_rad", "w1_radps", "w2_radps", "w3_radps"};
}

std::vector<std::string> AttitudeModel::control_names() const {
  return {"M1_Nm", "M2_Nm", "M3_Nm"};
}

// ---------------------------------------------------------------------------

Vector3 point_mass_gravity(const Vector3& r, double mu) {
  const double R = r.norm();
  return mu * r / (R * R * R);
}

Matrix3 point_mass_gravity_jacobian(const Vector3& r, double mu) {
  const double R = r.norm();
  const double R2 = R * R;
  return mu / (R2 * R) * (Matrix3::Identity() - 3.0 * r * r.transpose() / R2);
}

namespace {

struct RendezvousParts {
  Vector3 e_r, e_v, r_t, v_t, r_c;
  double m;
};

RendezvousParts unpack_rendezvous(const Vector& x, const RendezvousParams& p) {
  namespace ri = rendezvous_index;
  require_dim(x, 13, "rendezvous state");
  RendezvousParts s;
  s.e_r = x.segment<3>(ri::kErrorPos);
  s.e_v = x.segment<3>(ri::kErrorVel);
  s.m = x[ri::kMass];
  s.r_t = x.segment<3>(ri::kTargetPos);
  s.v_t = x.segment<3>(ri::kTargetVel);
  s.r_c = s.r_t - s.e_r;
  if (!(s.m > 0.0)) throw DomainError("rendezvous: chaser mass must be positive");
  if (!(s.r_t.norm() > p.min_radius) || !(s.r_c.norm() > p.min_radius)) {
    throw DomainError("rendezvous: orbital radius below minimum");
  }
  return s;
}

}  // namespace

Vector rendezvous_deriv(const Vector& x, const Vector& u, const RendezvousParams& p) {
  return RendezvousModel(p).deriv(x, u);
}

Vector RendezvousModel::deriv(const Vector& x, const Vector& u) const {
  namespace ri = rendezvous_index;
  require_dim(u, 3, "rendezvous thrust");
  const auto s = unpack_rendezvous(x, params_);
  const Vector3 thrust = u.head<3>();
  const Vector3 g_t = point_mass_gravity(s.r_t, params_.mu);
  const Vector3 g_c = point_mass_gravity(s.r_c, params_.mu);

  Vector out(13);
  out.segment<3>(ri::kErrorPos) = s.e_v;
  out.segment<3>(ri::kErrorVel) = -g_t + g_c - thrust / s.m;
  out[ri::kMass] = -params_.alpha * thrust.norm();
  out.segment<3>(ri::kTargetPos) = s.v_t;
  out.segment<3>(ri::kTargetVel) = -g_t;
  return out;
}

std::optional<ContinuousJacobians> RendezvousModel::analytic_jacobians(const Vector& x,
                                                                       const Vector& u) const {
  namespace ri = rendezvous_index;
  require_dim(u, 3, "rendezvous thrust");
  const auto s = unpack_rendezvous(x, params_);
  const Vector3 thrust = u.head<3>();
  const Matrix3 G_t = point_mass_gravity_jacobian(s.r_t, params_.mu);
  const Matrix3 G_c = point_mass_gravity_jacobian(s.r_c, params_.mu);
  const Matrix3 I = Matrix3::Identity();

  ContinuousJacobians jac{Matrix::Zero(13, 13), Matrix::Zero(13, 3)};
  jac.fx.block<3, 3>(ri::kErrorPos, ri::kErrorVel) = I;
  // r_c = r_t - e_r
  jac.fx.block<3, 3>(ri::kErrorVel, ri::kErrorPos) = -G_c;
  jac.fx.block<3, 3>(ri::kErrorVel, ri::kTargetPos) = G_c - G_t;
  jac.fx.block<3, 1>(ri::kErrorVel, ri::kMass) = thrust / (s.m * s.m);
  jac.fx.block<3, 3>(ri::kTargetPos, ri::kTargetVel) = I;
  jac.fx.block<3, 3>(ri::kTargetVel, ri::kTargetPos) = -G_t;

  jac.fu.block<3, 3>(ri::kErrorVel, 0) = -I / s.m;
  // |u| is not differentiable at 0; the zero subgradient is used there.
  jac.fu.block<1, 3>(ri::kMass, 0) = -params_.alpha * safe_unit(thrust).transpose();
  return jac;
}

std::vector<std::string> RendezvousModel::state_names() const {
  return {"er1_km", "er2_km", "er3_km", "ev1_kmps", "ev2_kmps", "ev3_kmps", "m_kg",
          "rt1_km", "rt2_km", "rt3_km", "vt1_kmps", "vt2_kmps", "vt3_kmps"};
}

std::vector<std::string> RendezvousModel::control_names() const {
  return {"u1", "u2", "u3"};
}

FrozenTargetErrorModel::FrozenTargetErrorModel(RendezvousParams params, Vector3 target_position,
                                               double mass)
    : params_(params), r_t_(std::move(target_position)), mass_(mass) {
  if (!(mass_ > 0.0)) throw DomainError("FrozenTargetErrorModel: mass must be positive");
  if (!(r_t_.norm() > params_.min_radius)) {
    throw DomainError("FrozenTargetErrorModel: target radius below minimum");
  }
}

Vector FrozenTargetErrorModel::deriv(const Vector& x, const Vector& u) const {
  require_dim(x, 6, "frozen-target error state");
  require_dim(u, 3, "frozen-target thrust");
  const Vector3 r_c = r_t_ - x.head<3>();
  if (!(r_c.norm() > params_.min_radius)) {
    throw DomainError("rendezvous: orbital radius below minimum");
  }
  Vector out(6);
  out.head<3>() = x.tail<3>();
  out.tail<3>() = -point_mass_gravity(r_t_, params_.mu) + point_mass_gravity(r_c, params_.mu) -
                  u.head<3>() / mass_;
  return out;
}

std::optional<ContinuousJacobians> FrozenTargetErrorModel::analytic_jacobians(
    const Vector& x, const Vector& u) const {
  require_dim(x, 6, "frozen-target error state");
  require_dim(u, 3, "frozen-target thrust");
  const Vector3 r_c = r_t_ - x.head<3>();
  ContinuousJacobians jac{Matrix::Zero(6, 6), Matrix::Zero(6, 3)};
  jac.fx.block<3, 3>(0, 3) = Matrix3::Identity();
  jac.fx.block<3, 3>(3, 0) = -point_mass_gravity_jacobian(r_c, params_.mu);
  jac.fu.block<3, 3>(3, 0) = -Matrix3::Identity() / mass_;
  return jac;
}

// ---------------------------------------------------------------------------

Vector scale_lander_state(const Vector& x, const LanderScaling& s) {
  namespace li = lander_index;
  require_dim(x, 13, "lander state");
  Vector out = x;
  out.segment<3>(li::kPosition) /= s.position;
  out.segment<3>(li::kVelocity) /= s.velocity;
  return out;
}

Vector unscale_lander_state(const Vector& x, const LanderScaling& s) {
  namespace li = lander_index;
  require_dim(x, 13, "lander state");
  Vector out = x;
  out.segment<3>(li::kPosition) *= s.position;
  out.segment<3>(li::kVelocity) *= s.velocity;
  return out;
}

Vector scale_lander_control(const Vector& u, const LanderScaling& s) {
  namespace li = lander_index;
  require_dim(u, 6, "lander control");
  Vector out = u;
  out.segment<3>(li::kTorque) /= s.torque;
  out.segment<3>(li::kThrust) /= s.thrust;
  return out;
}

Vector unscale_lander_control(const Vector& u, const LanderScaling& s) {
  namespace li = lander_index;
  require_dim(u, 6, "lander control");
  Vector out = u;
  out.segment<3>(li::kTorque) *= s.torque;
  out.segment<3>(li::kThrust) *= s.thrust;
  return out;
}

std::pair<Vector, Vector> apply_scaling(const Vector& x, const Vector& u, const LanderScaling& s) {
  return {scale_lander_state(x, s), scale_lander_control(u, s)};
}

std::pair<Vector, Vector> remove_scaling(const Vector& x, const Vector& u, const LanderScaling& s) {
  return {unscale_lander_state(x, s), unscale_lander_control(u, s)};
}

Vector hover_control_unscaled(double mass, const LanderParams& p) {
  Vector u = Vector::Zero(6);
  u[lander_index::kThrust + 2] = mass * p.g_ref;
  return u;
}

Vector lander_deriv(const Vector& x, const Vector& u, const LanderParams& p) {
  return LanderModel(p).deriv(x, u);
}

LanderModel::LanderModel(LanderParams params) : params_(params) {
  AttitudeModel check(AttitudeParams{params_.J});
  if (!(params_.isp > 0.0) || !(params_.g_ref > 0.0) || !(params_.m0 > 0.0)) {
    throw DomainError("LanderParams: isp, g_ref and m0 must be positive");
  }
  J_inv_ = params_.J.inverse();
}

Vector LanderModel::deriv(const Vector& x, const Vector& u) const {
  namespace li = lander_index;
  require_dim(x, 13, "lander state");
  require_dim(u, 6, "lander control");
  check_gimbal(x[li::kAngles + 1], x);
  const double m = x[li::kMass];
  if (!(m > 0.0)) throw DomainError("lander: mass must be positive");
  const auto& s = params_.scaling;
  const Vector3 omega = x.segment<3>(li::kRates);
  const Vector3 torque = s.torque * u.segment<3>(li::kTorque);
  const Vector3 thrust = s.thrust * u.segment<3>(li::kThrust);

  Vector out(13);
  out.segment<3>(li::kAngles) = euler_321_rates(x.segment<3>(li::kAngles), omega);
  out.segment<3>(li::kRates) = rigid_body_accel(omega, torque, params_.J, J_inv_);
  out.segment<3>(li::kPosition) = (s.velocity / s.position) * x.segment<3>(li::kVelocity);
  out.segment<3>(li::kVelocity) = (thrust / m + params_.gravity()) / s.velocity;
  out[li::kMass] = -thrust.norm() / (params_.isp * params_.g_ref);
  return out;
}

std::optional<ContinuousJacobians> LanderModel::analytic_jacobians(const Vector& x,
                                                                   const Vector& u) const {
  namespace li = lander_index;
  require_dim(x, 13, "lander state");
  require_dim(u, 6, "lander control");
  check_gimbal(x[li::kAngles + 1], x);
  const double m = x[li::kMass];
  if (!(m > 0.0)) throw DomainError("lander: mass must be positive");
  const auto& s = params_.scaling;
  const Vector3 omega = x.segment<3>(li::kRates);
  const Vector3 u_bar = u.segment<3>(li::kThrust);

  ContinuousJacobians jac{Matrix::Zero(13, 13), Matrix::Zero(13, 6)};
  auto [d_angles, d_omega] = euler_321_rates_jacobian(x.segment<3>(li::kAngles), omega);
  jac.fx.block<3, 3>(li::kAngles, li::kAngles) = d_angles;
  jac.fx.block<3, 3>(li::kAngles, li::kRates) = d_omega;
  jac.fx.block<3, 3>(li::kRates, li::kRates) = rigid_body_accel_jacobian(omega, params_.J, J_inv_);
  jac.fx.block<3, 3>(li::kPosition, li::kVelocity) =
      (s.velocity / s.position) * Matrix3::Identity();
  jac.fx.block<3, 1>(li::kVelocity, li::kMass) = -s.thrust * u_bar / (m * m * s.velocity);

  jac.fu.block<3, 3>(li::kRates, li::kTorque) = s.torque * J_inv_;
  jac.fu.block<3, 3>(li::kVelocity, li::kThrust) = s.thrust / (m * s.velocity) * Matrix3::Identity();
  jac.fu.block<1, 3>(li::kMass, li::kThrust) =
      -s.thrust / (params_.isp * params_.g_ref) * safe_unit(u_bar).transpose();
  return jac;
}

std::vector<std::string> LanderModel::state_names() const {
  return {"psi_rad", "theta_rad", "phi_rad", "w1_radps", "w2_radps", "w3_radps", "r1_m",
          "r2_m",    "r3_m",      "v1_mps",  "v2_mps",   "v3_mps",   "m_kg"};
}

std::vector<std::string> LanderModel::control_names() const {
  return {"M1_Nm", "M2_Nm", "M3_Nm", "u1_N", "u2_N", "u3_N"};
}

// ---------------------------------------------------------------------------

CartesianState kepler_to_cartesian(const OrbitalElements& el, double mu) {
  if (!(el.a > 0.0)) throw UnsupportedOrbitError("kepler_to_cartesian: a must be positive");
  if (!(el.e >= 0.0) || !(el.e < 1.0)) {
    throw UnsupportedOrbitError("kepler_to_cartesian: only elliptic orbits (0 <= e < 1)");
  }
  const double p = el.a * (1.0 - el.e * el.e);
  const double cnu = std::cos(el.nu);
  const double snu = std::sin(el.nu);
  const double radius = p / (1.0 + el.e * cnu);
  const Vector3 r_pf(radius * cnu, radius * snu, 0.0);
  const double vs = std::sqrt(mu / p);
  const Vector3 v_pf(-vs * snu, vs * (el.e + cnu), 0.0);

  const Matrix3 rot = (Eigen::AngleAxisd(el.raan, Vector3::UnitZ()) *
                       Eigen::AngleAxisd(el.i, Vector3::UnitX()) *
                       Eigen::AngleAxisd(el.argp, Vector3::UnitZ()))
                          .toRotationMatrix();
  return {rot * r_pf, rot * v_pf};
}

double specific_energy(const Vector3& r, const Vector3& v, double mu) {
  return 0.5 * v.squaredNorm() - mu / r.norm();
}

}  // namespace ihoc
