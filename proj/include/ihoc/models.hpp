#pragma once

#include <utility>

#include "ihoc/dynamics.hpp"

namespace ihoc {

// ---------------------------------------------------------------------------
// Rigid-body attitude blocks shared by the attitude and lander models.

/// Minimum |cos(pitch)| accepted by the 3-2-1 kinematics.
inline constexpr double kGimbalGuard = 1e-8;

/// Euler-angle rates for the 3-2-1 sequence (psi, theta, phi) given body rates.
Vector3 euler_321_rates(const Vector3& angles, const Vector3& omega);

/// d(rates)/d(angles) and d(rates)/d(omega).
std::pair<Matrix3, Matrix3> euler_321_rates_jacobian(const Vector3& angles, const Vector3& omega);

/// omega_dot = -J^-1 (omega x J omega) + J^-1 torque.
Vector3 rigid_body_accel(const Vector3& omega, const Vector3& torque, const Matrix3& J,
                         const Matrix3& J_inv);

/// d(omega_dot)/d(omega).
Matrix3 rigid_body_accel_jacobian(const Vector3& omega, const Matrix3& J, const Matrix3& J_inv);

Matrix3 skew(const Vector3& v);

// ---------------------------------------------------------------------------
// Attitude: x = [psi, theta, phi, w1, w2, w3] (rad, rad/s), u = M (N m).

struct AttitudeParams {
  Matrix3 J = Eigen::Vector3d(4500.0, 2000.0, 7500.0).asDiagonal();
};

Vector attitude_deriv(const Vector& x, const Vector& torque, const AttitudeParams& p);

class AttitudeModel final : public ContinuousModel {
 public:
  explicit AttitudeModel(AttitudeParams params = {});

  Index state_dim() const override { return 6; }
  Index control_dim() const override { return 3; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  std::optional<ContinuousJacobians> analytic_jacobians(const Vector& x,
                                                        const Vector& u) const override;
  std::vector<std::string> state_names() const override;
  std::vector<std::string> control_names() const override;

  const AttitudeParams& params() const { return params_; }

 private:
  AttitudeParams params_;
  Matrix3 J_inv_;
};

// ---------------------------------------------------------------------------
// Rendezvous: x = [e_r(3) km, e_v(3) km/s, m kg, r_t(3) km, v_t(3) km/s],
// u = thrust (kg km/s^2). e_r = r_t - r_c, e_v = v_t - v_c.

struct RendezvousParams {
  double mu = 398600.0;       // km^3/s^2
  double alpha = 5e-4;        // mass flow per unit thrust
  double min_radius = 1.0;    // km; radii below this are rejected
};

namespace rendezvous_index {
inline constexpr Index kErrorPos = 0;
inline constexpr Index kErrorVel = 3;
inline constexpr Index kMass = 6;
inline constexpr Index kTargetPos = 7;
inline constexpr Index kTargetVel = 10;
}  // namespace rendezvous_index

Vector rendezvous_deriv(const Vector& x, const Vector& u, const RendezvousParams& p);

/// mu r / |r|^3 and its Jacobian mu/|r|^3 (I - 3 r r^T / |r|^2).
Vector3 point_mass_gravity(const Vector3& r, double mu);
Matrix3 point_mass_gravity_jacobian(const Vector3& r, double mu);

class RendezvousModel final : public ContinuousModel {
 public:
  explicit RendezvousModel(RendezvousParams params = {}) : params_(params) {}

  Index state_dim() const override { return 13; }
  Index control_dim() const override { return 3; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  std::optional<ContinuousJacobians> analytic_jacobians(const Vector& x,
                                                        const Vector& u) const override;
  std::vector<std::string> state_names() const override;
  std::vector<std::string> control_names() const override;

  const RendezvousParams& params() const { return params_; }

 private:
  RendezvousParams params_;
};

/// Relative error dynamics [e_r, e_v] with the target position and chaser
/// mass held fixed. Its origin is an equilibrium, so it is the model the
/// terminal regulator is designed on.
class FrozenTargetErrorModel final : public ContinuousModel {
 public:
  FrozenTargetErrorModel(RendezvousParams params, Vector3 target_position, double mass);

  Index state_dim() const override { return 6; }
  Index control_dim() const override { return 3; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  std::optional<ContinuousJacobians> analytic_jacobians(const Vector& x,
                                                        const Vector& u) const override;

 private:
  RendezvousParams params_;
  Vector3 r_t_;
  double mass_;
};

// ---------------------------------------------------------------------------
// Soft landing. Internally scaled: x = [angles(3) rad, w(3) rad/s, r/1e4 (3),
// v/1e3 (3), m kg], u = [M/1e2 (3), u/1e4 (3)].

struct LanderScaling {
  double position = 1e4;
  double velocity = 1e3;
  double torque = 1e2;
  double thrust = 1e4;
};

struct LanderParams {
  Matrix3 J = Eigen::Vector3d(4500.0, 2000.0, 7500.0).asDiagonal();
  double isp = 225.0;           // s
  double g_ref = 3.7114;        // m/s^2, Mars surface gravity magnitude
  double m0 = 1000.0;           // kg
  double penalty_weight = 100.0;
  double penalty_rate = 1.0;
  LanderScaling scaling{};

  Vector3 gravity() const { return {0.0, 0.0, -g_ref}; }
};

namespace lander_index {
inline constexpr Index kAngles = 0;
inline constexpr Index kRates = 3;
inline constexpr Index kPosition = 6;
inline constexpr Index kAltitude = 8;
inline constexpr Index kVelocity = 9;
inline constexpr Index kMass = 12;
inline constexpr Index kTorque = 0;
inline constexpr Index kThrust = 3;
}  // namespace lander_index

/// Derivative of the scaled lander state.
Vector lander_deriv(const Vector& x_scaled, const Vector& u_scaled, const LanderParams& p);

/// Scale a physical (SI) lander state/control into solver variables.
std::pair<Vector, Vector> apply_scaling(const Vector& x_unscaled, const Vector& u_unscaled,
                                        const LanderScaling& s = {});
/// Inverse of apply_scaling.
std::pair<Vector, Vector> remove_scaling(const Vector& x_scaled, const Vector& u_scaled,
                                         const LanderScaling& s = {});

Vector scale_lander_state(const Vector& x_unscaled, const LanderScaling& s = {});
Vector unscale_lander_state(const Vector& x_scaled, const LanderScaling& s = {});
Vector scale_lander_control(const Vector& u_unscaled, const LanderScaling& s = {});
Vector unscale_lander_control(const Vector& u_scaled, const LanderScaling& s = {});

/// Thrust (SI) that holds the lander still against gravity at mass m.
Vector hover_control_unscaled(double mass, const LanderParams& p);

class LanderModel final : public ContinuousModel {
 public:
  explicit LanderModel(LanderParams params = {});

  Index state_dim() const override { return 13; }
  Index control_dim() const override { return 6; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  std::optional<ContinuousJacobians> analytic_jacobians(const Vector& x,
                                                        const Vector& u) const override;
  std::vector<std::string> state_names() const override;
  std::vector<std::string> control_names() const override;

  const LanderParams& params() const { return params_; }

 private:
  LanderParams params_;
  Matrix3 J_inv_;
};

// ---------------------------------------------------------------------------
// Keplerian elements.

struct OrbitalElements {
  double a = 7000.0;   // km
  double e = 0.0;
  double i = 0.0;      // rad
  double raan = 0.0;   // rad
  double argp = 0.0;   // rad
  double nu = 0.0;     // rad, true anomaly
};

struct CartesianState {
  Vector3 r;
  Vector3 v;
};

/// Perifocal position/velocity rotated by the 3-1-3 sequence (raan, i, argp).
CartesianState kepler_to_cartesian(const OrbitalElements& el, double mu);

/// Specific orbital energy |v|^2/2 - mu/|r|.
double specific_energy(const Vector3& r, const Vector3& v, double mu);

inline constexpr double kDegToRad = 0.017453292519943295;

}  // namespace ihoc
