#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ihoc/types.hpp"

namespace ihoc {

/// Continuous-time Jacobians of a right-hand side: dx/dt = f(x, u).
struct ContinuousJacobians {
  Matrix fx;
  Matrix fu;
};

/// A continuous-time model dx/dt = f(x, u). Implementations must be pure.
class ContinuousModel {
 public:
  virtual ~ContinuousModel() = default;

  virtual Index state_dim() const = 0;
  virtual Index control_dim() const = 0;
  virtual Vector deriv(const Vector& x, const Vector& u) const = 0;

  /// Analytic Jacobians, if the model provides them.
  virtual std::optional<ContinuousJacobians> analytic_jacobians(const Vector& /*x*/,
                                                                const Vector& /*u*/) const {
    return std::nullopt;
  }

  virtual std::vector<std::string> state_names() const;
  virtual std::vector<std::string> control_names() const;
};

/// Model built from callables; used for tests and ad-hoc systems.
class FunctionModel final : public ContinuousModel {
 public:
  using Deriv = std::function<Vector(const Vector&, const Vector&)>;
  using Jac = std::function<ContinuousJacobians(const Vector&, const Vector&)>;

  FunctionModel(Index nx, Index nu, Deriv f, Jac jac = {})
      : nx_(nx), nu_(nu), f_(std::move(f)), jac_(std::move(jac)) {}

  Index state_dim() const override { return nx_; }
  Index control_dim() const override { return nu_; }
  Vector deriv(const Vector& x, const Vector& u) const override { return f_(x, u); }
  std::optional<ContinuousJacobians> analytic_jacobians(const Vector& x,
                                                        const Vector& u) const override {
    if (!jac_) return std::nullopt;
    return jac_(x, u);
  }

 private:
  Index nx_;
  Index nu_;
  Deriv f_;
  Jac jac_;
};

/// Discrete Jacobians of the Euler map.
struct Linearization {
  Matrix A;
  Matrix B;
};

/// Explicit-Euler discretization x+ = x + dt * f(x, u).
class DiscreteModel {
 public:
  DiscreteModel(std::shared_ptr<const ContinuousModel> inner, double dt);

  const ContinuousModel& inner() const { return *inner_; }
  std::shared_ptr<const ContinuousModel> inner_ptr() const { return inner_; }
  double dt() const { return dt_; }
  Index state_dim() const { return inner_->state_dim(); }
  Index control_dim() const { return inner_->control_dim(); }

  Vector step(const Vector& x, const Vector& u) const;

 private:
  std::shared_ptr<const ContinuousModel> inner_;
  double dt_;
};

/// Discrete LTI map x+ = A x + B u expressed as an Euler model with the
/// right-hand side ((A - I) x + B u) / dt.
DiscreteModel make_linear_model(const Matrix& A, const Matrix& B, double dt = 1.0);

Vector euler_step(const DiscreteModel& model, const Vector& x, const Vector& u);

inline constexpr double kDefaultFdStep = 1e-6;

/// Central differences of the right-hand side with per-coordinate step
/// h_j = max(h, h * |z_j|), assembled as A = I + dt fx, B = dt fu.
Linearization jacobians_fd(const DiscreteModel& model, const Vector& x, const Vector& u,
                           double h = kDefaultFdStep);

/// Analytic Jacobians when available, otherwise jacobians_fd with the default step.
Linearization jacobians(const DiscreteModel& model, const Vector& x, const Vector& u);

/// Relative mismatch between two linearizations of the same Euler map,
/// measured on the increment parts (A - I) and B in the Frobenius norm.
double jacobian_mismatch(const Linearization& reference, const Linearization& other);

}  // namespace ihoc
