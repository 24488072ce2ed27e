#include "ihoc/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ihoc {

std::vector<std::string> ContinuousModel::state_names() const {
  std::vector<std::string> names;
  for (Index i = 0; i < state_dim(); ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> ContinuousModel::control_names() const {
  std::vector<std::string> names;
  for (Index i = 0; i < control_dim(); ++i) names.push_back("u" + std::to_string(i + 1));
  return names;
}

DiscreteModel::DiscreteModel(std::shared_ptr<const ContinuousModel> inner, double dt)
    : inner_(std::move(inner)), dt_(dt) {
  if (!inner_) throw DomainError("DiscreteModel: null continuous model");
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw DomainError("DiscreteModel: time step must be positive and finite");
  }
}

Vector DiscreteModel::step(const Vector& x, const Vector& u) const {
  return euler_step(*this, x, u);
}

DiscreteModel make_linear_model(const Matrix& A, const Matrix& B, double dt) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw DimensionError("make_linear_model: inconsistent A/B shapes");
  }
  const Index nx = A.rows();
  const Index nu = B.cols();
  Matrix fx = (A - Matrix::Identity(nx, nx)) / dt;
  Matrix fu = B / dt;
  auto f = [fx, fu](const Vector& x, const Vector& u) -> Vector { return fx * x + fu * u; };
  auto jac = [fx, fu](const Vector&, const Vector&) { return ContinuousJacobians{fx, fu}; };
  return DiscreteModel(std::make_shared<FunctionModel>(nx, nu, f, jac), dt);
}

Vector euler_step(const DiscreteModel& model, const Vector& x, const Vector& u) {
  require_dim(x, model.state_dim(), "euler_step state");
  require_dim(u, model.control_dim(), "euler_step control");
  Vector xdot = model.inner().deriv(x, u);
  if (xdot.size() != x.size()) {
    throw DimensionError("euler_step: derivative dimension mismatch");
  }
  if (!xdot.allFinite()) {
    throw SingularityError("euler_step: non-finite derivative", x);
  }
  return x + model.dt() * xdot;
}

Linearization jacobians_fd(const DiscreteModel& model, const Vector& x, const Vector& u,
                           double h) {
  if (!(h > 0.0)) throw DomainError("jacobians_fd: perturbation scale must be positive");
  require_dim(x, model.state_dim(), "jacobians_fd state");
  require_dim(u, model.control_dim(), "jacobians_fd control");
  const auto& f = model.inner();
  const Index nx = x.size();
  const Index nu = u.size();
  const double dt = model.dt();

  auto eval = [&](const Vector& xx, const Vector& uu) {
    Vector d = f.deriv(xx, uu);
    if (!d.allFinite()) throw SingularityError("jacobians_fd: non-finite derivative", xx);
    return d;
  };

  Linearization lin{Matrix::Identity(nx, nx), Matrix::Zero(nx, nu)};
  for (Index j = 0; j < nx; ++j) {
    const double hj = std::max(h, h * std::abs(x[j]));
    Vector xp = x;
    Vector xm = x;
    xp[j] += hj;
    xm[j] -= hj;
    lin.A.col(j) += dt * (eval(xp, u) - eval(xm, u)) / (xp[j] - xm[j]);
  }
  for (Index j = 0; j < nu; ++j) {
    const double hj = std::max(h, h * std::abs(u[j]));
    Vector up = u;
    Vector um = u;
    up[j] += hj;
    um[j] -= hj;
    lin.B.col(j) = dt * (eval(x, up) - eval(x, um)) / (up[j] - um[j]);
  }
  return lin;
}

Linearization jacobians(const DiscreteModel& model, const Vector& x, const Vector& u) {
  require_dim(x, model.state_dim(), "jacobians state");
  require_dim(u, model.control_dim(), "jacobians control");
  auto analytic = model.inner().analytic_jacobians(x, u);
  if (!analytic) return jacobians_fd(model, x, u);
  const Index nx = x.size();
  Linearization lin{Matrix::Identity(nx, nx) + model.dt() * analytic->fx,
                    model.dt() * analytic->fu};
  if (!lin.A.allFinite() || !lin.B.allFinite()) {
    throw SingularityError("jacobians: non-finite Jacobian", x);
  }
  return lin;
}

double jacobian_mismatch(const Linearization& reference, const Linearization& other) {
  const Index nx = reference.A.rows();
  auto rel = [](const Matrix& ref, const Matrix& diff) {
    const double scale = ref.norm();
    if (scale == 0.0) return diff.norm();
    return diff.norm() / scale;
  };
  const Matrix Aref = reference.A - Matrix::Identity(nx, nx);
  return std::max(rel(Aref, other.A - reference.A), rel(reference.B, other.B - reference.B));
}

}  // namespace ihoc
