#include "ihoc/cost.hpp"

#include <cmath>

namespace ihoc {

void validate(const QuadraticCostSpec& spec) {
  if (spec.Q.rows() != spec.Q.cols() || spec.R.rows() != spec.R.cols()) {
    throw DimensionError("cost: Q and R must be square");
  }
  if (!spec.Q.isApprox(spec.Q.transpose(), 1e-12) || !spec.R.isApprox(spec.R.transpose(), 1e-12)) {
    throw DomainError("cost: Q and R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> q(spec.Q);
  if (spec.Q.size() > 0 && q.eigenvalues().minCoeff() < -1e-12 * (1.0 + spec.Q.norm())) {
    throw DomainError("cost: Q must be positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> r(spec.R);
  if (spec.R.size() == 0 || r.eigenvalues().minCoeff() <= 0.0) {
    throw DomainError("cost: R must be positive definite");
  }
  if (spec.penalty && (spec.penalty->index < 0 || spec.penalty->index >= spec.Q.rows())) {
    throw DimensionError("cost: penalty index out of range");
  }
}

double altitude_penalty(double altitude, double weight, double rate) {
  return weight * std::exp(-rate * altitude) - weight;
}

double state_cost(const Vector& x, const QuadraticCostSpec& spec) {
  require_dim(x, spec.state_dim(), "stage_cost state");
  double c = 0.5 * x.dot(spec.Q * x);
  if (spec.penalty) {
    const auto& p = *spec.penalty;
    c += altitude_penalty(p.scale * x[p.index], p.weight, p.rate);
  }
  return c;
}

double stage_cost(const Vector& x, const Vector& u, const QuadraticCostSpec& spec) {
  require_dim(u, spec.control_dim(), "stage_cost control");
  return state_cost(x, spec) + 0.5 * u.dot(spec.R * u);
}

CostDerivatives cost_derivatives(const Vector& x, const Vector& u, const QuadraticCostSpec& spec) {
  require_dim(x, spec.state_dim(), "cost_derivatives state");
  require_dim(u, spec.control_dim(), "cost_derivatives control");
  CostDerivatives d{spec.Q * x, spec.Q, spec.R * u, spec.R};
  if (spec.penalty) {
    const auto& p = *spec.penalty;
    const double e = std::exp(-p.rate * p.scale * x[p.index]);
    d.lx[p.index] += -p.weight * p.rate * p.scale * e;
    d.lxx(p.index, p.index) += p.weight * p.rate * p.rate * p.scale * p.scale * e;
  }
  return d;
}

}  // namespace ihoc
