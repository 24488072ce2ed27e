#pragma once

#include <optional>

#include "ihoc/types.hpp"

namespace ihoc {

/// Soft altitude constraint weight * exp(-rate * h) - weight, where the
/// physical altitude is h = scale * x[index].
struct AltitudePenalty {
  double weight = 100.0;
  double rate = 1.0;
  Index index = 0;
  double scale = 1.0;
};

/// c(x, u) = 0.5 (x^T Q x + u^T R u) + optional altitude penalty.
struct QuadraticCostSpec {
  Matrix Q;
  Matrix R;
  std::optional<AltitudePenalty> penalty;

  Index state_dim() const { return Q.rows(); }
  Index control_dim() const { return R.rows(); }
};

/// Checks symmetry, Q PSD and R PD. Throws DomainError.
void validate(const QuadraticCostSpec& spec);

double altitude_penalty(double altitude, double weight, double rate);

double stage_cost(const Vector& x, const Vector& u, const QuadraticCostSpec& spec);

/// State-only part of the stage cost (control term omitted).
double state_cost(const Vector& x, const QuadraticCostSpec& spec);

struct CostDerivatives {
  Vector lx;
  Matrix lxx;
  Vector lu;
  Matrix luu;
};

CostDerivatives cost_derivatives(const Vector& x, const Vector& u, const QuadraticCostSpec& spec);

/// x^T P x.
template <typename DerivedX, typename DerivedP>
double terminal_value(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedP>& P) {
  return x.dot(P * x);
}

/// Gradient 2 P x and Hessian 2 P of the terminal value (P symmetric).
template <typename DerivedX, typename DerivedP>
Vector terminal_gradient(const Eigen::MatrixBase<DerivedX>& x,
                         const Eigen::MatrixBase<DerivedP>& P) {
  return 2.0 * (P * x);
}

}  // namespace ihoc
