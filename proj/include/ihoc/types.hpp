#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ihoc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  /// Stable machine-readable identifier, e.g. "singularity".
  virtual std::string kind() const { return "error"; }
};

/// Raised when a model is evaluated where it is undefined (Euler-angle
/// gimbal lock, non-finite derivative). Carries the offending state.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, Vector state)
      : Error(what), state_(std::move(state)) {}
  const Vector& state() const { return state_; }
  std::string kind() const override { return "singularity"; }

 private:
  Vector state_;
};

class DomainError : public Error {
 public:
  using Error::Error;
  std::string kind() const override { return "domain"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  std::string kind() const override { return "dimension"; }
};

class NotFixedPointError : public Error {
 public:
  NotFixedPointError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }
  std::string kind() const override { return "not_fixed_point"; }

 private:
  double residual_;
};

class StabilizabilityError : public Error {
 public:
  using Error::Error;
  std::string kind() const override { return "stabilizability"; }
};

class RegularizationError : public Error {
 public:
  using Error::Error;
  std::string kind() const override { return "regularization"; }
};

class UnsupportedOrbitError : public Error {
 public:
  using Error::Error;
  std::string kind() const override { return "unsupported_orbit"; }
};

inline void require_dim(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
  }
}

}  // namespace ihoc
