#include "ihoc/cost.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace ihoc {
namespace {

QuadraticCostSpec sample_spec() {
  QuadraticCostSpec spec;
  spec.Q = Matrix::Zero(4, 4);
  spec.Q.diagonal() << 2.0, 1.0, 0.5, 3.0;
  spec.Q(0, 1) = spec.Q(1, 0) = 0.3;
  spec.R = Matrix::Identity(2, 2) * 0.7;
  spec.penalty = AltitudePenalty{100.0, 1.0, 2, 1.0};
  return spec;
}

TEST(Cost, AltitudePenaltyValues) {
  EXPECT_DOUBLE_EQ(altitude_penalty(0.0, 100.0, 1.0), 0.0);
  EXPECT_NEAR(altitude_penalty(-1.0, 100.0, 1.0), 100.0 * (std::exp(1.0) - 1.0), 1e-12);
  EXPECT_NEAR(altitude_penalty(-1.0, 100.0, 1.0), 171.828182845904, 1e-9);
  // Far above ground the penalty tends to -weight.
  EXPECT_NEAR(altitude_penalty(50.0, 100.0, 1.0), -100.0, 1e-18);
}

TEST(Cost, PenaltyGradientAtGround) {
  QuadraticCostSpec spec{Matrix::Zero(1, 1), Matrix::Identity(1, 1), AltitudePenalty{100.0, 1.0, 0, 1.0}};
  const CostDerivatives d = cost_derivatives(Vector::Zero(1), Vector::Zero(1), spec);
  EXPECT_DOUBLE_EQ(d.lx(0), -100.0);
  EXPECT_DOUBLE_EQ(d.lxx(0, 0), 100.0);
}

TEST(Cost, PenaltyScaleActsOnPhysicalAltitude) {
  // Solver altitude 2e-4 with scale 1e4 is 2 m.
  QuadraticCostSpec spec{Matrix::Zero(1, 1), Matrix::Identity(1, 1), AltitudePenalty{100.0, 1.0, 0, 1e4}};
  Vector x(1);
  x << 2e-4;
  EXPECT_NEAR(state_cost(x, spec), altitude_penalty(2.0, 100.0, 1.0), 1e-12);
  const CostDerivatives d = cost_derivatives(x, Vector::Zero(1), spec);
  EXPECT_NEAR(d.lx(0), -100.0 * 1e4 * std::exp(-2.0), 1e-8);
}

TEST(Cost, StageCostIsHalfQuadraticForms) {
  QuadraticCostSpec spec = sample_spec();
  spec.penalty.reset();
  Vector x(4), u(2);
  x << 1.0, -2.0, 0.5, 0.1;
  u << 3.0, -1.0;
  EXPECT_NEAR(stage_cost(x, u, spec), 0.5 * (x.dot(spec.Q * x) + u.dot(spec.R * u)), 1e-14);
  EXPECT_NEAR(state_cost(x, spec), 0.5 * x.dot(spec.Q * x), 1e-14);
}

TEST(Cost, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  const QuadraticCostSpec spec = sample_spec();
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    Vector x(4), u(2);
    for (Index i = 0; i < 4; ++i) x(i) = d(rng);
    for (Index i = 0; i < 2; ++i) u(i) = d(rng);
    const CostDerivatives cd = cost_derivatives(x, u, spec);

    const auto fx = [&](const Vector& xx) { return stage_cost(xx, u, spec); };
    const auto fu = [&](const Vector& uu) { return stage_cost(x, uu, spec); };
    const Vector lx = oracle::fd_gradient(fx, x, h);
    const Vector lu = oracle::fd_gradient(fu, u, h);
    EXPECT_LE((cd.lx - lx).norm(), 1e-6 * std::max(1.0, lx.norm()));
    EXPECT_LE((cd.lu - lu).norm(), 1e-6 * std::max(1.0, lu.norm()));

    Matrix lxx(4, 4);
    for (Index j = 0; j < 4; ++j) {
      Vector a = x, b = x;
      a(j) += h;
      b(j) -= h;
      lxx.col(j) = (cost_derivatives(a, u, spec).lx - cost_derivatives(b, u, spec).lx) / (2 * h);
    }
    EXPECT_LE((cd.lxx - lxx).norm(), 1e-6 * std::max(1.0, lxx.norm()));
    EXPECT_LE((cd.luu - spec.R).norm(), 0.0);
  }
}

TEST(Cost, TerminalValueAndGradient) {
  Matrix P(2, 2);
  P << 2.0, 0.5, 0.5, 1.0;
  Vector x(2);
  x << 1.0, -3.0;
  EXPECT_DOUBLE_EQ(terminal_value(x, P), 2.0 - 3.0 + 9.0);
  const Vector g = terminal_gradient(x, P);
  EXPECT_DOUBLE_EQ(g(0), 2.0 * (2.0 - 1.5));
  EXPECT_DOUBLE_EQ(g(1), 2.0 * (0.5 - 3.0));
}

TEST(Cost, ValidationRejectsBadWeights) {
  QuadraticCostSpec spec = sample_spec();
  EXPECT_NO_THROW(validate(spec));

  QuadraticCostSpec asym = spec;
  asym.Q(0, 2) = 1.0;
  EXPECT_THROW(validate(asym), DomainError);

  QuadraticCostSpec indefinite = spec;
  indefinite.Q(3, 3) = -1.0;
  EXPECT_THROW(validate(indefinite), DomainError);

  QuadraticCostSpec singular_r = spec;
  singular_r.R(1, 1) = 0.0;
  EXPECT_THROW(validate(singular_r), DomainError);

  QuadraticCostSpec psd_q = spec;
  psd_q.Q = Matrix::Zero(4, 4);
  EXPECT_NO_THROW(validate(psd_q));

  QuadraticCostSpec bad_index = spec;
  bad_index.penalty->index = 7;
  EXPECT_THROW(validate(bad_index), DimensionError);

  QuadraticCostSpec rect = spec;
  rect.Q = Matrix::Zero(4, 3);
  EXPECT_THROW(validate(rect), DimensionError);
}

TEST(Cost, DimensionMismatchThrows) {
  const QuadraticCostSpec spec = sample_spec();
  EXPECT_THROW(stage_cost(Vector::Zero(3), Vector::Zero(2), spec), DimensionError);
  EXPECT_THROW(stage_cost(Vector::Zero(4), Vector::Zero(3), spec), DimensionError);
}

}  // namespace
}  // namespace ihoc
