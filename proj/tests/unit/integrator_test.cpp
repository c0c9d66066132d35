#include <gtest/gtest.h>

#include <cmath>

#include "ssopt/errors.hpp"
#include "ssopt/integrator.hpp"

namespace ssopt {
namespace {

using integrator::integrate_adaptive;
using integrator::Options;
using integrator::Outcome;

const integrator::Rhs kDecay = [](double, const Vector& y) -> Vector { return -y; };

TEST(Integrate, LinearDecayHitsExponential) {
  Options o;
  o.rel_tol = 1e-6;
  const auto out = integrate_adaptive(kDecay, Vector{{1.0}}, 1.0, o);
  EXPECT_EQ(out.outcome, Outcome::HorizonReached);
  EXPECT_EQ(out.r, 1.0);
  EXPECT_NEAR(out.y(0), std::exp(-1.0), 10.0 * o.rel_tol);
  EXPECT_GT(out.stats.steps_accepted, 0);
  EXPECT_LE(out.stats.min_step, out.stats.max_step);
}

TEST(Integrate, StiffCosineTrackingUsesFewSteps) {
  const integrator::Rhs stiff = [](double r, const Vector& y) -> Vector {
    return Vector{{-1000.0 * (y(0) - std::cos(r))}};
  };
  Options o;
  o.rel_tol = 1e-4;
  o.abs_tol = 1e-6;
  const double r_max = 10.0;
  const auto out = integrate_adaptive(stiff, Vector{{0.0}}, r_max, o);
  ASSERT_EQ(out.outcome, Outcome::HorizonReached);
  // Explicit Euler needs about 1000 * r_max steps for stability alone.
  EXPECT_LT(out.stats.steps_accepted, 1000.0 * r_max / 10.0);

  // Reference: the slow manifold y = (1e6 cos r + 1e3 sin r) / (1e6 + 1) plus
  // a transient that has decayed to e^{-1e4} by r = 10.
  const double reference = (1e6 * std::cos(r_max) + 1e3 * std::sin(r_max)) / (1e6 + 1.0);
  EXPECT_NEAR(out.y(0), reference, 1e-3);
}

TEST(Integrate, ZeroRhsKeepsStateAndTakesLargeSteps) {
  const integrator::Rhs zero = [](double, const Vector& y) -> Vector {
    return Vector::Zero(y.size());
  };
  const Vector y0{{1.25, -3.0}};
  const auto out = integrate_adaptive(zero, y0, 1e4, Options{});
  EXPECT_EQ(out.y, y0);
  EXPECT_LE(out.stats.steps_accepted, 2);
  EXPECT_EQ(out.stats.max_step, 1e4);
}

TEST(Integrate, StopCallbackAtInitialPoint) {
  const auto out = integrate_adaptive(kDecay, Vector{{1.0}}, 1.0, Options{},
                                      [](double, const Vector&, const Vector&) { return true; });
  EXPECT_EQ(out.outcome, Outcome::Stopped);
  EXPECT_EQ(out.stats.steps_accepted, 0);
  EXPECT_EQ(out.stats.min_step, 0.0);
}

TEST(Integrate, StopCallbackAfterAcceptedStep) {
  const auto out = integrate_adaptive(
      kDecay, Vector{{1.0}}, 100.0, Options{},
      [](double, const Vector& y, const Vector&) { return y(0) < 0.5; });
  EXPECT_EQ(out.outcome, Outcome::Stopped);
  EXPECT_LT(out.y(0), 0.5);
  EXPECT_LT(out.r, 100.0);
}

TEST(Integrate, ZeroHorizonReturnsInitialState) {
  const auto out = integrate_adaptive(kDecay, Vector{{2.0}}, 0.0, Options{});
  EXPECT_EQ(out.outcome, Outcome::HorizonReached);
  EXPECT_EQ(out.y(0), 2.0);
  EXPECT_EQ(out.r, 0.0);
}

TEST(Integrate, BudgetExhaustion) {
  Options o;
  o.max_rhs_evals = 20;
  const auto out = integrate_adaptive(kDecay, Vector{{1.0}}, 1e6, o);
  EXPECT_EQ(out.outcome, Outcome::BudgetExhausted);
}

TEST(Integrate, BlowUpEndsInStepUnderflow) {
  // y' = y^3 from y = 1 has a pole at r = 1/2. (Rosenbrock steps solve
  // y' = y^2 exactly and legitimately pass through its pole.)
  const integrator::Rhs blowup = [](double, const Vector& y) -> Vector {
    return y.array().cube().matrix();
  };
  const auto out = integrate_adaptive(blowup, Vector{{1.0}}, 2.0, Options{});
  EXPECT_NE(out.outcome, Outcome::HorizonReached);
  EXPECT_LT(out.r, 0.5);
}

TEST(Integrate, NonFiniteInitialRhsThrows) {
  const integrator::Rhs bad = [](double, const Vector& y) -> Vector {
    return y.array().log().matrix();
  };
  EXPECT_THROW(integrate_adaptive(bad, Vector{{-1.0}}, 1.0, Options{}), NumericalFailure);
}

TEST(Integrate, CustomJacobianIsUsedAndCharged) {
  Options o;
  int calls = 0;
  o.jacobian = [&](double, const Vector& y, const Vector&) {
    ++calls;
    return Matrix(-Matrix::Identity(y.size(), y.size()));
  };
  o.jacobian_cost = 7;
  const auto out = integrate_adaptive(kDecay, Vector{{1.0}}, 1.0, o);
  EXPECT_NEAR(out.y(0), std::exp(-1.0), 1e-5);
  EXPECT_EQ(calls, out.stats.jacobian_evals);
  EXPECT_GT(calls, 0);
}

TEST(Integrate, GlobalErrorTracksTolerance) {
  std::vector<double> log_tol, log_err;
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    Options o;
    o.rel_tol = tol;
    o.abs_tol = tol * 1e-2;
    const auto out = integrate_adaptive(kDecay, Vector{{1.0}}, 1.0, o);
    log_tol.push_back(std::log10(tol));
    log_err.push_back(std::log10(std::abs(out.y(0) - std::exp(-1.0))));
  }
  const double slope = (log_err.back() - log_err.front()) / (log_tol.back() - log_tol.front());
  EXPECT_GE(slope, 0.7);
  EXPECT_LE(slope, 1.3);
}

TEST(Integrate, IdenticalInputsGiveIdenticalRuns) {
  const integrator::Rhs rhs = [](double r, const Vector& y) -> Vector {
    return Vector{{-50.0 * (y(0) - std::sin(r)), y(0) - y(1)}};
  };
  const auto a = integrate_adaptive(rhs, Vector{{0.3, 0.1}}, 5.0, Options{});
  const auto b = integrate_adaptive(rhs, Vector{{0.3, 0.1}}, 5.0, Options{});
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.stats.steps_accepted, b.stats.steps_accepted);
  EXPECT_EQ(a.stats.steps_rejected, b.stats.steps_rejected);
}

TEST(Step, ErrorEstimateScalesWithOrder) {
  // p = 2 embedded estimate on a linear problem: halving h divides it by ~2^3.
  const Matrix a{{-1.0, 0.5}, {0.0, -2.0}};
  const integrator::Rhs lin = [&](double, const Vector& y) -> Vector { return a * y; };
  const Vector y0{{1.0, 1.0}};
  const Vector dy = lin(0.0, y0);
  const Vector dfdr = Vector::Zero(2);
  const double e1 = integrator::step(lin, 0.0, y0, dy, dfdr, 0.02, a).error.norm();
  const double e2 = integrator::step(lin, 0.0, y0, dy, dfdr, 0.01, a).error.norm();
  EXPECT_NEAR(e1 / e2, 8.0, 1.0);
}

TEST(Step, LocalErrorIsThirdOrder) {
  const Matrix a{{-1.0}};
  const integrator::Rhs lin = [&](double, const Vector& y) -> Vector { return a * y; };
  const Vector y0{{1.0}};
  auto local_error = [&](double h) {
    const auto s = integrator::step(lin, 0.0, y0, lin(0.0, y0), Vector::Zero(1), h, a);
    return std::abs(s.y_new(0) - std::exp(-h));
  };
  EXPECT_NEAR(local_error(0.02) / local_error(0.01), 16.0, 2.0);
}

TEST(Step, TinyStepHasNegligibleError) {
  const Matrix a{{-3.0}};
  const integrator::Rhs lin = [&](double, const Vector& y) -> Vector { return a * y; };
  const Vector y0{{1.0}};
  const auto s = integrator::step(lin, 0.0, y0, lin(0.0, y0), Vector::Zero(1), 1e-12, a);
  EXPECT_LT(std::abs(s.error(0)), 1e-8);
}

TEST(Step, ZeroRhsIsFixed) {
  const integrator::Rhs zero = [](double, const Vector& y) -> Vector {
    return Vector::Zero(y.size());
  };
  const Vector y0{{4.0, 5.0}};
  const auto s = integrator::step(zero, 0.0, y0, Vector::Zero(2), Vector::Zero(2), 0.5,
                                  Matrix::Zero(2, 2));
  EXPECT_EQ(s.y_new, y0);
  EXPECT_EQ(s.error.norm(), 0.0);
}

TEST(Step, StiffLimitIsDamped) {
  // L-stability: for h * lambda -> -inf the step maps y to ~0.
  const Matrix a{{-1e12}};
  const integrator::Rhs lin = [&](double, const Vector& y) -> Vector { return a * y; };
  const Vector y0{{1.0}};
  const auto s = integrator::step(lin, 0.0, y0, lin(0.0, y0), Vector::Zero(1), 1.0, a);
  EXPECT_LT(std::abs(s.y_new(0)), 1e-6);
}

TEST(Step, SingularStageMatrixThrows) {
  // I/(h gamma) - J vanishes for J = 2 I and h = 1.
  const Matrix j = 2.0 * Matrix::Identity(2, 2);
  const integrator::Rhs lin = [&](double, const Vector& y) -> Vector { return j * y; };
  const Vector y0{{1.0, 1.0}};
  EXPECT_THROW(integrator::step(lin, 0.0, y0, lin(0.0, y0), Vector::Zero(2), 1.0, j),
               integrator::StageSolveFailure);
}

TEST(RhsJacobian, ForwardDifferenceMatchesLinearMap) {
  const Matrix a{{-1.0, 0.5}, {0.25, -2.0}};
  const integrator::Rhs lin = [&](double, const Vector& y) -> Vector { return a * y; };
  const Vector y{{0.3, 2.0}};
  const Matrix j = integrator::rhs_jacobian(lin, 0.0, y, lin(0.0, y));
  EXPECT_LT((j - a).cwiseAbs().maxCoeff(), 1e-7);
}

}  // namespace
}  // namespace ssopt
