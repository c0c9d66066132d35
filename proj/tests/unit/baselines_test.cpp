#include <gtest/gtest.h>

#include <cmath>

#include "ssopt/baselines.hpp"
#include "ssopt/bench.hpp"
#include "ssopt/models.hpp"
#include "ssopt/numerics.hpp"
#include "test_support.hpp"

namespace ssopt {
namespace {

using baselines::augmented_lagrangian_constrained;
using baselines::quasi_newton_unconstrained;

const Vector kNoInput(0);

baselines::ValueGradFn cr_reduced(const models::ConversionReactionProblem& p) {
  return [p](const Vector& th, Vector& g) {
    const auto v = models::reduced_objective_cr(th, p);
    g = v.gradient;
    return v.value;
  };
}

Vector cr_oracle() {
  const auto r = quasi_newton_unconstrained(cr_reduced({}), Vector{{3.9, 1.5}},
                                            baselines::QuasiNewtonOptions{1e-12, 1000, 1e-4, 50});
  EXPECT_TRUE(r.converged);
  return r.theta;
}

TEST(QuasiNewton, QuadraticInFewIterations) {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = testing::random_vector(rng, 4, -5.0, 5.0);
    const auto fn = [&](const Vector& x, Vector& g) {
      g = x - a;
      return 0.5 * (x - a).squaredNorm();
    };
    const auto r = quasi_newton_unconstrained(fn, testing::random_vector(rng, 4, -5.0, 5.0),
                                              baselines::QuasiNewtonOptions{1e-10, 100, 1e-4, 50});
    EXPECT_TRUE(r.converged);
    EXPECT_LT((r.theta - a).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(r.iterations, 4 + 2);
    EXPECT_EQ(r.constraint_violation, 0.0);
    EXPECT_TRUE(r.states.empty());
  }
}

TEST(QuasiNewton, Rosenbrock) {
  const auto fn = [](const Vector& x, Vector& g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    g = Vector{{-2.0 * a - 400.0 * x(0) * b, 200.0 * b}};
    return a * a + 100.0 * b * b;
  };
  baselines::QuasiNewtonOptions o;
  o.tol = 1e-9;
  const auto r = quasi_newton_unconstrained(fn, Vector{{-1.2, 1.0}}, o);
  EXPECT_TRUE(r.converged) << r.reason;
  EXPECT_LT((r.theta - Vector{{1.0, 1.0}}).norm(), 1e-6);
}

TEST(QuasiNewton, AlreadyStationaryStopsImmediately) {
  const auto fn = [](const Vector& x, Vector& g) {
    g = Vector::Zero(x.size());
    return 1.0;
  };
  const auto r = quasi_newton_unconstrained(fn, Vector{{2.0}});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
}

TEST(QuasiNewton, NonFiniteStartAndLineSearchFailure) {
  const auto nan_fn = [](const Vector& x, Vector& g) {
    g = x;
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_EQ(quasi_newton_unconstrained(nan_fn, Vector{{1.0}}).reason, "NonFiniteStart");

  // Inconsistent gradient: no descent along -g ever satisfies Armijo.
  const auto wrong_grad = [](const Vector& x, Vector& g) {
    g = -x;
    return 0.5 * x.squaredNorm();
  };
  const auto r = quasi_newton_unconstrained(wrong_grad, Vector{{1.0}});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.reason, "LineSearchFailure");
}

TEST(QuasiNewton, ThrowingEvaluationIsTreatedAsNonFinite) {
  const auto fn = [](const Vector& x, Vector& g) {
    if (x(0) > 2.0) throw std::runtime_error("outside domain");
    g = Vector{{x(0) - 1.5}};
    return 0.5 * (x(0) - 1.5) * (x(0) - 1.5);
  };
  const auto r = quasi_newton_unconstrained(fn, Vector{{-10.0}});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.theta(0), 1.5, 1e-6);
}

TEST(QuasiNewton, ReducedConversionReactionMatchesFlowEndpoint) {
  const Vector th_star = cr_oracle();
  const auto r = quasi_newton_unconstrained(cr_reduced({}), Vector{{1.0, 1.0}});
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.theta - th_star).norm(), 1e-4);

  FlowConfig c;
  c.lambda = 20.0;
  const FlowProblem p = models::conversion_reaction_flow_problem({}, c);
  const FlowState init{Vector{{1.0, 1.0}}, {Vector{{0.5}}}, 0.0};
  const RunResult flow = run_flow(p, init);
  ASSERT_TRUE(flow.converged);
  EXPECT_LT((r.theta - flow.final.theta).norm(), 1e-4);
}

TEST(AugmentedLagrangian, ConversionReactionFromOnManifoldStart) {
  const Vector th_star = cr_oracle();
  const FlowProblem p = models::conversion_reaction_flow_problem({}, FlowConfig{});
  const Vector th0 = th_star + Vector{{0.2, 0.1}};
  const FlowState init{th0, {p.model.analytic_steady_state(th0, kNoInput)}, 0.0};
  const auto r = augmented_lagrangian_constrained(p, init);
  EXPECT_TRUE(r.converged) << r.reason;
  EXPECT_LT((r.theta - th_star).norm(), 1e-3);
  EXPECT_LT(r.constraint_violation, 1e-6);
  ASSERT_EQ(r.states.size(), 1u);
}

TEST(AugmentedLagrangian, OptimalFeasibleStartTakesOneOuterIteration) {
  models::ConversionReactionProblem prob;
  prob.x_bar = 1.5 / 5.4;  // optimum exactly at the prior mean
  const FlowProblem p = models::conversion_reaction_flow_problem(prob, FlowConfig{});
  const Vector th{{3.9, 1.5}};
  const FlowState init{th, {p.model.analytic_steady_state(th, kNoInput)}, 0.0};
  const auto r = augmented_lagrangian_constrained(p, init);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.outer_iterations, 1);
  EXPECT_LT((r.theta - th).norm(), 1e-12);
}

TEST(AugmentedLagrangian, AgreesWithOtherMethodsFromFeasibleStarts) {
  const Vector th_star = cr_oracle();
  const FlowProblem p = models::conversion_reaction_flow_problem({}, FlowConfig{});
  Rng rng(73);
  for (int i = 0; i < 10; ++i) {
    const Vector th0 = testing::random_vector(rng, 2, 0.5, 6.0);
    const FlowState init{th0, {p.model.analytic_steady_state(th0, kNoInput)}, 0.0};
    const auto r = augmented_lagrangian_constrained(p, init);
    ASSERT_TRUE(r.converged) << r.reason;
    EXPECT_LT((r.theta - th_star).norm(), 1e-3);
  }
}

TEST(AugmentedLagrangian, BadNgfStartIsNotReportedAsConverged) {
  // Start 0 of the default NGF bench stalls at a point with a tiny residual
  // that is nowhere near a steady state.
  bench::BenchConfig cfg;
  cfg.n_starts = 1;
  models::NgfErkProblem prob;
  models::regenerate_data(prob, cfg.data_seed);
  const FlowProblem p = models::ngf_erk_flow_problem(prob, FlowConfig{});
  const auto r = augmented_lagrangian_constrained(p, bench::sample_starts(cfg)[0]);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(manifold_distance(p, FlowState{r.theta, r.states, 0.0}), 1e-6);
}

TEST(AugmentedLagrangian, ConvergedResultsAreFeasible) {
  bench::BenchConfig cfg;
  cfg.n_starts = 10;
  cfg.seed = 5;
  models::NgfErkProblem prob;
  models::regenerate_data(prob, cfg.data_seed);
  const FlowProblem p = models::ngf_erk_flow_problem(prob, FlowConfig{});
  for (const auto& start : bench::sample_starts(cfg)) {
    const auto r = augmented_lagrangian_constrained(p, start);
    if (r.converged) {
      EXPECT_LT(r.constraint_violation, 1e-6);
    } else {
      EXPECT_NE(r.reason, "Converged");
    }
  }
}

}  // namespace
}  // namespace ssopt
