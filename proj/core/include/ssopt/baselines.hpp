#pragma once

#include <functional>
#include <string>

#include "ssopt/core.hpp"
#include "ssopt/flow.hpp"

namespace ssopt::baselines {

struct BaselineResult {
  Vector theta;
  StateBlocks states;  // empty for unconstrained runs
  double objective = 0.0;
  double constraint_violation = 0.0;
  int iterations = 0;        // inner quasi-Newton iterations in total
  int outer_iterations = 0;  // multiplier updates, constrained solver only
  long function_evals = 0;
  bool converged = false;
  std::string reason;
  double wall_time = 0.0;
};

/// Returns f(x) and writes the gradient into `grad`.
using ValueGradFn = std::function<double(const Vector& x, Vector& grad)>;

struct QuasiNewtonOptions {
  double tol = 1e-6;  // on ||grad||_inf
  int max_iter = 1000;
  double armijo_c = 1e-4;
  int max_halvings = 50;
};

/// BFGS with inverse-Hessian updates and halving backtracking under the
/// Armijo condition.
BaselineResult quasi_newton_unconstrained(const ValueGradFn& fn, const Vector& x0,
                                          const QuasiNewtonOptions& options = {});

struct AugLagOptions {
  double tol = 1e-6;
  int max_outer = 20;
  double rho_initial = 10.0;
  double rho_growth = 10.0;
  double min_violation_decrease = 4.0;  // grow rho unless violation shrinks by this factor
  int inner_max_iter = 500;
};

/// Augmented Lagrangian over z = (theta, x^1..x^m) for the equality
/// constraints f(theta, x^i, u_i) = 0. Multipliers start at the least-squares
/// estimate at the initial point.
BaselineResult augmented_lagrangian_constrained(const FlowProblem& problem, const FlowState& init,
                                                const AugLagOptions& options = {});

}  // namespace ssopt::baselines
