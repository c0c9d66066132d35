#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "ssopt/core.hpp"

namespace ssopt::integrator {

using Rhs = std::function<Vector(double r, const Vector& y)>;
/// Called after every accepted step with the derivative at the new point.
using StopCallback = std::function<bool(double r, const Vector& y, const Vector& dy)>;
using StepObserver = std::function<void(double r, const Vector& y)>;
/// Jacobian of rhs(r, .) at y given f0 = rhs(r, y).
using JacobianFn = std::function<Matrix(double r, const Vector& y, const Vector& f0)>;

struct IntegratorStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evals = 0;
  long jacobian_evals = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
};

enum class Outcome { Stopped, HorizonReached, BudgetExhausted, StepUnderflow };

std::string_view to_string(Outcome outcome);

struct Options {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  long max_rhs_evals = 100000;
  double initial_step = 0.0;  // 0 selects a step from the initial derivative
  bool autonomous = false;    // skips the time-derivative evaluation
  JacobianFn jacobian;        // empty selects forward differences
  long jacobian_cost = 0;     // rhs evaluations charged per custom Jacobian
};

struct Result {
  Vector y;
  Vector dy;  // derivative at y
  double r = 0.0;
  IntegratorStats stats;
  Outcome outcome = Outcome::HorizonReached;
};

/// Raised by step() when the stage matrix cannot be factorised.
class StageSolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepResult {
  Vector y_new;
  Vector error;  // embedded second-order estimate of the local error
};

/// One step of Rodas3, a four-stage L-stable Rosenbrock method of order 3
/// with an embedded order-2 solution. `dy` is rhs(r, y); `dfdr` the partial
/// derivative in r (zero for autonomous problems).
StepResult step(const Rhs& rhs, double r, const Vector& y, const Vector& dy, const Vector& dfdr,
                double h, const Matrix& jac);

/// Forward-difference Jacobian of rhs(r, .) at y given f0 = rhs(r, y).
Matrix rhs_jacobian(const Rhs& rhs, double r, const Vector& y, const Vector& f0);

/// Integrates y' = rhs(r, y) from r = 0 to r_max with local error control
/// |err_i| <= rel_tol * |y_i| + abs_tol. The stop callback is evaluated at
/// the initial point and after each accepted step.
Result integrate_adaptive(const Rhs& rhs, const Vector& y0, double r_max, const Options& options,
                          const StopCallback& stop = {}, const StepObserver& observer = {});

}  // namespace ssopt::integrator
