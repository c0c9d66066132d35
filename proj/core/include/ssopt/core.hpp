#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ssopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One state vector per experimental condition.
using StateBlocks = std::vector<Vector>;

using VectorField = std::function<Vector(const Vector& theta, const Vector& x, const Vector& u)>;
using FieldJacobian = std::function<Matrix(const Vector& theta, const Vector& x, const Vector& u)>;
using SteadyStateMap = std::function<Vector(const Vector& theta, const Vector& u)>;

/// A dynamical model dx/dt = f(theta, x, u) whose equilibria constrain the
/// optimisation. Jacobians are supplied analytically and checked against
/// finite differences by validate_model().
struct ModelSpec {
  std::string name;
  int n_x = 0;
  int n_theta = 0;
  int n_u = 0;
  VectorField f;
  FieldJacobian jac_x;      // n_x x n_x
  FieldJacobian jac_theta;  // n_x x n_theta
  SteadyStateMap analytic_steady_state;  // empty unless closed form is known

  [[nodiscard]] bool has_analytic_steady_state() const {
    return static_cast<bool>(analytic_steady_state);
  }
};

/// An experiment: input u and the observed steady-state values.
struct Condition {
  Vector u;
  Vector data;
  std::string id;
};

/// Objective J(theta, x^1..x^m) with its explicit partial derivatives.
struct ObjectiveSpec {
  std::function<double(const Vector& theta, const StateBlocks& states)> eval;
  std::function<Vector(const Vector& theta, const StateBlocks& states)> grad_theta;
  std::function<StateBlocks(const Vector& theta, const StateBlocks& states)> grad_x;
};

/// Concatenated optimisation state (theta, x^1, ..., x^m) at pseudo-time r.
/// The same layout doubles as a derivative d/dr when produced by flow::rhs.
struct FlowState {
  Vector theta;
  StateBlocks states;
  double r = 0.0;

  [[nodiscard]] Eigen::Index flat_size() const;
  [[nodiscard]] Vector flatten() const;
  /// Inverse of flatten().
  static FlowState unflatten(const Vector& flat, Eigen::Index n_theta, Eigen::Index n_x,
                             std::size_t n_blocks, double r = 0.0);
  [[nodiscard]] bool all_finite() const;
};

bool operator==(const FlowState& a, const FlowState& b);

struct FlowConfig {
  double lambda = 20.0;
  double tol = 1e-6;
  double r_max = 1e4;
  long max_rhs_evals = 100000;
  double integrator_rel_tol = 1e-6;
  double integrator_abs_tol = 1e-8;

  /// Throws std::invalid_argument on negative lambda or non-positive tolerances.
  void validate() const;
};

enum class StopReason { ToleranceMet, HorizonReached, EvalBudgetExhausted, NumericalFailure };

std::string_view to_string(StopReason reason);
std::optional<StopReason> parse_stop_reason(std::string_view text);

struct RunResult {
  FlowState final;
  double objective = 0.0;
  double manifold_residual = 0.0;
  bool converged = false;
  StopReason reason = StopReason::NumericalFailure;
  std::string message;
  long rhs_evals = 0;
  long steps_accepted = 0;
  long steps_rejected = 0;
  double wall_time = 0.0;
  std::vector<FlowState> trajectory;  // accepted steps, only when requested
};

/// Box used to draw random evaluation points for validate_model().
struct SampleDomain {
  double theta_lo = -1.0, theta_hi = 1.0;
  double x_lo = 0.0, x_hi = 1.0;
  double u_lo = 0.0, u_hi = 1.0;
};

struct JacobianReport {
  double max_rel_err_jac_x = 0.0;
  double max_rel_err_jac_theta = 0.0;
  int samples = 0;
  bool finite = true;
  std::string failure;  // description of the first non-finite evaluation
  Vector failing_theta, failing_x, failing_u;

  [[nodiscard]] double max_error() const {
    return std::max(max_rel_err_jac_x, max_rel_err_jac_theta);
  }
  [[nodiscard]] bool passes(double threshold) const { return finite && max_error() < threshold; }
};

/// Compares the analytic Jacobians with central differences at random points.
/// The error at a point is max|J - J_fd| / (1 + max|J_fd|).
JacobianReport validate_model(const ModelSpec& model, int n_samples, std::uint64_t seed,
                              const SampleDomain& domain = {});

}  // namespace ssopt
