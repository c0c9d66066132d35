#pragma once

#include <vector>

#include "ssopt/core.hpp"

namespace ssopt {

struct FlowProblem {
  ModelSpec model;
  ObjectiveSpec objective;
  std::vector<Condition> conditions;
  FlowConfig config;

  void validate() const;
  [[nodiscard]] std::size_t n_conditions() const { return conditions.size(); }
};

/// Right-hand side of the retraction-stabilised gradient flow:
///   dtheta/dr = -dJ/dtheta
///   dx^i/dr   = S_hat_i * dtheta/dr + lambda * f(theta, x^i, u_i)
/// Throws NumericalFailure if any block of the result is non-finite.
FlowState rhs(const FlowProblem& problem, const FlowState& state);

/// Forward-difference Jacobian of the flattened flow derivative at `state`
/// given f0 = rhs(problem, state).flatten(). State-block columns reuse the
/// model terms of the other blocks, so the cost is about n_theta + n_x full
/// evaluations instead of n_theta + m * n_x.
Matrix rhs_jacobian(const FlowProblem& problem, const FlowState& state, const Vector& f0);

/// True iff max(||dtheta/dr||_2, max_i ||dx^i/dr||_2) < tol.
bool stop_check(const FlowState& derivative, double tol);

/// max_i ||f(theta, x^i, u_i)||_inf.
double manifold_residual(const FlowProblem& problem, const FlowState& state);

/// Distance of the state blocks from the steady-state manifold in state
/// space. Uses the model's closed-form steady state when available and the
/// Newton correction ||jac_x^{-1} f||_inf otherwise; a singular jac_x or a
/// non-finite steady state yields +inf. Unlike manifold_residual() it does
/// not shrink when the rates do.
double manifold_distance(const FlowProblem& problem, const FlowState& state);

RunResult run_flow(const FlowProblem& problem, const FlowState& init,
                   bool record_trajectory = false);

}  // namespace ssopt
