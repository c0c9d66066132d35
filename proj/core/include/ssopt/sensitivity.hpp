#pragma once

#include <span>

#include "ssopt/core.hpp"

namespace ssopt {

/// Steady-state sensitivity S solving jac_x * S = -jac_theta.
/// Throws SingularMatrixError when jac_x is singular.
Matrix sensitivity_exact(const ModelSpec& model, const Vector& theta, const Vector& x,
                         const Vector& u);

/// S_hat = -pinv(jac_x) * jac_theta. Defined everywhere; equals S when
/// jac_x is invertible. Uses an LU solve when it succeeds and the SVD
/// pseudoinverse otherwise.
Matrix sensitivity_hat(const ModelSpec& model, const Vector& theta, const Vector& x,
                       const Vector& u);

/// Total derivative of J along the manifold:
/// dJ/dtheta = grad_theta J + sum_i S_hat_i^T grad_{x^i} J.
Vector manifold_gradient(const ModelSpec& model, const ObjectiveSpec& objective,
                         const Vector& theta, const StateBlocks& states,
                         std::span<const Condition> conditions);

}  // namespace ssopt
