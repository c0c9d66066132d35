#include "ssopt/sensitivity.hpp"

#include <stdexcept>

#include "ssopt/errors.hpp"
#include "ssopt/numerics.hpp"

namespace ssopt {

Matrix sensitivity_exact(const ModelSpec& model, const Vector& theta, const Vector& x,
                         const Vector& u) {
  return numerics::solve(model.jac_x(theta, x, u), -model.jac_theta(theta, x, u));
}

Matrix sensitivity_hat(const ModelSpec& model, const Vector& theta, const Vector& x,
                       const Vector& u) {
  const Matrix jx = model.jac_x(theta, x, u);
  const Matrix jt = model.jac_theta(theta, x, u);
  try {
    return numerics::solve(jx, -jt);
  } catch (const SingularMatrixError&) {
    return -(numerics::pinv(jx) * jt);
  }
}

Vector manifold_gradient(const ModelSpec& model, const ObjectiveSpec& objective,
                         const Vector& theta, const StateBlocks& states,
                         std::span<const Condition> conditions) {
  if (states.size() != conditions.size()) {
    throw std::invalid_argument("manifold_gradient: one state block per condition required");
  }
  Vector grad = objective.grad_theta(theta, states);
  const StateBlocks grad_x = objective.grad_x(theta, states);
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (grad_x[i].isZero(0.0)) continue;
    const Matrix s_hat = sensitivity_hat(model, theta, states[i], conditions[i].u);
    grad.noalias() += s_hat.transpose() * grad_x[i];
  }
  return grad;
}

}  // namespace ssopt
