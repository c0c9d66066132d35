#include "ssopt/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ssopt/numerics.hpp"

namespace ssopt::baselines {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

BaselineResult quasi_newton_unconstrained(const ValueGradFn& fn, const Vector& x0,
                                          const QuasiNewtonOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = x0.size();
  BaselineResult out;

  // A throwing evaluation counts as a non-finite trial point.
  auto evaluate = [&](const Vector& at, Vector& grad) {
    ++out.function_evals;
    try {
      return fn(at, grad);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  Vector x = x0;
  Vector g(n);
  double fx = evaluate(x, g);
  Matrix h_inv = Matrix::Identity(n, n);
  bool scaled = false;

  auto finish = [&](bool converged, std::string reason, int iterations) {
    out.theta = x;
    out.objective = fx;
    out.iterations = iterations;
    out.converged = converged;
    out.reason = std::move(reason);
    out.wall_time = seconds_since(t0);
    return out;
  };

  if (!std::isfinite(fx) || !g.allFinite()) return finish(false, "NonFiniteStart", 0);

  Vector x_new(n), g_new(n);
  for (int it = 0; it < options.max_iter; ++it) {
    if (inf_norm(g) < options.tol) return finish(true, "GradientTolerance", it);

    Vector p = -(h_inv * g);
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      scaled = false;
      p = -g;
      slope = g.dot(p);
    }

    // Until the inverse Hessian carries curvature information the first
    // trial step is limited to unit length.
    double alpha = scaled ? 1.0 : std::min(1.0, 1.0 / p.norm());
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls <= options.max_halvings; ++ls) {
      x_new = x + alpha * p;
      f_new = evaluate(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= fx + options.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return finish(false, "LineSearchFailure", it);

    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double ys = y.dot(s);
    if (ys > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h_inv *= ys / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / ys;
      const Vector hy = h_inv * y;
      // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      h_inv.noalias() += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                         rho * (hy * s.transpose() + s * hy.transpose());
    }
    x = x_new;
    g = g_new;
    fx = f_new;
  }
  if (inf_norm(g) < options.tol) return finish(true, "GradientTolerance", options.max_iter);
  return finish(false, "MaxIterations", options.max_iter);
}

namespace {

// Constraint values and Jacobian for z = (theta, x^1, ..., x^m).
struct ConstraintEval {
  Vector c;
  Matrix jac;
};

class ConstrainedView {
 public:
  explicit ConstrainedView(const FlowProblem& p)
      : p_(p),
        n_theta_(p.model.n_theta),
        n_x_(p.model.n_x),
        m_(p.conditions.size()) {}

  [[nodiscard]] FlowState unpack(const Vector& z) const {
    return FlowState::unflatten(z, n_theta_, n_x_, m_);
  }

  [[nodiscard]] ConstraintEval constraints(const FlowState& s, bool with_jacobian) const {
    ConstraintEval out;
    const Eigen::Index rows = n_x_ * static_cast<Eigen::Index>(m_);
    out.c.resize(rows);
    if (with_jacobian) out.jac = Matrix::Zero(rows, n_theta_ + rows);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto row = static_cast<Eigen::Index>(i) * n_x_;
      const Vector& u = p_.conditions[i].u;
      out.c.segment(row, n_x_) = p_.model.f(s.theta, s.states[i], u);
      if (with_jacobian) {
        out.jac.block(row, 0, n_x_, n_theta_) = p_.model.jac_theta(s.theta, s.states[i], u);
        out.jac.block(row, n_theta_ + row, n_x_, n_x_) = p_.model.jac_x(s.theta, s.states[i], u);
      }
    }
    return out;
  }

  [[nodiscard]] Vector objective_gradient(const FlowState& s) const {
    Vector g(n_theta_ + n_x_ * static_cast<Eigen::Index>(m_));
    g.head(n_theta_) = p_.objective.grad_theta(s.theta, s.states);
    const StateBlocks gx = p_.objective.grad_x(s.theta, s.states);
    for (std::size_t i = 0; i < m_; ++i) {
      g.segment(n_theta_ + static_cast<Eigen::Index>(i) * n_x_, n_x_) = gx[i];
    }
    return g;
  }

  [[nodiscard]] double objective(const FlowState& s) const {
    return p_.objective.eval(s.theta, s.states);
  }

 private:
  const FlowProblem& p_;
  Eigen::Index n_theta_;
  Eigen::Index n_x_;
  std::size_t m_;
};

}  // namespace

BaselineResult augmented_lagrangian_constrained(const FlowProblem& problem, const FlowState& init,
                                                const AugLagOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  const ConstrainedView view(problem);

  BaselineResult out;
  Vector z = init.flatten();
  double rho = options.rho_initial;

  Vector mu;
  double violation = 0.0;
  try {
    const FlowState s0 = view.unpack(z);
    const ConstraintEval c0 = view.constraints(s0, true);
    // Least-squares multipliers: argmin ||grad J + A^T mu||.
    mu = -(numerics::pinv(c0.jac.transpose()) * view.objective_gradient(s0));
    violation = inf_norm(c0.c);
  } catch (const std::exception&) {
    mu = Vector::Zero(problem.model.n_x * static_cast<Eigen::Index>(problem.conditions.size()));
    violation = std::numeric_limits<double>::infinity();
  }
  if (!mu.allFinite()) mu.setZero();

  Vector best_z = z;
  double best_violation = std::isfinite(violation) ? violation
                                                   : std::numeric_limits<double>::infinity();
  const ValueGradFn lagrangian = [&](const Vector& zz, Vector& grad) {
    const FlowState s = view.unpack(zz);
    const ConstraintEval c = view.constraints(s, true);
    const Vector weights = mu + rho * c.c;
    grad = view.objective_gradient(s) + c.jac.transpose() * weights;
    return view.objective(s) + mu.dot(c.c) + 0.5 * rho * c.c.squaredNorm();
  };

  QuasiNewtonOptions inner;
  inner.tol = options.tol;
  inner.max_iter = options.inner_max_iter;

  bool converged = false;
  std::string reason = "MaxOuterIterations";
  int outer = 0;
  for (outer = 1; outer <= options.max_outer; ++outer) {
    const BaselineResult sub = quasi_newton_unconstrained(lagrangian, z, inner);
    out.iterations += sub.iterations;
    out.function_evals += sub.function_evals;
    if (!sub.theta.allFinite()) {
      reason = "NonFiniteIterate";
      break;
    }
    z = sub.theta;
    const ConstraintEval c = view.constraints(view.unpack(z), false);
    const double v = inf_norm(c.c);
    if (!std::isfinite(v)) {
      reason = "NonFiniteIterate";
      break;
    }
    if (v < best_violation) {
      best_violation = v;
      best_z = z;
    }
    if (v < options.tol && sub.converged) {
      converged = true;
      reason = "Converged";
      best_z = z;
      break;
    }
    mu += rho * c.c;
    if (v > violation / options.min_violation_decrease) rho *= options.rho_growth;
    violation = v;
  }

  out.outer_iterations = std::min(outer, options.max_outer);
  const FlowState final_state = view.unpack(converged ? z : best_z);
  out.theta = final_state.theta;
  out.states = final_state.states;
  out.converged = converged;
  out.reason = reason;
  try {
    out.objective = view.objective(final_state);
    out.constraint_violation = inf_norm(view.constraints(final_state, false).c);
  } catch (const std::exception&) {
    out.objective = std::numeric_limits<double>::quiet_NaN();
    out.constraint_violation = std::numeric_limits<double>::infinity();
  }
  out.wall_time = seconds_since(t0);
  return out;
}

}  // namespace ssopt::baselines
