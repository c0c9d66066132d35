#include "ssopt/flow.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ssopt/errors.hpp"
#include "ssopt/integrator.hpp"
#include "ssopt/numerics.hpp"
#include "ssopt/sensitivity.hpp"

namespace ssopt {

void FlowProblem::validate() const {
  if (conditions.empty()) throw std::invalid_argument("FlowProblem: at least one condition");
  if (!model.f || !model.jac_x || !model.jac_theta) {
    throw std::invalid_argument("FlowProblem: model callbacks missing");
  }
  if (!objective.eval || !objective.grad_theta || !objective.grad_x) {
    throw std::invalid_argument("FlowProblem: objective callbacks missing");
  }
  for (const auto& c : conditions) {
    if (c.u.size() != model.n_u) throw std::invalid_argument("FlowProblem: input size mismatch");
    if (!c.data.allFinite()) throw std::invalid_argument("FlowProblem: non-finite data");
  }
  config.validate();
}

namespace {

void check_shape(const FlowProblem& problem, const FlowState& state) {
  if (state.theta.size() != problem.model.n_theta ||
      state.states.size() != problem.conditions.size()) {
    throw std::invalid_argument("flow: state does not match problem dimensions");
  }
  for (const auto& block : state.states) {
    if (block.size() != problem.model.n_x) {
      throw std::invalid_argument("flow: state block has wrong dimension");
    }
  }
}

}  // namespace

namespace {

// Model quantities of one condition that enter the flow derivative.
struct BlockTerms {
  Matrix s_hat;
  Vector f;
};

BlockTerms block_terms(const FlowProblem& problem, const Vector& theta, const Vector& x,
                       std::size_t i) {
  const Vector& u = problem.conditions[i].u;
  BlockTerms t;
  t.s_hat = sensitivity_hat(problem.model, theta, x, u);
  if (problem.config.lambda != 0.0) t.f = problem.model.f(theta, x, u);
  return t;
}

FlowState assemble(const FlowProblem& problem, const FlowState& state,
                   const std::vector<BlockTerms>& terms) {
  const std::size_t m = terms.size();
  Vector grad = problem.objective.grad_theta(state.theta, state.states);
  const StateBlocks grad_x = problem.objective.grad_x(state.theta, state.states);
  for (std::size_t i = 0; i < m; ++i) grad.noalias() += terms[i].s_hat.transpose() * grad_x[i];

  FlowState d;
  d.r = state.r;
  d.theta = -grad;
  if (!d.theta.allFinite()) throw NumericalFailure("flow rhs: non-finite parameter block");
  d.states.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    d.states[i] = terms[i].s_hat * d.theta;
    if (problem.config.lambda != 0.0) d.states[i].noalias() += problem.config.lambda * terms[i].f;
    if (!d.states[i].allFinite()) {
      throw NumericalFailure("flow rhs: non-finite state block " + std::to_string(i));
    }
  }
  return d;
}

std::vector<BlockTerms> all_block_terms(const FlowProblem& problem, const FlowState& state) {
  std::vector<BlockTerms> terms(problem.conditions.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = block_terms(problem, state.theta, state.states[i], i);
  }
  return terms;
}

}  // namespace

FlowState rhs(const FlowProblem& problem, const FlowState& state) {
  check_shape(problem, state);
  return assemble(problem, state, all_block_terms(problem, state));
}

Matrix rhs_jacobian(const FlowProblem& problem, const FlowState& state, const Vector& f0) {
  check_shape(problem, state);
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  const Eigen::Index n_theta = problem.model.n_theta;
  const Eigen::Index n_x = problem.model.n_x;
  const std::size_t m = problem.conditions.size();
  const Vector y = state.flatten();
  Matrix jac(y.size(), y.size());
  auto delta_for = [&](double v) { return sqrt_eps * std::max(1e-5, std::abs(v)); };

  FlowState probe = state;
  for (Eigen::Index j = 0; j < n_theta; ++j) {
    const double v = state.theta(j);
    probe.theta(j) = v + delta_for(v);
    jac.col(j) = (rhs(problem, probe).flatten() - f0) / (probe.theta(j) - v);
    probe.theta(j) = v;
  }

  // A state block only enters its own model terms, so the remaining blocks
  // are reused across its columns.
  std::vector<BlockTerms> terms = all_block_terms(problem, state);
  for (std::size_t i = 0; i < m; ++i) {
    const BlockTerms saved = terms[i];
    for (Eigen::Index j = 0; j < n_x; ++j) {
      const double v = state.states[i](j);
      probe.states[i](j) = v + delta_for(v);
      terms[i] = block_terms(problem, probe.theta, probe.states[i], i);
      const Eigen::Index col = n_theta + static_cast<Eigen::Index>(i) * n_x + j;
      jac.col(col) = (assemble(problem, probe, terms).flatten() - f0) / (probe.states[i](j) - v);
      probe.states[i](j) = v;
    }
    terms[i] = saved;
  }
  return jac;
}

bool stop_check(const FlowState& derivative, double tol) {
  double worst = derivative.theta.norm();
  for (const auto& block : derivative.states) worst = std::max(worst, block.norm());
  return worst < tol;
}

double manifold_residual(const FlowProblem& problem, const FlowState& state) {
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.conditions.size(); ++i) {
    const Vector f = problem.model.f(state.theta, state.states[i], problem.conditions[i].u);
    if (f.size() > 0) worst = std::max(worst, f.cwiseAbs().maxCoeff());
  }
  return worst;
}

double manifold_distance(const FlowProblem& problem, const FlowState& state) {
  const ModelSpec& model = problem.model;
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.conditions.size(); ++i) {
    const Vector& x = state.states[i];
    const Vector& u = problem.conditions[i].u;
    Vector gap;
    if (model.has_analytic_steady_state()) {
      gap = x - model.analytic_steady_state(state.theta, u);
    } else {
      try {
        gap = numerics::solve(model.jac_x(state.theta, x, u), model.f(state.theta, x, u));
      } catch (const SingularMatrixError&) {
        return std::numeric_limits<double>::infinity();
      }
    }
    if (!gap.allFinite()) return std::numeric_limits<double>::infinity();
    if (gap.size() > 0) worst = std::max(worst, gap.cwiseAbs().maxCoeff());
  }
  return worst;
}

RunResult run_flow(const FlowProblem& problem, const FlowState& init, bool record_trajectory) {
  const auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  check_shape(problem, init);

  RunResult result;
  result.final = init;
  result.final.r = 0.0;

  const auto n_theta = problem.model.n_theta;
  const auto n_x = problem.model.n_x;
  const std::size_t m = problem.conditions.size();
  auto unflatten = [&](const Vector& y, double r) {
    return FlowState::unflatten(y, n_theta, n_x, m, r);
  };

  long evals = 0;
  const integrator::Rhs flat_rhs = [&](double r, const Vector& y) {
    ++evals;
    return rhs(problem, unflatten(y, r)).flatten();
  };
  const integrator::StopCallback stop = [&](double, const Vector&, const Vector& dy) {
    return stop_check(unflatten(dy, 0.0), problem.config.tol);
  };
  // Tracks the last accepted point so a failure mid-run still reports it.
  Vector last_y = init.flatten();
  double last_r = 0.0;
  if (record_trajectory) result.trajectory.push_back(result.final);
  const integrator::StepObserver observer = [&](double r, const Vector& y) {
    last_y = y;
    last_r = r;
    if (record_trajectory) result.trajectory.push_back(unflatten(y, r));
  };

  integrator::Options options;
  options.rel_tol = problem.config.integrator_rel_tol;
  options.abs_tol = problem.config.integrator_abs_tol;
  options.max_rhs_evals = problem.config.max_rhs_evals;
  options.autonomous = true;
  // One full evaluation per parameter plus one block sweep.
  const long jacobian_cost = n_theta + n_x;
  options.jacobian_cost = jacobian_cost;
  options.jacobian = [&](double r, const Vector& y, const Vector& f0) {
    evals += jacobian_cost;
    return rhs_jacobian(problem, unflatten(y, r), f0);
  };

  try {
    if (!init.all_finite()) throw NumericalFailure("run_flow: non-finite initial state");
    const auto out = integrator::integrate_adaptive(flat_rhs, init.flatten(), problem.config.r_max,
                                                    options, stop, observer);
    result.final = unflatten(out.y, out.r);
    result.steps_accepted = out.stats.steps_accepted;
    result.steps_rejected = out.stats.steps_rejected;
    switch (out.outcome) {
      case integrator::Outcome::Stopped: result.reason = StopReason::ToleranceMet; break;
      case integrator::Outcome::HorizonReached: result.reason = StopReason::HorizonReached; break;
      case integrator::Outcome::BudgetExhausted:
        result.reason = StopReason::EvalBudgetExhausted;
        break;
      case integrator::Outcome::StepUnderflow:
        result.reason = StopReason::NumericalFailure;
        result.message = "step size underflow";
        break;
    }
  } catch (const std::exception& e) {
    result.final = unflatten(last_y, last_r);
    result.reason = StopReason::NumericalFailure;
    result.message = e.what();
  }
  result.rhs_evals = evals;
  result.converged = result.reason == StopReason::ToleranceMet;

  try {
    result.objective = problem.objective.eval(result.final.theta, result.final.states);
    result.manifold_residual = manifold_residual(problem, result.final);
  } catch (const std::exception&) {
    result.objective = std::numeric_limits<double>::quiet_NaN();
    result.manifold_residual = std::numeric_limits<double>::quiet_NaN();
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace ssopt
