#include "ssopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssopt/errors.hpp"
#include "ssopt/numerics.hpp"
#include "ssopt/random.hpp"

namespace ssopt {

Eigen::Index FlowState::flat_size() const {
  Eigen::Index n = theta.size();
  for (const auto& block : states) n += block.size();
  return n;
}

Vector FlowState::flatten() const {
  Vector flat(flat_size());
  Eigen::Index offset = 0;
  flat.segment(offset, theta.size()) = theta;
  offset += theta.size();
  for (const auto& block : states) {
    flat.segment(offset, block.size()) = block;
    offset += block.size();
  }
  return flat;
}

FlowState FlowState::unflatten(const Vector& flat, Eigen::Index n_theta, Eigen::Index n_x,
                               std::size_t n_blocks, double r) {
  if (flat.size() != n_theta + n_x * static_cast<Eigen::Index>(n_blocks)) {
    throw std::invalid_argument("FlowState::unflatten: size mismatch");
  }
  FlowState state;
  state.r = r;
  state.theta = flat.head(n_theta);
  state.states.reserve(n_blocks);
  for (std::size_t i = 0; i < n_blocks; ++i) {
    state.states.emplace_back(flat.segment(n_theta + static_cast<Eigen::Index>(i) * n_x, n_x));
  }
  return state;
}

bool FlowState::all_finite() const {
  if (!theta.allFinite() || !std::isfinite(r)) return false;
  for (const auto& block : states) {
    if (!block.allFinite()) return false;
  }
  return true;
}

bool operator==(const FlowState& a, const FlowState& b) {
  if (a.r != b.r || a.theta.size() != b.theta.size() || a.states.size() != b.states.size()) {
    return false;
  }
  if (a.theta != b.theta) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (a.states[i].size() != b.states[i].size() || a.states[i] != b.states[i]) return false;
  }
  return true;
}

void FlowConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("FlowConfig: lambda must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("FlowConfig: tol must be > 0");
  if (!(r_max >= 0.0)) throw std::invalid_argument("FlowConfig: r_max must be >= 0");
  if (max_rhs_evals <= 0) throw std::invalid_argument("FlowConfig: max_rhs_evals must be > 0");
  if (!(integrator_rel_tol > 0.0) || !(integrator_abs_tol > 0.0)) {
    throw std::invalid_argument("FlowConfig: integrator tolerances must be > 0");
  }
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ToleranceMet: return "ToleranceMet";
    case StopReason::HorizonReached: return "HorizonReached";
    case StopReason::EvalBudgetExhausted: return "EvalBudgetExhausted";
    case StopReason::NumericalFailure: return "NumericalFailure";
  }
  return "NumericalFailure";
}

std::optional<StopReason> parse_stop_reason(std::string_view text) {
  for (auto r : {StopReason::ToleranceMet, StopReason::HorizonReached,
                 StopReason::EvalBudgetExhausted, StopReason::NumericalFailure}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

namespace {

Vector random_vector(Rng& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

double scaled_error(const Matrix& analytic, const Matrix& fd) {
  if (analytic.rows() != fd.rows() || analytic.cols() != fd.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return numerics::max_abs(analytic - fd) / (1.0 + numerics::max_abs(fd));
}

}  // namespace

JacobianReport validate_model(const ModelSpec& model, int n_samples, std::uint64_t seed,
                              const SampleDomain& domain) {
  JacobianReport report;
  Rng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    const Vector theta = random_vector(rng, model.n_theta, domain.theta_lo, domain.theta_hi);
    const Vector x = random_vector(rng, model.n_x, domain.x_lo, domain.x_hi);
    const Vector u = random_vector(rng, model.n_u, domain.u_lo, domain.u_hi);
    try {
      const Matrix jx = model.jac_x(theta, x, u);
      const Matrix jt = model.jac_theta(theta, x, u);
      if (!model.f(theta, x, u).allFinite() || !jx.allFinite() || !jt.allFinite()) {
        throw NumericalFailure("non-finite model output");
      }
      const Matrix fd_x = numerics::finite_diff_jacobian(
          [&](const Vector& xx) { return model.f(theta, xx, u); }, x);
      const Matrix fd_t = numerics::finite_diff_jacobian(
          [&](const Vector& tt) { return model.f(tt, x, u); }, theta);
      report.max_rel_err_jac_x = std::max(report.max_rel_err_jac_x, scaled_error(jx, fd_x));
      report.max_rel_err_jac_theta =
          std::max(report.max_rel_err_jac_theta, scaled_error(jt, fd_t));
    } catch (const std::exception& e) {
      report.finite = false;
      report.failure = e.what();
      report.failing_theta = theta;
      report.failing_x = x;
      report.failing_u = u;
      report.samples = s + 1;
      return report;
    }
    report.samples = s + 1;
  }
  return report;
}

}  // namespace ssopt
