#include "ssopt/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ssopt/errors.hpp"
#include "ssopt/numerics.hpp"

namespace ssopt::integrator {

namespace {

// Rodas3 (Sandu et al. 1997) in the transformed Rosenbrock form
//   (I/(h*gamma) - J) k_i = f(y + sum_j a_ij k_j) + sum_j (c_ij/h) k_j + h*gamma_i*f_r
// with y_new = y + sum m_i k_i and err = sum e_i k_i.
constexpr int kStages = 4;
constexpr double kGamma = 0.5;
constexpr std::array<std::array<double, kStages>, kStages> kA{{
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 0.0, 0.0, 0.0},
    {2.0, 0.0, 0.0, 0.0},
    {2.0, 0.0, 1.0, 0.0},
}};
constexpr std::array<std::array<double, kStages>, kStages> kC{{
    {0.0, 0.0, 0.0, 0.0},
    {4.0, 0.0, 0.0, 0.0},
    {1.0, -1.0, 0.0, 0.0},
    {1.0, -1.0, -8.0 / 3.0, 0.0},
}};
constexpr std::array<double, kStages> kAlpha{0.0, 0.0, 1.0, 1.0};
constexpr std::array<double, kStages> kGammaSum{0.5, 1.5, 0.0, 0.0};
constexpr std::array<bool, kStages> kNewF{true, false, true, true};
constexpr std::array<double, kStages> kM{2.0, 0.0, 1.0, 1.0};
constexpr std::array<double, kStages> kE{0.0, 0.0, 0.0, 1.0};
constexpr double kErrorOrder = 3.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

double error_ratio(const Vector& err, const Vector& y, const Vector& y_new, const Options& o) {
  double ratio = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = o.abs_tol + o.rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
    ratio = std::max(ratio, std::abs(err(i)) / scale);
  }
  return ratio;
}

double initial_step(const Vector& y, const Vector& dy, double r_max, const Options& o) {
  if (o.initial_step > 0.0) return std::min(o.initial_step, r_max);
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale = o.abs_tol + o.rel_tol * std::abs(y(i));
    d0 = std::max(d0, std::abs(y(i)) / scale);
    d1 = std::max(d1, std::abs(dy(i)) / scale);
  }
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  if (d1 == 0.0) h = r_max;
  return std::min(h, r_max);
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Stopped: return "Stopped";
    case Outcome::HorizonReached: return "HorizonReached";
    case Outcome::BudgetExhausted: return "BudgetExhausted";
    case Outcome::StepUnderflow: return "StepUnderflow";
  }
  return "StepUnderflow";
}

Matrix rhs_jacobian(const Rhs& rhs, double r, const Vector& y, const Vector& f0) {
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Matrix jac(y.size(), y.size());
  Vector probe = y;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double delta = sqrt_eps * std::max(1e-5, std::abs(y(j)));
    probe(j) = y(j) + delta;
    jac.col(j) = (rhs(r, probe) - f0) / (probe(j) - y(j));
    probe(j) = y(j);
  }
  return jac;
}

StepResult step(const Rhs& rhs, double r, const Vector& y, const Vector& dy, const Vector& dfdr,
                double h, const Matrix& jac) {
  const Eigen::Index n = y.size();
  Matrix w = -jac;
  w.diagonal().array() += 1.0 / (h * kGamma);
  Eigen::PartialPivLU<Matrix> lu(w);
  // PartialPivLU never reports failure; inspect the pivots instead.
  const Vector pivots = lu.matrixLU().diagonal();
  const double threshold = 1e-14 * numerics::inf_norm(w);
  if (!pivots.allFinite() || (pivots.cwiseAbs().array() <= threshold).any()) {
    throw StageSolveFailure("Rosenbrock stage matrix is singular");
  }

  std::array<Vector, kStages> k;
  Vector stage_f = dy;
  for (int i = 0; i < kStages; ++i) {
    if (i > 0 && kNewF[i]) {
      Vector y_stage = y;
      for (int j = 0; j < i; ++j) {
        if (kA[i][j] != 0.0) y_stage.noalias() += kA[i][j] * k[j];
      }
      stage_f = rhs(r + kAlpha[i] * h, y_stage);
    }
    Vector b = stage_f;
    for (int j = 0; j < i; ++j) {
      if (kC[i][j] != 0.0) b.noalias() += (kC[i][j] / h) * k[j];
    }
    if (kGammaSum[i] != 0.0 && dfdr.size() == n) b.noalias() += (h * kGammaSum[i]) * dfdr;
    k[i] = lu.solve(b);
    if (!k[i].allFinite()) throw StageSolveFailure("non-finite Rosenbrock stage");
  }

  StepResult out{y, Vector::Zero(n)};
  for (int i = 0; i < kStages; ++i) {
    if (kM[i] != 0.0) out.y_new.noalias() += kM[i] * k[i];
    if (kE[i] != 0.0) out.error.noalias() += kE[i] * k[i];
  }
  return out;
}

Result integrate_adaptive(const Rhs& rhs, const Vector& y0, double r_max, const Options& options,
                          const StopCallback& stop, const StepObserver& observer) {
  Result result;
  result.y = y0;
  result.r = 0.0;
  IntegratorStats& stats = result.stats;

  auto done = [&](Outcome outcome) {
    if (stats.steps_accepted == 0) stats.min_step = stats.max_step = 0.0;
    result.outcome = outcome;
    return result;
  };
  auto eval = [&](double r, const Vector& y) {
    ++stats.rhs_evals;
    return rhs(r, y);
  };

  result.dy = eval(0.0, result.y);
  if (!result.dy.allFinite()) throw NumericalFailure("integrate_adaptive: non-finite rhs at y0");
  if (r_max <= 0.0) {
    return done(Outcome::HorizonReached);
  }
  if (stop && stop(result.r, result.y, result.dy)) {
    return done(Outcome::Stopped);
  }

  const Eigen::Index n = y0.size();
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  double h = initial_step(result.y, result.dy, r_max, options);
  Matrix jac;
  Vector dfdr = Vector::Zero(n);
  bool jac_current = false;
  bool last_rejected = false;

  while (true) {
    if (result.r >= r_max) {
      return done(Outcome::HorizonReached);
    }
    if (stats.rhs_evals >= options.max_rhs_evals) {
      return done(Outcome::BudgetExhausted);
    }
    h = std::min(h, r_max - result.r);
    if (h < 1e-14 * std::max(1.0, std::abs(result.r))) {
      return done(Outcome::StepUnderflow);
    }

    if (!jac_current) {
      if (options.jacobian) {
        stats.rhs_evals += options.jacobian_cost;
        jac = options.jacobian(result.r, result.y, result.dy);
      } else {
        stats.rhs_evals += n;
        jac = rhs_jacobian(rhs, result.r, result.y, result.dy);
      }
      ++stats.jacobian_evals;
      if (!options.autonomous) {
        const double dr = sqrt_eps * std::max(1.0, std::abs(result.r));
        dfdr = (eval(result.r + dr, result.y) - result.dy) / dr;
      }
      jac_current = true;
    }

    StepResult trial;
    double ratio = 0.0;
    bool ok = true;
    try {
      const Rhs counted = [&](double r, const Vector& y) { return eval(r, y); };
      trial = step(counted, result.r, result.y, result.dy, dfdr, h, jac);
      ratio = error_ratio(trial.error, result.y, trial.y_new, options);
      ok = std::isfinite(ratio) && trial.y_new.allFinite();
    } catch (const std::exception&) {
      // Stage failure or a non-finite evaluation inside the step.
      ok = false;
    }

    if (!ok || ratio > 1.0) {
      ++stats.steps_rejected;
      const double factor =
          ok ? std::clamp(kSafety * std::pow(ratio, -1.0 / kErrorOrder), kMinFactor, 1.0)
             : kMinFactor;
      h *= factor;
      last_rejected = true;
      continue;
    }

    Vector dy_new = eval(result.r + h, trial.y_new);
    if (!dy_new.allFinite()) {
      ++stats.steps_rejected;
      h *= kMinFactor;
      last_rejected = true;
      continue;
    }

    result.r += h;
    result.y = std::move(trial.y_new);
    result.dy = std::move(dy_new);
    jac_current = false;
    ++stats.steps_accepted;
    stats.min_step = std::min(stats.min_step, h);
    stats.max_step = std::max(stats.max_step, h);
    if (observer) observer(result.r, result.y);

    if (stop && stop(result.r, result.y, result.dy)) {
      return done(Outcome::Stopped);
    }

    double factor = ratio > 0.0 ? kSafety * std::pow(ratio, -1.0 / kErrorOrder) : kMaxFactor;
    factor = std::clamp(factor, kMinFactor, last_rejected ? 1.0 : kMaxFactor);
    h *= factor;
    last_rejected = false;
  }
}

}  // namespace ssopt::integrator
