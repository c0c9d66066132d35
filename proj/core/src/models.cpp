#include "ssopt/models.hpp"

#include <cmath>
#include <numbers>

#include "ssopt/random.hpp"
#include "ssopt/sensitivity.hpp"

namespace ssopt::models {

// ---------------------------------------------------------------------------
// Conversion reaction

ModelSpec conversion_reaction_model(double xi) {
  ModelSpec m;
  m.name = "conversion_reaction";
  m.n_x = 1;
  m.n_theta = 2;
  m.n_u = 0;
  m.f = [xi](const Vector& th, const Vector& x, const Vector&) {
    return Vector{{th(1) * xi - (th(0) + th(1)) * x(0)}};
  };
  m.jac_x = [](const Vector& th, const Vector&, const Vector&) {
    return Matrix{{-(th(0) + th(1))}};
  };
  m.jac_theta = [xi](const Vector&, const Vector& x, const Vector&) {
    return Matrix{{-x(0), xi - x(0)}};
  };
  m.analytic_steady_state = [xi](const Vector& th, const Vector&) {
    return Vector{{th(1) * xi / (th(0) + th(1))}};
  };
  return m;
}

ObjectiveSpec conversion_reaction_objective(const ConversionReactionProblem& p) {
  ObjectiveSpec obj;
  obj.eval = [p](const Vector& th, const StateBlocks& xs) {
    const double misfit = xs.at(0)(0) - p.x_bar;
    return 0.5 * p.weight * misfit * misfit + 0.5 * (th - p.theta_bar).squaredNorm();
  };
  obj.grad_theta = [p](const Vector& th, const StateBlocks&) -> Vector { return th - p.theta_bar; };
  obj.grad_x = [p](const Vector&, const StateBlocks& xs) {
    return StateBlocks{Vector{{p.weight * (xs.at(0)(0) - p.x_bar)}}};
  };
  return obj;
}

std::vector<Condition> conversion_reaction_conditions(const ConversionReactionProblem& p) {
  return {Condition{Vector(0), Vector{{p.x_bar}}, "xi=" + std::to_string(p.xi)}};
}

FlowProblem conversion_reaction_flow_problem(const ConversionReactionProblem& p,
                                             const FlowConfig& config) {
  return FlowProblem{conversion_reaction_model(p.xi), conversion_reaction_objective(p),
                     conversion_reaction_conditions(p), config};
}

ValueAndGradient reduced_objective_cr(const Vector& theta, const ConversionReactionProblem& p) {
  const ModelSpec model = conversion_reaction_model(p.xi);
  const Vector u(0);
  const Vector xs = model.analytic_steady_state(theta, u);
  const double misfit = xs(0) - p.x_bar;
  ValueAndGradient out;
  out.value = 0.5 * p.weight * misfit * misfit + 0.5 * (theta - p.theta_bar).squaredNorm();
  const Matrix s = sensitivity_exact(model, theta, xs, u);
  out.gradient = (theta - p.theta_bar) + p.weight * misfit * s.row(0).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// NGF-induced Erk activation

namespace {

constexpr double kLn10 = std::numbers::ln10;

Vector rates(const Vector& theta) {
  return theta.unaryExpr([](double t) { return std::pow(10.0, t); });
}

}  // namespace

ModelSpec ngf_erk_model() {
  ModelSpec m;
  m.name = "ngf_erk";
  m.n_x = 2;
  m.n_theta = 6;
  m.n_u = 1;
  m.f = [](const Vector& th, const Vector& x, const Vector& u) {
    const Vector k = rates(th);
    return Vector{{k(0) * u(0) * (k(4) - x(0)) - k(1) * x(0),
                   (x(0) + k(2)) * (k(5) - x(1)) - k(3) * x(1)}};
  };
  m.jac_x = [](const Vector& th, const Vector& x, const Vector& u) {
    const Vector k = rates(th);
    return Matrix{{-(k(0) * u(0) + k(1)), 0.0},
                  {k(5) - x(1), -(x(0) + k(2) + k(3))}};
  };
  m.jac_theta = [](const Vector& th, const Vector& x, const Vector& u) {
    const Vector k = rates(th);
    Matrix j = Matrix::Zero(2, 6);
    j(0, 0) = kLn10 * k(0) * u(0) * (k(4) - x(0));
    j(0, 1) = -kLn10 * k(1) * x(0);
    j(0, 4) = kLn10 * k(0) * u(0) * k(4);
    j(1, 2) = kLn10 * k(2) * (k(5) - x(1));
    j(1, 3) = -kLn10 * k(3) * x(1);
    j(1, 5) = kLn10 * k(5) * (x(0) + k(2));
    return j;
  };
  m.analytic_steady_state = [](const Vector& th, const Vector& u) {
    const Vector k = rates(th);
    const double x1 = k(0) * k(4) * u(0) / (k(0) * u(0) + k(1));
    const double x2 = k(5) * (x1 + k(2)) / (x1 + k(2) + k(3));
    return Vector{{x1, x2}};
  };
  return m;
}

ObjectiveSpec ngf_erk_objective(const NgfErkProblem& p) {
  ObjectiveSpec obj;
  const Vector data = p.data;
  obj.eval = [data](const Vector&, const StateBlocks& xs) {
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = xs[i](1) - data(static_cast<Eigen::Index>(i));
      sum += r * r;
    }
    return 0.5 * sum;
  };
  obj.grad_theta = [](const Vector& th, const StateBlocks&) -> Vector {
    return Vector::Zero(th.size());
  };
  obj.grad_x = [data](const Vector&, const StateBlocks& xs) {
    StateBlocks g(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      g[i] = Vector{{0.0, xs[i](1) - data(static_cast<Eigen::Index>(i))}};
    }
    return g;
  };
  return obj;
}

std::vector<Condition> ngf_erk_conditions(const NgfErkProblem& p) {
  std::vector<Condition> conds;
  conds.reserve(static_cast<std::size_t>(p.inputs.size()));
  for (Eigen::Index i = 0; i < p.inputs.size(); ++i) {
    conds.push_back(Condition{Vector{{p.inputs(i)}}, Vector{{p.data(i)}},
                              "u=" + std::to_string(p.inputs(i))});
  }
  return conds;
}

FlowProblem ngf_erk_flow_problem(const NgfErkProblem& p, const FlowConfig& config) {
  return FlowProblem{ngf_erk_model(), ngf_erk_objective(p), ngf_erk_conditions(p), config};
}

Vector generate_data(const NgfErkProblem& p, std::uint64_t seed) {
  const ModelSpec model = ngf_erk_model();
  Rng rng(seed);
  const double sd = std::sqrt(p.noise_var);
  Vector data(p.inputs.size());
  for (Eigen::Index i = 0; i < p.inputs.size(); ++i) {
    const double truth = model.analytic_steady_state(p.theta_true, Vector{{p.inputs(i)}})(1);
    // Always draw, so the noise sequence does not depend on noise_var.
    data(i) = truth + sd * rng.normal();
  }
  return data;
}

void regenerate_data(NgfErkProblem& p, std::uint64_t seed) {
  p.data = generate_data(p, seed);
  p.data_seed = seed;
}

ValueAndGradient reduced_objective_ngf(const Vector& theta, const NgfErkProblem& p) {
  const ModelSpec model = ngf_erk_model();
  ValueAndGradient out;
  out.gradient = Vector::Zero(theta.size());
  for (Eigen::Index i = 0; i < p.inputs.size(); ++i) {
    const Vector u{{p.inputs(i)}};
    const Vector xs = model.analytic_steady_state(theta, u);
    const double r = xs(1) - p.data(i);
    out.value += 0.5 * r * r;
    const Matrix s = sensitivity_exact(model, theta, xs, u);
    out.gradient.noalias() += r * s.row(1).transpose();
  }
  return out;
}

}  // namespace ssopt::models
