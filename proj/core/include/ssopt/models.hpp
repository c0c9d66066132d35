#pragma once

#include <cstdint>
#include <vector>

#include "ssopt/core.hpp"
#include "ssopt/flow.hpp"

namespace ssopt::models {

struct ValueAndGradient {
  double value = 0.0;
  Vector gradient;
};

// Conversion reaction A <-> B: dx/dt = theta_2 xi - (theta_1 + theta_2) x,
// fitted by weighted least squares with a Gaussian prior on theta.

struct ConversionReactionProblem {
  double xi = 1.0;
  double x_bar = 0.2;
  Vector theta_bar = Vector{{3.9, 1.5}};
  double weight = 10.0;
};

ModelSpec conversion_reaction_model(double xi = 1.0);
ObjectiveSpec conversion_reaction_objective(const ConversionReactionProblem& problem);
std::vector<Condition> conversion_reaction_conditions(const ConversionReactionProblem& problem);
FlowProblem conversion_reaction_flow_problem(const ConversionReactionProblem& problem,
                                             const FlowConfig& config);
/// J(theta, x_s(theta)) and its gradient through sensitivity_exact.
ValueAndGradient reduced_objective_cr(const Vector& theta, const ConversionReactionProblem& problem);

// NGF-induced Erk activation. Parameters are base-10 exponents of the rate
// constants; only x_2 is observed.

struct NgfErkProblem {
  Vector inputs = Vector{{0.0, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0}};
  Vector data = Vector::Zero(10);
  double noise_var = 0.01;
  Vector theta_true = Vector::Zero(6);
  std::uint64_t data_seed = 0;  // seed used by the last generate_data() call
};

ModelSpec ngf_erk_model();
ObjectiveSpec ngf_erk_objective(const NgfErkProblem& problem);
std::vector<Condition> ngf_erk_conditions(const NgfErkProblem& problem);
FlowProblem ngf_erk_flow_problem(const NgfErkProblem& problem, const FlowConfig& config);

/// Analytic x_2 steady state at theta_true plus N(0, noise_var) noise.
Vector generate_data(const NgfErkProblem& problem, std::uint64_t seed);
/// Generates data in place and records the seed.
void regenerate_data(NgfErkProblem& problem, std::uint64_t seed);

ValueAndGradient reduced_objective_ngf(const Vector& theta, const NgfErkProblem& problem);

}  // namespace ssopt::models
