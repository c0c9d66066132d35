#include <benchmark/benchmark.h>

#include "ssopt/flow.hpp"
#include "ssopt/integrator.hpp"
#include "ssopt/models.hpp"
#include "ssopt/numerics.hpp"
#include "ssopt/random.hpp"

namespace {

using namespace ssopt;

FlowProblem ngf_problem() {
  models::NgfErkProblem p;
  models::regenerate_data(p, 1);
  return models::ngf_erk_flow_problem(p, FlowConfig{});
}

FlowState ngf_state(std::uint64_t seed) {
  Rng rng(seed);
  FlowState s;
  s.theta = Vector(6);
  for (Eigen::Index i = 0; i < 6; ++i) s.theta(i) = rng.uniform(-3.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    s.states.push_back(Vector{{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)}});
  }
  return s;
}

void BM_FlowRhsNgf(benchmark::State& st) {
  const FlowProblem p = ngf_problem();
  const FlowState s = ngf_state(1);
  for (auto _ : st) benchmark::DoNotOptimize(rhs(p, s));
}
BENCHMARK(BM_FlowRhsNgf);

void BM_FlowJacobianNgf(benchmark::State& st) {
  const FlowProblem p = ngf_problem();
  const FlowState s = ngf_state(2);
  const Vector f0 = rhs(p, s).flatten();
  for (auto _ : st) benchmark::DoNotOptimize(rhs_jacobian(p, s, f0));
}
BENCHMARK(BM_FlowJacobianNgf);

void BM_FlowJacobianNgfPlainDifferences(benchmark::State& st) {
  const FlowProblem p = ngf_problem();
  const FlowState s = ngf_state(2);
  const integrator::Rhs flat = [&](double, const Vector& y) {
    return rhs(p, FlowState::unflatten(y, 6, 2, 10)).flatten();
  };
  const Vector y = s.flatten();
  const Vector f0 = flat(0.0, y);
  for (auto _ : st) benchmark::DoNotOptimize(integrator::rhs_jacobian(flat, 0.0, y, f0));
}
BENCHMARK(BM_FlowJacobianNgfPlainDifferences);

void BM_RosenbrockStepNgf(benchmark::State& st) {
  const FlowProblem p = ngf_problem();
  const FlowState s = ngf_state(3);
  const integrator::Rhs flat = [&](double, const Vector& y) {
    return rhs(p, FlowState::unflatten(y, 6, 2, 10)).flatten();
  };
  const Vector y = s.flatten();
  const Vector dy = flat(0.0, y);
  const Matrix jac = rhs_jacobian(p, s, dy);
  const Vector dfdr = Vector::Zero(y.size());
  for (auto _ : st) benchmark::DoNotOptimize(integrator::step(flat, 0.0, y, dy, dfdr, 1e-3, jac));
}
BENCHMARK(BM_RosenbrockStepNgf);

void BM_Pinv(benchmark::State& st) {
  Rng rng(4);
  const auto rows = static_cast<Eigen::Index>(st.range(0));
  const auto cols = static_cast<Eigen::Index>(st.range(1));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  for (auto _ : st) benchmark::DoNotOptimize(numerics::pinv(m));
}
BENCHMARK(BM_Pinv)->Args({2, 2})->Args({2, 6})->Args({20, 6});

void BM_RunFlowConversionReaction(benchmark::State& st) {
  FlowConfig c;
  c.lambda = static_cast<double>(st.range(0));
  const FlowProblem p = models::conversion_reaction_flow_problem({}, c);
  const FlowState init{Vector{{1.0, 4.0}}, {Vector{{0.1}}}, 0.0};
  for (auto _ : st) benchmark::DoNotOptimize(run_flow(p, init));
}
BENCHMARK(BM_RunFlowConversionReaction)->Arg(2)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
