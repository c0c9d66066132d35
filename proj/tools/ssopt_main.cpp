// ssopt: command-line driver for steady-state constrained optimisation runs.
//
//   ssopt validate      --problem ngf_erk --samples 100
//   ssopt generate-data --seed 1 --out data.csv
//   ssopt run           --problem conversion_reaction --method flow --lambda 20
//   ssopt bench         --config bench.json --starts 100 --out results/

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssopt/baselines.hpp"
#include "ssopt/bench.hpp"
#include "ssopt/core.hpp"
#include "ssopt/flow.hpp"
#include "ssopt/models.hpp"
#include "ssopt/serialize.hpp"

namespace {

using namespace ssopt;
using nlohmann::json;

struct CommonFlags {
  std::string problem = "ngf_erk";
  std::vector<std::string> methods;
  std::vector<double> lambdas;
  double tol = 1e-6;
  double r_max = 1e4;
  int starts = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
  std::string data;
  int workers = 0;
};

bench::ProblemKind problem_or_throw(const std::string& name) {
  const auto p = bench::parse_problem(name);
  if (!p) throw CLI::ValidationError("--problem", "unknown problem '" + name + "'");
  return *p;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Data files hold two columns, u and the observed x_2 steady state.
std::string data_csv(const Vector& inputs, const Vector& data) {
  std::ostringstream out;
  out << "u,data\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << io::format_double(inputs(i)) << ',' << io::format_double(data(i)) << '\n';
  }
  return out.str();
}

Vector read_data_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 2) throw std::runtime_error("data file: expected u,data columns");
    values.push_back(io::parse_double(fields[1]));
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int cmd_validate(const CommonFlags& flags, int samples) {
  const auto kind = problem_or_throw(flags.problem);
  SampleDomain domain;
  ModelSpec model;
  if (kind == bench::ProblemKind::NgfErk) {
    model = models::ngf_erk_model();
    domain = {-3.0, 1.0, 0.0, 3.0, 0.0, 100.0};
  } else {
    model = models::conversion_reaction_model();
    domain = {0.1, 8.0, 0.0, 1.0, 0.0, 0.0};
  }
  const auto report = validate_model(model, samples, flags.seed, domain);
  constexpr double kThreshold = 1e-6;
  json j{{"model", model.name},
         {"samples", report.samples},
         {"max_rel_err_jac_x", report.max_rel_err_jac_x},
         {"max_rel_err_jac_theta", report.max_rel_err_jac_theta},
         {"threshold", kThreshold},
         {"finite", report.finite},
         {"pass", report.passes(kThreshold)}};
  if (!report.finite) {
    j["failure"] = report.failure;
    j["failing_theta"] = vector_json(report.failing_theta);
    j["failing_x"] = vector_json(report.failing_x);
    j["failing_u"] = vector_json(report.failing_u);
  }
  std::cout << j.dump(2) << '\n';
  return report.passes(kThreshold) ? 0 : 1;
}

int cmd_generate_data(const CommonFlags& flags, double noise_var) {
  models::NgfErkProblem p;
  p.noise_var = noise_var;
  models::regenerate_data(p, flags.seed);
  const std::string text = data_csv(p.inputs, p.data);
  if (flags.out.empty()) {
    std::cout << text;
  } else {
    write_file(flags.out, text);
    std::cerr << "wrote " << flags.out << '\n';
  }
  return 0;
}

bench::BenchConfig build_config(const CLI::App& app, const CommonFlags& flags) {
  bench::BenchConfig config;
  if (!flags.config.empty()) config = bench::load_config(flags.config);
  if (app.count("--problem")) config.problem = problem_or_throw(flags.problem);
  if (app.count("--method")) {
    config.methods.clear();
    for (const auto& m : flags.methods) {
      const auto k = bench::parse_method(m);
      if (!k) throw CLI::ValidationError("--method", "unknown method '" + m + "'");
      config.methods.push_back(*k);
    }
  }
  if (app.count("--lambda")) config.lambdas = flags.lambdas;
  if (app.count("--tol")) config.tol = flags.tol;
  if (app.count("--r-max")) config.r_max = flags.r_max;
  if (app.count("--starts")) config.n_starts = flags.starts;
  if (app.count("--seed")) config.seed = flags.seed;
  if (app.count("--out")) config.output_dir = flags.out;
  if (app.count("--workers")) config.workers = flags.workers;
  if (app.count("--data")) config.data = read_data_csv(flags.data);
  config.validate();
  return config;
}

int cmd_run(const CLI::App& app, const CommonFlags& flags, int start_index, bool trajectory) {
  bench::BenchConfig config = build_config(app, flags);
  if (config.methods.size() != 1) {
    throw CLI::ValidationError("--method", "run takes exactly one method");
  }
  config.n_starts = std::max(config.n_starts, start_index + 1);
  const auto starts = bench::sample_starts(config);
  const FlowState& start = starts.at(static_cast<std::size_t>(start_index));

  models::NgfErkProblem ngf;
  if (config.problem == bench::ProblemKind::NgfErk) {
    if (config.data) {
      ngf.data = *config.data;
    } else {
      models::regenerate_data(ngf, config.data_seed);
    }
  }
  models::ConversionReactionProblem cr;
  FlowConfig fc;
  fc.lambda = config.lambdas.empty() ? 20.0 : config.lambdas.front();
  fc.tol = config.tol;
  fc.r_max = config.r_max;
  fc.max_rhs_evals = config.max_rhs_evals;
  const FlowProblem problem = config.problem == bench::ProblemKind::NgfErk
                                  ? models::ngf_erk_flow_problem(ngf, fc)
                                  : models::conversion_reaction_flow_problem(cr, fc);

  json j;
  j["problem"] = std::string(bench::to_string(config.problem));
  j["method"] = std::string(bench::to_string(config.methods.front()));
  j["start_index"] = start_index;
  j["start"] = json::parse(io::flow_state_to_json(start));
  std::string trajectory_text;

  switch (config.methods.front()) {
    case bench::MethodKind::Flow: {
      const RunResult r = run_flow(problem, start, trajectory);
      j["lambda"] = fc.lambda;
      j["final"] = json::parse(io::flow_state_to_json(r.final));
      j["objective"] = r.objective;
      j["manifold_residual"] = r.manifold_residual;
      j["converged"] = r.converged;
      j["reason"] = std::string(to_string(r.reason));
      if (!r.message.empty()) j["message"] = r.message;
      j["rhs_evals"] = r.rhs_evals;
      j["steps_accepted"] = r.steps_accepted;
      j["steps_rejected"] = r.steps_rejected;
      j["wall_time"] = r.wall_time;
      if (trajectory) trajectory_text = io::trajectory_to_csv(r.trajectory);
      break;
    }
    case bench::MethodKind::Unconstrained: {
      baselines::QuasiNewtonOptions opts;
      opts.tol = config.tol;
      const auto fn = [&](const Vector& th, Vector& grad) {
        auto vg = config.problem == bench::ProblemKind::NgfErk ? models::reduced_objective_ngf(th, ngf)
                                                              : models::reduced_objective_cr(th, cr);
        grad = vg.gradient;
        return vg.value;
      };
      const auto r = baselines::quasi_newton_unconstrained(fn, start.theta, opts);
      j["final_theta"] = vector_json(r.theta);
      j["objective"] = r.objective;
      j["converged"] = r.converged;
      j["reason"] = r.reason;
      j["iterations"] = r.iterations;
      j["function_evals"] = r.function_evals;
      j["wall_time"] = r.wall_time;
      break;
    }
    case bench::MethodKind::Constrained: {
      baselines::AugLagOptions opts;
      opts.tol = config.tol;
      const auto r = baselines::augmented_lagrangian_constrained(problem, start, opts);
      FlowState final_state{r.theta, r.states, 0.0};
      j["final"] = json::parse(io::flow_state_to_json(final_state));
      j["objective"] = r.objective;
      j["constraint_violation"] = r.constraint_violation;
      j["converged"] = r.converged;
      j["reason"] = r.reason;
      j["iterations"] = r.iterations;
      j["function_evals"] = r.function_evals;
      j["wall_time"] = r.wall_time;
      break;
    }
  }

  const std::string text = j.dump(2) + "\n";
  if (app.count("--out")) {
    const std::filesystem::path dir = flags.out;
    write_file(dir / "result.json", text);
    if (trajectory) write_file(dir / "trajectory.csv", trajectory_text);
  } else {
    std::cout << text;
    if (trajectory) std::cerr << "--trajectory needs --out; trajectory not written\n";
  }
  return 0;
}

int cmd_bench(const CLI::App& app, const CommonFlags& flags) {
  const bench::BenchConfig config = build_config(app, flags);
  const auto output = bench::run_bench(config);
  bench::emit(output, config.output_dir);
  for (const auto& m : output.summary.methods) {
    std::cout << m.label << ": " << m.n_converged << "/" << m.n_runs << " converged, "
              << "mean time " << m.mean_wall_time << " s";
    if (m.time_per_converged_start) {
      std::cout << ", " << *m.time_per_converged_start << " s per converged start";
    }
    std::cout << '\n';
  }
  std::cout << "results in " << config.output_dir << '\n';
  return 0;
}

void add_problem_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--problem", flags.problem, "conversion_reaction | ngf_erk");
  cmd->add_option("--method", flags.methods, "flow | unconstrained | constrained");
  cmd->add_option("--lambda", flags.lambdas, "retraction factor(s)");
  cmd->add_option("--tol", flags.tol, "stopping tolerance");
  cmd->add_option("--r-max", flags.r_max, "pseudo-time horizon");
  cmd->add_option("--starts", flags.starts, "number of sampled starts");
  cmd->add_option("--seed", flags.seed, "start sampling seed");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--config", flags.config, "JSON configuration file");
  cmd->add_option("--data", flags.data, "NGF data CSV (u,data) instead of synthetic data");
  cmd->add_option("--workers", flags.workers, "worker threads (default: SSOPT_WORKERS or cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation-based optimisation under steady-state constraints"};
  app.require_subcommand(1);
  CommonFlags flags;

  int samples = 100;
  auto* validate = app.add_subcommand("validate", "check model Jacobians against finite differences");
  validate->add_option("--problem", flags.problem, "conversion_reaction | ngf_erk");
  validate->add_option("--samples", samples, "random evaluation points");
  validate->add_option("--seed", flags.seed, "sampling seed");

  double noise_var = 0.01;
  auto* generate = app.add_subcommand("generate-data", "synthetic NGF dose-response data");
  generate->add_option("--seed", flags.seed, "noise seed");
  generate->add_option("--noise-var", noise_var, "noise variance");
  generate->add_option("--out", flags.out, "output CSV (stdout when omitted)");

  int start_index = 0;
  bool trajectory = false;
  auto* run = app.add_subcommand("run", "single optimisation run from a sampled start");
  add_problem_flags(run, flags);
  run->add_option("--start", start_index, "index into the sampled start list");
  run->add_flag("--trajectory", trajectory, "write trajectory.csv (flow only, needs --out)");

  auto* bench_cmd = app.add_subcommand("bench", "multistart comparison across methods");
  add_problem_flags(bench_cmd, flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*validate) return cmd_validate(flags, samples);
    if (*generate) return cmd_generate_data(flags, noise_var);
    if (*run) return cmd_run(*run, flags, start_index, trajectory);
    if (*bench_cmd) return cmd_bench(*bench_cmd, flags);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
