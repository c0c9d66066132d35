#include "ssopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "ssopt/baselines.hpp"
#include "ssopt/flow.hpp"
#include "ssopt/models.hpp"
#include "ssopt/random.hpp"
#include "ssopt/serialize.hpp"

#ifndef SSOPT_VERSION
#define SSOPT_VERSION "0.0.0"
#endif

namespace ssopt::bench {

using nlohmann::json;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::ConversionReaction: return "conversion_reaction";
    case ProblemKind::NgfErk: return "ngf_erk";
  }
  return "ngf_erk";
}

std::string_view to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::Flow: return "flow";
    case MethodKind::Unconstrained: return "unconstrained";
    case MethodKind::Constrained: return "constrained";
  }
  return "flow";
}

std::optional<ProblemKind> parse_problem(std::string_view text) {
  for (auto k : {ProblemKind::ConversionReaction, ProblemKind::NgfErk}) {
    if (to_string(k) == text) return k;
  }
  if (text == "cr") return ProblemKind::ConversionReaction;
  if (text == "ngf") return ProblemKind::NgfErk;
  return std::nullopt;
}

std::optional<MethodKind> parse_method(std::string_view text) {
  for (auto k : {MethodKind::Flow, MethodKind::Unconstrained, MethodKind::Constrained}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

int n_theta(ProblemKind kind) { return kind == ProblemKind::NgfErk ? 6 : 2; }
int n_x(ProblemKind kind) { return kind == ProblemKind::NgfErk ? 2 : 1; }
int n_conditions(ProblemKind kind) { return kind == ProblemKind::NgfErk ? 10 : 1; }

Box default_theta_box(ProblemKind kind) {
  const int n = n_theta(kind);
  if (kind == ProblemKind::NgfErk) return {Vector::Constant(n, -3.0), Vector::Constant(n, 1.0)};
  return {Vector::Constant(n, 0.1), Vector::Constant(n, 8.0)};
}

Box default_state_box(ProblemKind kind) {
  const int n = n_x(kind);
  if (kind == ProblemKind::NgfErk) return {Vector::Zero(n), Vector::Constant(n, 3.0)};
  return {Vector::Zero(n), Vector::Constant(n, 1.0)};
}

Box BenchConfig::resolved_theta_box() const {
  return theta_box ? *theta_box : default_theta_box(problem);
}

Box BenchConfig::resolved_state_box() const {
  return state_box ? *state_box : default_state_box(problem);
}

void BenchConfig::validate() const {
  if (n_starts < 1) throw std::invalid_argument("BenchConfig: n_starts must be >= 1");
  auto check_box = [](const Box& b, int n, const char* what) {
    if (b.lo.size() != n || b.hi.size() != n) {
      throw std::invalid_argument(std::string("BenchConfig: ") + what + " has wrong dimension");
    }
    if ((b.lo.array() > b.hi.array()).any()) {
      throw std::invalid_argument(std::string("BenchConfig: ") + what + " has lo > hi");
    }
  };
  check_box(resolved_theta_box(), n_theta(problem), "theta_box");
  check_box(resolved_state_box(), n_x(problem), "state_box");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw std::invalid_argument("BenchConfig: lambda must be >= 0");
  }
  if (std::find(methods.begin(), methods.end(), MethodKind::Flow) != methods.end() &&
      lambdas.empty()) {
    throw std::invalid_argument("BenchConfig: flow requires at least one lambda");
  }
  if (!(tol > 0.0) || !(r_max >= 0.0) || max_rhs_evals <= 0) {
    throw std::invalid_argument("BenchConfig: tol, r_max or max_rhs_evals out of range");
  }
  if (data && data->size() != n_conditions(problem)) {
    throw std::invalid_argument("BenchConfig: data must have one entry per condition");
  }
}

// ---------------------------------------------------------------------------
// Configuration files

namespace {

Vector json_to_vector(const json& j, int n) {
  if (j.is_number()) return Vector::Constant(n, j.get<double>());
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> json_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

BenchConfig config_from_json(std::string_view text, BenchConfig base) {
  const json j = json::parse(text);
  if (j.contains("problem")) {
    const auto p = parse_problem(j["problem"].get<std::string>());
    if (!p) throw std::invalid_argument("config: unknown problem");
    base.problem = *p;
  }
  if (j.contains("methods")) {
    base.methods.clear();
    for (const auto& m : j["methods"]) {
      const auto k = parse_method(m.get<std::string>());
      if (!k) throw std::invalid_argument("config: unknown method " + m.get<std::string>());
      base.methods.push_back(*k);
    }
  }
  if (j.contains("lambdas")) base.lambdas = j["lambdas"].get<std::vector<double>>();
  if (j.contains("n_starts")) base.n_starts = j["n_starts"].get<int>();
  if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("data_seed")) base.data_seed = j["data_seed"].get<std::uint64_t>();
  if (j.contains("data")) base.data = json_to_vector(j["data"], n_conditions(base.problem));
  auto read_box = [&](const char* key, int n) -> std::optional<Box> {
    const auto& b = j.at(key);
    return Box{json_to_vector(b.at("lo"), n), json_to_vector(b.at("hi"), n)};
  };
  if (j.contains("theta_box")) base.theta_box = read_box("theta_box", n_theta(base.problem));
  if (j.contains("state_box")) base.state_box = read_box("state_box", n_x(base.problem));
  if (j.contains("output_dir")) base.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("tol")) base.tol = j["tol"].get<double>();
  if (j.contains("r_max")) base.r_max = j["r_max"].get<double>();
  if (j.contains("max_rhs_evals")) base.max_rhs_evals = j["max_rhs_evals"].get<long>();
  if (j.contains("classification_threshold")) {
    base.classification_threshold = j["classification_threshold"].get<double>();
  }
  if (j.contains("feasibility_tol")) base.feasibility_tol = j["feasibility_tol"].get<double>();
  if (j.contains("workers")) base.workers = j["workers"].get<int>();
  return base;
}

BenchConfig load_config(const std::filesystem::path& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), std::move(base));
}

namespace {

json config_json(const BenchConfig& c) {
  json j;
  j["problem"] = std::string(to_string(c.problem));
  j["methods"] = json::array();
  for (auto m : c.methods) j["methods"].push_back(std::string(to_string(m)));
  j["lambdas"] = c.lambdas;
  j["n_starts"] = c.n_starts;
  j["seed"] = c.seed;
  j["data_seed"] = c.data_seed;
  if (c.data) j["data"] = vector_to_json(*c.data);
  const Box tb = c.resolved_theta_box();
  const Box sb = c.resolved_state_box();
  j["theta_box"] = {{"lo", vector_to_json(tb.lo)}, {"hi", vector_to_json(tb.hi)}};
  j["state_box"] = {{"lo", vector_to_json(sb.lo)}, {"hi", vector_to_json(sb.hi)}};
  j["output_dir"] = c.output_dir;
  j["tol"] = c.tol;
  j["r_max"] = c.r_max;
  j["max_rhs_evals"] = c.max_rhs_evals;
  j["classification_threshold"] = c.classification_threshold;
  j["feasibility_tol"] = c.feasibility_tol;
  return j;
}

}  // namespace

std::string config_to_json(const BenchConfig& config) { return config_json(config).dump(2); }

// ---------------------------------------------------------------------------
// Sampling

std::vector<FlowState> sample_starts(const BenchConfig& config) {
  config.validate();
  const Box tb = config.resolved_theta_box();
  const Box sb = config.resolved_state_box();
  const int m = n_conditions(config.problem);
  Rng rng(config.seed, /*stream=*/1);
  std::vector<FlowState> starts;
  starts.reserve(static_cast<std::size_t>(config.n_starts));
  for (int k = 0; k < config.n_starts; ++k) {
    FlowState s;
    s.theta.resize(tb.lo.size());
    for (Eigen::Index i = 0; i < tb.lo.size(); ++i) s.theta(i) = rng.uniform(tb.lo(i), tb.hi(i));
    for (int b = 0; b < m; ++b) {
      Vector x(sb.lo.size());
      for (Eigen::Index i = 0; i < sb.lo.size(); ++i) x(i) = rng.uniform(sb.lo(i), sb.hi(i));
      s.states.push_back(std::move(x));
    }
    starts.push_back(std::move(s));
  }
  return starts;
}

// ---------------------------------------------------------------------------
// Execution

std::string method_label(const std::string& method, const std::optional<double>& lambda) {
  if (!lambda) return method;
  return method + "(lambda=" + io::format_double(*lambda) + ")";
}

namespace {

struct Job {
  MethodKind method;
  std::optional<double> lambda;
  int start;
};

class ProblemContext {
 public:
  explicit ProblemContext(const BenchConfig& config) : config_(config) {
    if (config.problem == ProblemKind::NgfErk) {
      if (config.data) {
        ngf_.data = *config.data;
      } else {
        models::regenerate_data(ngf_, config.data_seed);
      }
    }
  }

  [[nodiscard]] Vector data() const {
    return config_.problem == ProblemKind::NgfErk ? ngf_.data : Vector(0);
  }

  [[nodiscard]] FlowProblem flow_problem(double lambda) const {
    FlowConfig fc;
    fc.lambda = lambda;
    fc.tol = config_.tol;
    fc.r_max = config_.r_max;
    fc.max_rhs_evals = config_.max_rhs_evals;
    if (config_.problem == ProblemKind::NgfErk) return models::ngf_erk_flow_problem(ngf_, fc);
    return models::conversion_reaction_flow_problem(cr_, fc);
  }

  [[nodiscard]] models::ValueAndGradient reduced(const Vector& theta) const {
    if (config_.problem == ProblemKind::NgfErk) return models::reduced_objective_ngf(theta, ngf_);
    return models::reduced_objective_cr(theta, cr_);
  }

 private:
  const BenchConfig& config_;
  models::ConversionReactionProblem cr_;
  models::NgfErkProblem ngf_;
};

RunRecord execute(const Job& job, const FlowState& start, const ProblemContext& ctx,
                  const BenchConfig& config) {
  RunRecord rec;
  rec.method = std::string(to_string(job.method));
  rec.lambda = job.lambda;
  rec.start = job.start;
  rec.seed = config.seed;
  rec.start_state = start;
  rec.final_theta = start.theta;
  rec.final_objective = std::numeric_limits<double>::quiet_NaN();
  rec.manifold_residual = std::numeric_limits<double>::quiet_NaN();
  rec.state_error = std::numeric_limits<double>::quiet_NaN();
  try {
    switch (job.method) {
      case MethodKind::Flow: {
        const FlowProblem problem = ctx.flow_problem(*job.lambda);
        const RunResult r = run_flow(problem, start);
        rec.final_theta = r.final.theta;
        rec.final_objective = r.objective;
        rec.manifold_residual = r.manifold_residual;
        rec.state_error = manifold_distance(problem, r.final);
        rec.reason = std::string(ssopt::to_string(r.reason));
        rec.rhs_evals = r.rhs_evals;
        rec.wall_time = r.wall_time;
        break;
      }
      case MethodKind::Unconstrained: {
        baselines::QuasiNewtonOptions opts;
        opts.tol = config.tol;
        const auto fn = [&](const Vector& th, Vector& grad) {
          auto vg = ctx.reduced(th);
          grad = std::move(vg.gradient);
          return vg.value;
        };
        const auto r = baselines::quasi_newton_unconstrained(fn, start.theta, opts);
        rec.final_theta = r.theta;
        rec.final_objective = r.objective;
        rec.manifold_residual = 0.0;
        rec.state_error = 0.0;
        rec.reason = r.reason;
        rec.rhs_evals = r.function_evals;
        rec.wall_time = r.wall_time;
        break;
      }
      case MethodKind::Constrained: {
        baselines::AugLagOptions opts;
        opts.tol = config.tol;
        const FlowProblem problem = ctx.flow_problem(0.0);
        const auto r = baselines::augmented_lagrangian_constrained(problem, start, opts);
        rec.final_theta = r.theta;
        rec.final_objective = r.objective;
        rec.manifold_residual = r.constraint_violation;
        rec.state_error = manifold_distance(problem, FlowState{r.theta, r.states, 0.0});
        rec.reason = r.reason;
        rec.rhs_evals = r.function_evals;
        rec.wall_time = r.wall_time;
        break;
      }
    }
  } catch (const std::exception& e) {
    rec.reason = std::string("Failure: ") + e.what();
    for (char& ch : rec.reason) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
  }
  return rec;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SSOPT_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BenchSummary classify_and_summarize(std::vector<RunRecord>& records, double threshold,
                                    double feasibility_tol) {
  auto feasible = [&](const RunRecord& r) {
    return std::isfinite(r.final_objective) && std::isfinite(r.manifold_residual) &&
           std::isfinite(r.state_error) && r.manifold_residual <= feasibility_tol &&
           r.state_error <= feasibility_tol;
  };
  BenchSummary summary;
  for (const auto& r : records) {
    if (feasible(r) && (!summary.best_objective || r.final_objective < *summary.best_objective)) {
      summary.best_objective = r.final_objective;
    }
  }
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> times;
  for (auto& r : records) {
    r.converged = summary.best_objective && feasible(r) &&
                  r.final_objective <= *summary.best_objective + threshold;
    const std::string label = method_label(r.method, r.lambda);
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(label, summary.methods.size()).first;
      MethodSummary ms;
      ms.label = label;
      ms.method = r.method;
      ms.lambda = r.lambda;
      summary.methods.push_back(ms);
      times.emplace_back();
    }
    MethodSummary& ms = summary.methods[it->second];
    ++ms.n_runs;
    if (r.converged) ++ms.n_converged;
    ms.total_wall_time += r.wall_time;
    times[it->second].push_back(r.wall_time);
    if (feasible(r) && (!ms.best_objective || r.final_objective < *ms.best_objective)) {
      ms.best_objective = r.final_objective;
    }
  }
  for (std::size_t i = 0; i < summary.methods.size(); ++i) {
    MethodSummary& ms = summary.methods[i];
    ms.fraction_converged = static_cast<double>(ms.n_converged) / ms.n_runs;
    ms.mean_wall_time = ms.total_wall_time / ms.n_runs;
    ms.median_wall_time = median(times[i]);
    if (ms.n_converged > 0) ms.time_per_converged_start = ms.total_wall_time / ms.n_converged;
  }
  return summary;
}

bool operator==(const MethodSummary& a, const MethodSummary& b) {
  return a.label == b.label && a.method == b.method && a.lambda == b.lambda &&
         a.n_runs == b.n_runs && a.n_converged == b.n_converged &&
         a.fraction_converged == b.fraction_converged && a.total_wall_time == b.total_wall_time &&
         a.mean_wall_time == b.mean_wall_time && a.median_wall_time == b.median_wall_time &&
         a.time_per_converged_start == b.time_per_converged_start &&
         a.best_objective == b.best_objective;
}

bool operator==(const BenchSummary& a, const BenchSummary& b) {
  return a.best_objective == b.best_objective && a.methods == b.methods;
}

BenchOutput run_bench(const BenchConfig& config) {
  config.validate();
  BenchOutput output;
  output.config = config;
  const ProblemContext ctx(config);
  output.data = ctx.data();
  const auto starts = sample_starts(config);

  std::vector<Job> jobs;
  for (auto method : config.methods) {
    if (method == MethodKind::Flow) {
      for (double l : config.lambdas) {
        for (int k = 0; k < config.n_starts; ++k) jobs.push_back({method, l, k});
      }
    } else {
      for (int k = 0; k < config.n_starts; ++k) jobs.push_back({method, std::nullopt, k});
    }
  }

  output.records.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      output.records[i] = execute(job, starts[static_cast<std::size_t>(job.start)], ctx, config);
    }
  };
  const int n_workers =
      std::min<int>(resolve_worker_count(config.workers), std::max<int>(1, jobs.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  output.summary = classify_and_summarize(output.records, config.classification_threshold,
                                          config.feasibility_tol);
  return output;
}

// ---------------------------------------------------------------------------
// Output files

namespace {

struct CsvShape {
  Eigen::Index n_theta = 0;
  Eigen::Index n_x = 0;
  std::size_t n_blocks = 0;
};

std::string runs_header(const CsvShape& shape) {
  std::string h = "method,lambda,start,seed";
  for (Eigen::Index k = 0; k < shape.n_theta; ++k) h += ",theta0_" + std::to_string(k + 1);
  for (std::size_t i = 0; i < shape.n_blocks; ++i) {
    for (Eigen::Index j = 0; j < shape.n_x; ++j) {
      h += ",x0_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
    }
  }
  for (Eigen::Index k = 0; k < shape.n_theta; ++k) h += ",final_theta_" + std::to_string(k + 1);
  h += ",final_objective,manifold_residual,state_error,converged,reason,rhs_evals";
  return h;
}

std::string lambda_field(const std::optional<double>& l) {
  return l ? io::format_double(*l) : std::string();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp + " to " + path.string() + ": " +
                                   ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json method_summary_json(const MethodSummary& m) {
  return {{"label", m.label},
          {"method", m.method},
          {"lambda", optional_json(m.lambda)},
          {"n_runs", m.n_runs},
          {"n_converged", m.n_converged},
          {"fraction_converged", m.fraction_converged},
          {"total_wall_time", m.total_wall_time},
          {"mean_wall_time", m.mean_wall_time},
          {"median_wall_time", m.median_wall_time},
          {"time_per_converged_start", optional_json(m.time_per_converged_start)},
          {"best_objective", optional_json(m.best_objective)}};
}

}  // namespace

std::string runs_csv(const std::vector<RunRecord>& records, const BenchConfig& config) {
  const CsvShape shape{n_theta(config.problem), n_x(config.problem),
                       static_cast<std::size_t>(n_conditions(config.problem))};
  std::ostringstream out;
  out << runs_header(shape) << '\n';
  for (const auto& r : records) {
    out << r.method << ',' << lambda_field(r.lambda) << ',' << r.start << ',' << r.seed;
    for (Eigen::Index k = 0; k < r.start_state.theta.size(); ++k) {
      out << ',' << io::format_double(r.start_state.theta(k));
    }
    for (const auto& block : r.start_state.states) {
      for (Eigen::Index j = 0; j < block.size(); ++j) out << ',' << io::format_double(block(j));
    }
    for (Eigen::Index k = 0; k < r.final_theta.size(); ++k) {
      out << ',' << io::format_double(r.final_theta(k));
    }
    out << ',' << io::format_double(r.final_objective) << ','
        << io::format_double(r.manifold_residual) << ',' << io::format_double(r.state_error)
        << ',' << (r.converged ? 1 : 0) << ','
        << r.reason << ',' << r.rhs_evals << '\n';
  }
  return out.str();
}

std::string timings_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "method,lambda,start,wall_time\n";
  for (const auto& r : records) {
    out << r.method << ',' << lambda_field(r.lambda) << ',' << r.start << ','
        << io::format_double(r.wall_time) << '\n';
  }
  return out.str();
}

std::string summary_json(const BenchOutput& output) {
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["artifact"] = "ssopt";
  j["artifact_version"] = SSOPT_VERSION;
  j["rng"] = std::string(Rng::kRngAlgorithm);
  j["config"] = config_json(output.config);
  j["data"] = vector_to_json(output.data);
  const baselines::QuasiNewtonOptions qn;
  const baselines::AugLagOptions al;
  j["baseline_settings"] = {
      {"quasi_newton",
       {{"max_iter", qn.max_iter}, {"armijo_c", qn.armijo_c}, {"max_halvings", qn.max_halvings}}},
      {"augmented_lagrangian",
       {{"max_outer", al.max_outer},
        {"rho_initial", al.rho_initial},
        {"rho_growth", al.rho_growth},
        {"min_violation_decrease", al.min_violation_decrease},
        {"inner_max_iter", al.inner_max_iter}}}};
  j["classification"] = {{"threshold", output.config.classification_threshold},
                         {"feasibility_tol", output.config.feasibility_tol}};
  j["best_objective"] = optional_json(output.summary.best_objective);
  j["methods"] = json::array();
  for (const auto& m : output.summary.methods) j["methods"].push_back(method_summary_json(m));
  return j.dump(2) + "\n";
}

void emit(const BenchOutput& output, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_atomically(dir / "runs.csv", runs_csv(output.records, output.config));
  write_atomically(dir / "timings.csv", timings_csv(output.records));
  write_atomically(dir / "summary.json", summary_json(output));
}

std::vector<RunRecord> read_runs(const std::filesystem::path& runs_path,
                                 const std::filesystem::path& timings_path) {
  const auto lines = lines_of(read_file(runs_path));
  if (lines.empty()) throw std::runtime_error(runs_path.string() + ": missing header");
  const auto header = io::split_csv_line(lines[0]);

  CsvShape shape;
  for (const auto& name : header) {
    if (name.starts_with("theta0_")) ++shape.n_theta;
    if (name.starts_with("x0_")) {
      const auto rest = name.substr(3);
      const auto sep = rest.find('_');
      shape.n_blocks = std::max<std::size_t>(shape.n_blocks, std::stoul(rest.substr(0, sep)));
      shape.n_x = std::max<Eigen::Index>(shape.n_x, std::stol(rest.substr(sep + 1)));
    }
  }
  if (header != io::split_csv_line(runs_header(shape))) {
    throw std::runtime_error(runs_path.string() + ": unexpected header");
  }

  std::vector<RunRecord> records;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = io::split_csv_line(lines[li]);
    if (f.size() != header.size()) {
      throw std::runtime_error(runs_path.string() + ": bad field count on line " +
                               std::to_string(li + 1));
    }
    RunRecord r;
    std::size_t c = 0;
    r.method = f[c++];
    if (!f[c].empty()) r.lambda = io::parse_double(f[c]);
    ++c;
    r.start = std::stoi(f[c++]);
    r.seed = std::stoull(f[c++]);
    r.start_state.theta.resize(shape.n_theta);
    for (Eigen::Index k = 0; k < shape.n_theta; ++k) r.start_state.theta(k) = io::parse_double(f[c++]);
    for (std::size_t b = 0; b < shape.n_blocks; ++b) {
      Vector x(shape.n_x);
      for (Eigen::Index j = 0; j < shape.n_x; ++j) x(j) = io::parse_double(f[c++]);
      r.start_state.states.push_back(std::move(x));
    }
    r.final_theta.resize(shape.n_theta);
    for (Eigen::Index k = 0; k < shape.n_theta; ++k) r.final_theta(k) = io::parse_double(f[c++]);
    r.final_objective = io::parse_double(f[c++]);
    r.manifold_residual = io::parse_double(f[c++]);
    r.state_error = io::parse_double(f[c++]);
    r.converged = f[c++] == "1";
    r.reason = f[c++];
    r.rhs_evals = std::stol(f[c++]);
    records.push_back(std::move(r));
  }

  if (!timings_path.empty()) {
    const auto tlines = lines_of(read_file(timings_path));
    if (tlines.size() != records.size() + 1) {
      throw std::runtime_error(timings_path.string() + ": row count does not match runs.csv");
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto f = io::split_csv_line(tlines[i + 1]);
      if (f.size() != 4 || f[0] != records[i].method || std::stoi(f[2]) != records[i].start) {
        throw std::runtime_error(timings_path.string() + ": row " + std::to_string(i + 2) +
                                 " does not match runs.csv");
      }
      records[i].wall_time = io::parse_double(f[3]);
    }
  }
  return records;
}

BenchSummary read_summary(const std::filesystem::path& summary_path) {
  const json j = json::parse(read_file(summary_path));
  BenchSummary s;
  s.best_objective = json_optional(j.at("best_objective"));
  for (const auto& m : j.at("methods")) {
    MethodSummary ms;
    ms.label = m.at("label").get<std::string>();
    ms.method = m.at("method").get<std::string>();
    ms.lambda = json_optional(m.at("lambda"));
    ms.n_runs = m.at("n_runs").get<int>();
    ms.n_converged = m.at("n_converged").get<int>();
    ms.fraction_converged = m.at("fraction_converged").get<double>();
    ms.total_wall_time = m.at("total_wall_time").get<double>();
    ms.mean_wall_time = m.at("mean_wall_time").get<double>();
    ms.median_wall_time = m.at("median_wall_time").get<double>();
    ms.time_per_converged_start = json_optional(m.at("time_per_converged_start"));
    ms.best_objective = json_optional(m.at("best_objective"));
    s.methods.push_back(ms);
  }
  return s;
}

}  // namespace ssopt::bench
