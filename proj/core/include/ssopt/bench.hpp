#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssopt/core.hpp"

namespace ssopt::bench {

inline constexpr int kSummarySchemaVersion = 1;

enum class ProblemKind { ConversionReaction, NgfErk };
enum class MethodKind { Flow, Unconstrained, Constrained };

std::string_view to_string(ProblemKind kind);
std::string_view to_string(MethodKind kind);
std::optional<ProblemKind> parse_problem(std::string_view text);
std::optional<MethodKind> parse_method(std::string_view text);

/// Per-coordinate uniform sampling bounds.
struct Box {
  Vector lo;
  Vector hi;
};

struct BenchConfig {
  ProblemKind problem = ProblemKind::NgfErk;
  std::vector<MethodKind> methods = {MethodKind::Flow, MethodKind::Unconstrained,
                                     MethodKind::Constrained};
  std::vector<double> lambdas = {2.0, 20.0};
  int n_starts = 100;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 1;     // NGF synthetic data
  std::optional<Vector> data;      // imported NGF data; skips generation
  std::optional<Box> theta_box;    // problem default when unset
  std::optional<Box> state_box;
  std::string output_dir = "bench_out";
  double tol = 1e-6;
  double r_max = 1e4;
  long max_rhs_evals = 100000;
  double classification_threshold = 1e-3;  // absolute, on the objective
  double feasibility_tol = 1e-6;           // on manifold residual and state error
  int workers = 0;                         // 0: SSOPT_WORKERS or hardware concurrency

  void validate() const;
  [[nodiscard]] Box resolved_theta_box() const;
  [[nodiscard]] Box resolved_state_box() const;
};

Box default_theta_box(ProblemKind kind);
Box default_state_box(ProblemKind kind);
int n_theta(ProblemKind kind);
int n_x(ProblemKind kind);
int n_conditions(ProblemKind kind);

/// Overlays the fields present in a JSON document onto `base`.
BenchConfig config_from_json(std::string_view text, BenchConfig base = {});
BenchConfig load_config(const std::filesystem::path& path, BenchConfig base = {});
std::string config_to_json(const BenchConfig& config);

/// n_starts draws from the configured boxes; identical for every method.
std::vector<FlowState> sample_starts(const BenchConfig& config);

struct RunRecord {
  std::string method;            // "flow", "unconstrained", "constrained"
  std::optional<double> lambda;  // flow only
  int start = 0;
  std::uint64_t seed = 0;
  FlowState start_state;
  Vector final_theta;
  double final_objective = 0.0;
  double manifold_residual = 0.0;
  double state_error = 0.0;  // manifold_distance() at the final point
  bool converged = false;    // objective-based classification
  std::string reason;        // method-native termination reason
  long rhs_evals = 0;        // rhs / function evaluations
  double wall_time = 0.0;    // seconds, optimisation only
};

std::string method_label(const std::string& method, const std::optional<double>& lambda);

struct MethodSummary {
  std::string label;
  std::string method;
  std::optional<double> lambda;
  int n_runs = 0;
  int n_converged = 0;
  double fraction_converged = 0.0;
  double total_wall_time = 0.0;
  double mean_wall_time = 0.0;
  double median_wall_time = 0.0;
  std::optional<double> time_per_converged_start;
  std::optional<double> best_objective;
};

struct BenchSummary {
  std::optional<double> best_objective;  // over all feasible runs
  std::vector<MethodSummary> methods;
};

bool operator==(const MethodSummary& a, const MethodSummary& b);
bool operator==(const BenchSummary& a, const BenchSummary& b);

/// A record is feasible when its manifold residual and state error are both
/// within `feasibility_tol`. Marks records converged when feasible and within
/// `threshold` of the best feasible objective; returns per-method statistics
/// in order of first appearance.
BenchSummary classify_and_summarize(std::vector<RunRecord>& records, double threshold,
                                    double feasibility_tol);

struct BenchOutput {
  BenchConfig config;
  Vector data;  // NGF data actually used (empty for conversion reaction)
  std::vector<RunRecord> records;
  BenchSummary summary;
};

/// Runs every (method, lambda, start) combination. Per-run failures become
/// non-converged records; the bench itself does not throw for them.
BenchOutput run_bench(const BenchConfig& config);

/// Writes runs.csv, timings.csv and summary.json into `dir` (created if
/// missing). Each file is written to a temporary and renamed into place.
void emit(const BenchOutput& output, const std::filesystem::path& dir);

std::string runs_csv(const std::vector<RunRecord>& records, const BenchConfig& config);
std::string timings_csv(const std::vector<RunRecord>& records);
std::string summary_json(const BenchOutput& output);

/// Parses runs.csv, then attaches wall times from timings.csv when given.
std::vector<RunRecord> read_runs(const std::filesystem::path& runs_path,
                                 const std::filesystem::path& timings_path = {});
BenchSummary read_summary(const std::filesystem::path& summary_path);

int resolve_worker_count(int requested);

}  // namespace ssopt::bench
