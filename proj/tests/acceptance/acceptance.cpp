// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the
// process exits nonzero when any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssopt/bench.hpp"
#include "ssopt/flow.hpp"
#include "ssopt/integrator.hpp"
#include "ssopt/models.hpp"
#include "ssopt/numerics.hpp"
#include "ssopt/random.hpp"
#include "ssopt/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace ssopt;

namespace {

const Vector kNoInput(0);
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Vector uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

// Conversion reaction written out by hand, independent of the library's
// model code: x_s = theta_2 xi / (theta_1 + theta_2).
struct CrClosedForm {
  models::ConversionReactionProblem p;

  double steady_state(const Vector& th) const { return th(1) * p.xi / (th(0) + th(1)); }

  double objective(const Vector& th) const {
    const double m = steady_state(th) - p.x_bar;
    return 0.5 * p.weight * m * m + 0.5 * (th - p.theta_bar).squaredNorm();
  }

  Vector gradient(const Vector& th) const {
    const double xs = steady_state(th);
    const double sum = th(0) + th(1);
    const Vector s{{-xs / sum, (p.xi - xs) / sum}};
    return (th - p.theta_bar) + p.weight * (xs - p.x_bar) * s;
  }
};

// Dense grid over [0.1, 8]^2 followed by Newton on the closed-form gradient.
Vector cr_oracle() {
  const CrClosedForm cf;
  constexpr int n = 401;
  Vector best(2);
  double best_j = kInf;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Vector th{{0.1 + 7.9 * i / (n - 1), 0.1 + 7.9 * k / (n - 1)}};
      const double j = cf.objective(th);
      if (j < best_j) {
        best_j = j;
        best = th;
      }
    }
  }
  for (int it = 0; it < 30; ++it) {
    const Matrix h = numerics::finite_diff_jacobian(
        [&](const Vector& t) { return cf.gradient(t); }, best, 1e-6);
    const Vector step = h.lu().solve(cf.gradient(best));
    best -= step;
    if (step.norm() < 1e-15) break;
  }
  return best;
}

FlowProblem cr_problem(double lambda) {
  FlowConfig c;
  c.lambda = lambda;
  return models::conversion_reaction_flow_problem({}, c);
}

FlowState cr_state(const Vector& theta, double x) { return FlowState{theta, {Vector{{x}}}, 0.0}; }

double first_time_below(const FlowProblem& p, const RunResult& r, double level) {
  for (const auto& s : r.trajectory) {
    if (manifold_residual(p, s) < level) return s.r;
  }
  return kInf;
}

Verdict criterion_1() {
  const Vector th_star = cr_oracle();
  Rng rng(101);
  std::vector<FlowState> starts;
  for (int i = 0; i < 50; ++i) {
    const Vector th = uniform_vector(rng, 2, 0.1, 8.0);
    starts.push_back(cr_state(th, rng.uniform(0.0, 1.0)));
  }
  bool pass = true;
  std::string detail = fmt("theta*=(%.8f, %.8f)", th_star(0), th_star(1));
  for (double lambda : {2.0, 20.0}) {
    const FlowProblem p = cr_problem(lambda);
    int hits = 0;
    for (const auto& s : starts) {
      const RunResult r = run_flow(p, s);
      if ((r.final.theta - th_star).norm() < 1e-4 && r.manifold_residual < 1e-6) ++hits;
    }
    pass = pass && hits >= 48;
    detail += fmt("; lambda=%g: %d/50", lambda, hits);
  }
  return {pass, detail + " (need >= 95%)"};
}

Verdict criterion_2() {
  const Vector th_star = cr_oracle();
  const double x_star = CrClosedForm{}.steady_state(th_star);
  const Vector z_star{{th_star(0), th_star(1), x_star}};
  const FlowProblem p = cr_problem(20.0);
  Rng rng(202);
  int ok = 0;
  double worst_decades = kInf;
  for (int k = 0; k < 20; ++k) {
    Vector dir(3);
    for (Eigen::Index i = 0; i < 3; ++i) dir(i) = rng.normal();
    const Vector z0 = z_star + 0.1 * dir.normalized();
    const RunResult r = run_flow(p, cr_state(z0.head(2), z0(2)), true);
    std::vector<double> dist, resid;
    for (const auto& s : r.trajectory) {
      const Vector z{{s.theta(0), s.theta(1), s.states[0](0)}};
      dist.push_back((z - z_star).norm());
      resid.push_back(manifold_residual(p, s));
    }
    const double decades = std::log10(dist.front() / dist.back());
    worst_decades = std::min(worst_decades, decades);
    // The boundary layer ends once the state has collapsed onto the manifold.
    std::size_t tail = 0;
    while (tail < resid.size() && resid[tail] >= 1e-3) ++tail;
    bool monotone = tail < dist.size();
    for (std::size_t i = tail + 1; i < dist.size(); ++i) {
      if (dist[i] > dist[i - 1] * (1.0 + 1e-9)) monotone = false;
    }
    if (r.converged && decades >= 2.0 && monotone) ++ok;
  }
  return {ok == 20, fmt("%d/20 trajectories decay >= 2 decades with monotone tail; "
                        "smallest decay %.2f decades", ok, worst_decades)};
}

Verdict criterion_3() {
  const FlowState start = cr_state(Vector{{1.0, 4.0}}, 0.1);
  std::map<double, double> fraction;
  for (double lambda : {2.0, 20.0}) {
    const FlowProblem p = cr_problem(lambda);
    const RunResult r = run_flow(p, start, true);
    const double stop = r.converged ? r.final.r : kInf;
    fraction[lambda] = first_time_below(p, r, 1e-3) / stop;
  }
  const double r0 = manifold_residual(cr_problem(20.0), start);
  const bool pass = r0 > 0.5 && fraction[20.0] < 0.1 && fraction[2.0] > fraction[20.0];
  return {pass, fmt("initial residual %.3f; manifold-time / stop-time: lambda=20 %.4f, "
                    "lambda=2 %.4f", r0, fraction[20.0], fraction[2.0])};
}

Verdict criterion_4() {
  const FlowProblem p = cr_problem(0.0);
  const CrClosedForm cf;
  Rng rng(404);
  double worst = 0.0;
  int points = 0;
  for (int k = 0; k < 5; ++k) {
    const Vector th = uniform_vector(rng, 2, 0.1, 8.0);
    const RunResult r = run_flow(p, cr_state(th, cf.steady_state(th)), true);
    for (const auto& s : r.trajectory) worst = std::max(worst, manifold_residual(p, s));
    points += static_cast<int>(r.trajectory.size());
  }
  return {worst < 1e-4, fmt("max residual %.3e over %d trajectory points (need < 1e-4)", worst,
                            points)};
}

Verdict criterion_5() {
  Rng rng(505);
  const models::ConversionReactionProblem crp;
  const ModelSpec cr = models::conversion_reaction_model(crp.xi);
  models::NgfErkProblem ngfp;
  models::regenerate_data(ngfp, 1);
  const ModelSpec ngf = models::ngf_erk_model();

  double hat_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector th = uniform_vector(rng, 2, 0.1, 8.0);
    const Vector xs = cr.analytic_steady_state(th, kNoInput);
    hat_err = std::max(hat_err, numerics::max_abs(sensitivity_hat(cr, th, xs, kNoInput) -
                                                  sensitivity_exact(cr, th, xs, kNoInput)));
    const Vector tn = uniform_vector(rng, 6, -3.0, 1.0);
    const Vector u{{rng.uniform(0.0, 100.0)}};
    const Vector xn = ngf.analytic_steady_state(tn, u);
    hat_err = std::max(hat_err, numerics::max_abs(sensitivity_hat(ngf, tn, xn, u) -
                                                  sensitivity_exact(ngf, tn, xn, u)));
  }

  const CrClosedForm cf;
  const auto cr_obj = models::conversion_reaction_objective(crp);
  const auto cr_conds = models::conversion_reaction_conditions(crp);
  const auto ngf_obj = models::ngf_erk_objective(ngfp);
  const auto ngf_conds = models::ngf_erk_conditions(ngfp);
  double s_err = 0.0, g_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector th = uniform_vector(rng, 2, 0.1, 8.0);
    const Matrix fd_s = numerics::finite_diff_jacobian(
        [&](const Vector& t) { return Vector{{cf.steady_state(t)}}; }, th);
    const Vector xs{{cf.steady_state(th)}};
    s_err = std::max(s_err, rel_err(sensitivity_exact(cr, th, xs, kNoInput), fd_s));
    const Matrix fd_g = numerics::finite_diff_jacobian(
        [&](const Vector& t) { return Vector{{cf.objective(t)}}; }, th);
    g_err = std::max(g_err, rel_err(manifold_gradient(cr, cr_obj, th, {xs}, cr_conds).transpose(),
                                    fd_g));

    const Vector tn = uniform_vector(rng, 6, -3.0, 1.0);
    const Vector u{{rng.uniform(0.0, 100.0)}};
    const Matrix fd_sn = numerics::finite_diff_jacobian(
        [&](const Vector& t) { return ngf.analytic_steady_state(t, u); }, tn);
    s_err = std::max(s_err, rel_err(sensitivity_exact(ngf, tn, ngf.analytic_steady_state(tn, u), u),
                                    fd_sn));
    StateBlocks blocks;
    for (const auto& c : ngf_conds) blocks.push_back(ngf.analytic_steady_state(tn, c.u));
    const Matrix fd_gn = numerics::finite_diff_jacobian(
        [&](const Vector& t) { return Vector{{models::reduced_objective_ngf(t, ngfp).value}}; },
        tn);
    g_err = std::max(
        g_err, rel_err(manifold_gradient(ngf, ngf_obj, tn, blocks, ngf_conds).transpose(), fd_gn));
  }
  const bool pass = hat_err < 1e-10 && s_err < 1e-6 && g_err < 1e-6;
  return {pass, fmt("|S_hat - S| %.2e (< 1e-10); S vs differences %.2e (< 1e-6); "
                    "gradient vs differences %.2e (< 1e-6)", hat_err, s_err, g_err)};
}

const bench::MethodSummary* find_method(const bench::BenchSummary& s, const std::string& label) {
  for (const auto& m : s.methods) {
    if (m.label == label) return &m;
  }
  return nullptr;
}

Verdict criterion_6(const fs::path& out) {
  bench::BenchConfig config;
  const auto result = bench::run_bench(config);
  bench::emit(result, out / "criterion6");
  const auto* flow = find_method(result.summary, bench::method_label("flow", 20.0));
  const auto* unc = find_method(result.summary, "unconstrained");
  const auto* con = find_method(result.summary, "constrained");
  if (!flow || !unc || !con) return {false, "bench summary is missing a method"};

  // A method with no converged start has no time per converged start; it is
  // compared as infinitely slow.
  const auto time_or_inf = [](const bench::MethodSummary& m) {
    return m.time_per_converged_start.value_or(kInf);
  };
  const bool a = flow->fraction_converged >= 0.70;
  const bool b = flow->fraction_converged > con->fraction_converged;
  const bool c = unc->fraction_converged >= flow->fraction_converged;
  const bool d = time_or_inf(*flow) < time_or_inf(*con);
  const auto time_text = [](const bench::MethodSummary& m) {
    return m.time_per_converged_start ? fmt("%.4g s", *m.time_per_converged_start)
                                      : std::string("none converged");
  };
  std::string detail = fmt("fractions flow(lambda=20) %.2f, unconstrained %.2f, constrained %.2f",
                           flow->fraction_converged, unc->fraction_converged,
                           con->fraction_converged);
  detail += "; time per converged start flow " + time_text(*flow) + ", constrained " +
            time_text(*con);
  detail += fmt("; (a) %s (b) %s (c) %s (d) %s", a ? "pass" : "FAIL", b ? "pass" : "FAIL",
                c ? "pass" : "FAIL", d ? "pass" : "FAIL");
  return {a && b && c && d, detail};
}

Verdict criterion_7() {
  Rng rng(707);
  int agree = 0;
  double worst = 0.0;
  constexpr int n = 10;
  for (int k = 0; k < n; ++k) {
    const Vector th = uniform_vector(rng, 2, 0.1, 8.0);
    const FlowState start = cr_state(th, rng.uniform(0.0, 1.0));
    std::vector<Vector> ends;
    bool all_converged = true;
    for (double lambda : {2.0, 20.0, 200.0}) {
      const RunResult r = run_flow(cr_problem(lambda), start);
      all_converged = all_converged && r.converged;
      ends.push_back(r.final.theta);
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < ends.size(); ++i) {
      for (std::size_t j = i + 1; j < ends.size(); ++j) {
        spread = std::max(spread, (ends[i] - ends[j]).norm());
      }
    }
    worst = std::max(worst, spread);
    if (all_converged && spread < 1e-4) ++agree;
  }
  return {agree == n, fmt("%d/%d starts agree across lambda in {2, 20, 200}; largest pairwise "
                          "gap %.2e", agree, n, worst)};
}

Verdict criterion_8() {
  const integrator::Rhs decay = [](double, const Vector& y) -> Vector { return -y; };
  std::vector<double> lt, le;
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    integrator::Options o;
    o.rel_tol = tol;
    o.abs_tol = tol * 1e-2;
    const auto out = integrator::integrate_adaptive(decay, Vector{{1.0}}, 1.0, o);
    lt.push_back(std::log10(tol));
    le.push_back(std::log10(std::abs(out.y(0) - std::exp(-1.0))));
  }
  const double slope = (le.back() - le.front()) / (lt.back() - lt.front());

  const FlowState start = cr_state(Vector{{1.0, 4.0}}, 0.1);
  const RunResult slow = run_flow(cr_problem(2.0), start);
  const RunResult stiff = run_flow(cr_problem(200.0), start);
  const bool steps_ok = slow.converged && stiff.converged &&
                        stiff.steps_accepted < 20 * slow.steps_accepted;
  const bool pass = slope >= 0.7 && slope <= 1.3 && steps_ok;
  return {pass, fmt("tolerance slope %.3f (in [0.7, 1.3]); accepted steps lambda=200 %ld vs "
                    "lambda=2 %ld (need < 20x)", slope, stiff.steps_accepted,
                    slow.steps_accepted)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion_9(const fs::path& out) {
  const bench::BenchConfig config;
  bench::emit(bench::run_bench(config), out / "criterion9_a");
  bench::emit(bench::run_bench(config), out / "criterion9_b");
  const std::string a = read_file(out / "criterion9_a" / "runs.csv");
  const std::string b = read_file(out / "criterion9_b" / "runs.csv");
  const bool pass = !a.empty() && a == b;
  return {pass, fmt("runs.csv of two seeded runs %s (%zu bytes)",
                    a == b ? "identical" : "differ", a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssopt acceptance checks"};
  std::string out_dir = "acceptance_out";
  std::vector<int> selected;
  app.add_option("--out", out_dir, "Directory for bench artifacts");
  app.add_option("--criterion", selected, "Criteria to run (default: all)")
      ->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::map<int, std::function<Verdict()>> criteria{
      {1, criterion_1},
      {2, criterion_2},
      {3, criterion_3},
      {4, criterion_4},
      {5, criterion_5},
      {6, [&] { return criterion_6(out); }},
      {7, criterion_7},
      {8, criterion_8},
      {9, [&] { return criterion_9(out); }},
  };
  std::set<int> run(selected.begin(), selected.end());
  if (run.empty()) {
    for (const auto& [id, _] : criteria) run.insert(id);
  }

  int failures = 0;
  for (int id : run) {
    Verdict v;
    try {
      v = criteria.at(id)();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
