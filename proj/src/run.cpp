#include "conelq/run.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "conelq/cone_qrm.hpp"
#include "conelq/errors.hpp"
#include "conelq/fbsde.hpp"
#include "conelq/oracle.hpp"
#include "conelq/sde_sim.hpp"

namespace conelq {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json closed_form(double v) {
  return ordered_json{{"value", v}, {"provenance", "closed_form"}};
}

ordered_json monte_carlo(const Estimate& e) {
  return ordered_json{{"value", e.mean}, {"stderr", e.stderr_}, {"provenance", "monte_carlo"}};
}

ordered_json oracle_value(double v) {
  return ordered_json{{"value", v}, {"provenance", "oracle"}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("run: cannot write " + path.string());
  out << content;
}

void write_metadata(const std::filesystem::path& dir, const RunConfig& config) {
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  ordered_json meta{{"mode", mode_name(config.mode)}, {"generated_at", stamp}};
  write_file(dir / "metadata.json", meta.dump(2) + "\n");
}

std::string solution_csv(const RunConfig& config, const ConeQRMSolution& sol) {
  const TimeGrid& grid = config.problem.market.grid;
  const int n = grid.n_steps();
  const int dim = config.problem.market.dim;
  std::string out = "t,P_hat";
  for (int c = 1; c <= dim; ++c) out += ",beta_hat_" + std::to_string(c);
  for (int c = 1; c <= dim; ++c) out += ",sigma_field_" + std::to_string(c);
  for (int c = 1; c <= dim; ++c) out += ",xi_hat_" + std::to_string(c);
  out += "\n";
  for (int k = 0; k <= n; ++k) {
    out += fmt(grid.point(k)) + "," + fmt(sol.P_hat[k]);
    // interval-indexed columns are empty on the terminal row
    for (const auto* table : {&sol.beta_hat, &sol.sigma_field, &sol.xi_hat})
      for (int c = 0; c < dim; ++c)
        out += k < n ? "," + fmt((*table)[k](c)) : ",";
    out += "\n";
  }
  return out;
}

// Trapezoid running cost with the proportional feedback pi = xi X, plus the
// terminal cost; matches estimate_primal_cost but with per-path controls.
Estimate primal_cost_feedback(const Matrix& x, const std::vector<Vector>& xi,
                              const QuadraticCost& cost, const TimeGrid& grid) {
  const int n = grid.n_steps();
  const double dt = grid.dt();
  std::vector<double> per_path(x.rows());
  for (int p = 0; p < (int)x.rows(); ++p) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      Vector pi = xi[k] * x(p, k);
      acc += 0.5 * dt *
             (running_cost(cost, k, x(p, k), pi) + running_cost(cost, k, x(p, k + 1), pi));
    }
    per_path[p] = acc + terminal_cost(cost, x(p, n));
  }
  double mean = 0.0;
  for (double s : per_path) mean += s;
  mean /= per_path.size();
  double var = 0.0;
  for (double s : per_path) var += (s - mean) * (s - mean);
  var /= (per_path.size() - 1.0);
  return {mean, std::sqrt(var / per_path.size())};
}

struct SimResults {
  Estimate primal;
  Estimate dual;
  GapEstimate gap;
  ConeQRMSolution sol;
};

SimResults run_simulation(const RunConfig& config) {
  const ConeQRMProblem& prob = config.problem;
  SimResults res{{}, {}, {}, solve(prob)};
  auto noise = simulate_brownian(config.sim, prob.market.grid, prob.market.dim);
  Matrix x = simulate_wealth_feedback(prob.market, res.sol.xi_hat, prob.x0, noise,
                                      config.sim.scheme);
  res.primal = primal_cost_feedback(x, res.sol.xi_hat, config.cost, prob.market.grid);
  Matrix y = simulate_dual_proportional(prob.market, res.sol.y_hat, res.sol.eta, noise,
                                        config.sim.scheme);
  res.dual = estimate_dual_cost_proportional(prob.x0, res.sol.y_hat, y, res.sol.gamma_hat,
                                             config.cost, prob.cone, prob.market.grid);
  res.gap = duality_gap(res.primal, res.dual);
  return res;
}

// Builds the optimal path bundle from the closed-form solution on fresh
// noise, filling every field the optimality checks consume.
PathBundle closed_form_bundle(const RunConfig& config, const ConeQRMSolution& sol) {
  const ConeQRMProblem& prob = config.problem;
  const TimeGrid& grid = prob.market.grid;
  const int n = grid.n_steps();
  const int dim = prob.market.dim;
  PathBundle bundle(grid, config.sim.n_paths, dim);
  bundle.x0 = prob.x0;
  bundle.y0 = sol.y_hat;
  bundle.dW = simulate_brownian(config.sim, grid, dim);
  bundle.X = simulate_wealth_feedback(prob.market, sol.xi_hat, prob.x0, bundle.dW,
                                      config.sim.scheme);
  bundle.Y = simulate_dual_proportional(prob.market, sol.y_hat, sol.eta, bundle.dW,
                                        config.sim.scheme);
  bundle.p1 = bundle.Y;
  bundle.p2 = bundle.X;
  bundle.alpha = Matrix::Zero(bundle.n_paths, n);
  bundle.q1.assign(bundle.n_paths, Matrix(n, dim));
  bundle.q2.assign(bundle.n_paths, Matrix(n, dim));
  bundle.pi.assign(bundle.n_paths, Matrix(n, dim));
  bundle.beta.assign(bundle.n_paths, Matrix(n, dim));
  for (int p = 0; p < bundle.n_paths; ++p) {
    for (int k = 0; k < n; ++k) {
      bundle.q1[p].row(k) = sol.eta[k].transpose() * bundle.Y(p, k);
      bundle.pi[p].row(k) = sol.xi_hat[k].transpose() * bundle.X(p, k);
      bundle.q2[p].row(k) =
          (prob.market.sigma[k].transpose() * sol.xi_hat[k]).transpose() * bundle.X(p, k);
      bundle.beta[p].row(k) = sol.gamma_hat[k].transpose() * bundle.Y(p, k);
    }
  }
  return bundle;
}

ordered_json condition_json(const ConditionReport& r) {
  return ordered_json{{"checked", r.checked},
                      {"violations", r.violations},
                      {"worst_margin", r.worst_margin},
                      {"pass", r.pass()}};
}

ordered_json residual_json(const ResidualReport& r) {
  return ordered_json{{"max_residual", r.max_residual},
                      {"l2_residual", r.l2_residual},
                      {"terminal_mismatch", r.terminal_mismatch}};
}

// Coefficients of the problem grid re-tabulated on the (finer) oracle grid.
MarketModel resample_market(const MarketModel& market, int n_steps) {
  TimeGrid grid(market.grid.horizon(), n_steps);
  std::vector<double> r(n_steps);
  std::vector<Vector> b(n_steps);
  std::vector<Matrix> sigma(n_steps);
  const int n_src = market.grid.n_steps();
  for (int j = 0; j < n_steps; ++j) {
    int k = std::min((int)((long)j * n_src / n_steps), n_src - 1);
    r[j] = market.r[k];
    b[j] = market.b[k];
    sigma[j] = market.sigma[k];
  }
  return MarketModel(grid, market.dim, r, b, sigma, market.nondegeneracy_k);
}

int run_solve(const RunConfig& config, const std::filesystem::path& dir) {
  ConeQRMSolution sol = solve(config.problem);
  write_file(dir / "solution.csv", solution_csv(config, sol));
  ordered_json summary{{"mode", "solve"},
                       {"y_hat", closed_form(sol.y_hat)},
                       {"P_hat_0", closed_form(sol.P_hat.front())},
                       {"primal_value", closed_form(sol.primal_value)},
                       {"dual_value", closed_form(sol.dual_value)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return 0;
}

int run_simulate(const RunConfig& config, const std::filesystem::path& dir) {
  SimResults res = run_simulation(config);
  double band = config.tol.gap_sigmas * std::max(res.primal.stderr_, 1e-12);
  bool pass = std::fabs(res.primal.mean - res.sol.primal_value) <= band;
  ordered_json report{{"mode", "simulate"},
                      {"primal_estimate", monte_carlo(res.primal)},
                      {"dual_estimate", monte_carlo(res.dual)},
                      {"primal_value", closed_form(res.sol.primal_value)},
                      {"dual_value", closed_form(res.sol.dual_value)},
                      {"primal_within_band", pass}};
  write_file(dir / "simulate.json", report.dump(2) + "\n");
  return pass ? 0 : 2;
}

int run_verify(const RunConfig& config, const std::filesystem::path& dir) {
  const ConeQRMProblem& prob = config.problem;
  ConeQRMSolution sol = solve(prob);
  PathBundle bundle = closed_form_bundle(config, sol);
  ConditionReport primal =
      primal_condition_check(bundle, prob.market, config.cost, prob.cone, config.tol.check);
  DualConditionReport dual = dual_condition_check(bundle, prob.market, config.cost, prob.cone,
                                                  prob.x0, config.tol.check);
  ResidualReport rp = primal_bsde_residual(bundle, prob.market, config.cost);
  ResidualReport rd = dual_bsde_residual(bundle, prob.market, config.cost);
  bool pass = primal.pass() && dual.pass();
  ordered_json report{{"mode", "verify"},
                      {"primal_condition", condition_json(primal)},
                      {"dual_condition",
                       ordered_json{{"initial_wealth", condition_json(dual.initial_wealth)},
                                    {"feasibility", condition_json(dual.feasibility)},
                                    {"subgradient", condition_json(dual.subgradient)}}},
                      {"primal_bsde_residual", residual_json(rp)},
                      {"dual_bsde_residual", residual_json(rd)},
                      {"pass", pass}};
  write_file(dir / "verify.json", report.dump(2) + "\n");
  return pass ? 0 : 2;
}

int run_oracle(const RunConfig& config, const std::filesystem::path& dir) {
  const ConeQRMProblem& prob = config.problem;
  double solver_p0 = sre_solution(prob, 0);
  MarketModel fine = resample_market(prob.market, config.oracle.n_steps);
  DPResult dp = dp_value_recursion(fine, prob.cone, prob.a, config.oracle.dp);
  double delta = dp.P.front() - solver_p0;
  double rel = std::fabs(delta) / std::fabs(solver_p0);
  bool pass = rel <= 0.02;
  ordered_json report{{"mode", "oracle"},
                      {"dp_steps", config.oracle.n_steps},
                      {"solver_P_0", closed_form(solver_p0)},
                      {"oracle_P_0", oracle_value(dp.P.front())},
                      {"delta", delta},
                      {"relative_delta", rel},
                      {"pass", pass}};
  write_file(dir / "oracle.json", report.dump(2) + "\n");
  return pass ? 0 : 2;
}

int run_gap(const RunConfig& config, const std::filesystem::path& dir) {
  SimResults res = run_simulation(config);
  double band = config.tol.gap_sigmas * std::max(res.gap.stderr_, 1e-12);
  bool pass = std::fabs(res.gap.gap) <= band;
  ordered_json report{{"mode", "gap"},
                      {"primal_estimate", monte_carlo(res.primal)},
                      {"dual_estimate", monte_carlo(res.dual)},
                      {"gap", ordered_json{{"value", res.gap.gap},
                                           {"stderr", res.gap.stderr_},
                                           {"provenance", "monte_carlo"}}},
                      {"pass", pass}};
  write_file(dir / "gap.json", report.dump(2) + "\n");
  return pass ? 0 : 2;
}

}  // namespace

int run(const RunConfig& config, const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_metadata(dir, config);
  switch (config.mode) {
    case Mode::Solve: return run_solve(config, dir);
    case Mode::Simulate: return run_simulate(config, dir);
    case Mode::Verify: return run_verify(config, dir);
    case Mode::Oracle: return run_oracle(config, dir);
    case Mode::Gap: return run_gap(config, dir);
  }
  throw std::logic_error("run: unknown mode");
}

}  // namespace conelq
