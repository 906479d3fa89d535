#include "conelq/sde_sim.hpp"

#include <cmath>

#include "conelq/errors.hpp"
#include "conelq/rng.hpp"

namespace conelq {

void SimConfig::validate() const {
  if (n_paths < 2) throw std::invalid_argument("SimConfig: need at least two paths");
  if (antithetic && n_paths % 2 != 0)
    throw std::invalid_argument("SimConfig: antithetic requires an even path count");
}

std::vector<Matrix> simulate_brownian(const SimConfig& config, const TimeGrid& grid, int dim) {
  config.validate();
  const int n = grid.n_steps();
  const double sd = std::sqrt(grid.dt());
  std::vector<Matrix> out(config.n_paths, Matrix(n, dim));
  for (int p = 0; p < config.n_paths; ++p) {
    if (config.antithetic && p % 2 == 1) {
      out[p] = -out[p - 1];
      continue;
    }
    for (int k = 0; k < n; ++k)
      for (int c = 0; c < dim; ++c)
        out[p](k, c) = sd * rng::normal(config.seed, (std::uint64_t)p, (std::uint64_t)k,
                                        (std::uint64_t)c);
  }
  return out;
}

namespace {

void check_noise(const MarketModel& market, const std::vector<Matrix>& noise) {
  for (const auto& m : noise)
    if (m.rows() != market.grid.n_steps() || m.cols() != market.dim)
      throw DimensionMismatch("sde_sim: noise shape must be n_steps x N per path");
}

}  // namespace

Matrix simulate_wealth_open_loop(const MarketModel& market, const std::vector<Vector>& pi,
                                 double x0, const std::vector<Matrix>& noise) {
  const int n = market.grid.n_steps();
  const double dt = market.grid.dt();
  if ((int)pi.size() != n) throw DimensionMismatch("simulate_wealth: pi table per interval");
  check_noise(market, noise);
  Matrix x((int)noise.size(), n + 1);
  std::vector<double> drift_pi(n);
  std::vector<Vector> load(n);
  for (int k = 0; k < n; ++k) {
    Vector theta = market_price_of_risk(market, k);
    drift_pi[k] = pi[k].dot(market.sigma[k] * theta);
    load[k] = market.sigma[k].transpose() * pi[k];
  }
  for (int p = 0; p < (int)noise.size(); ++p) {
    x(p, 0) = x0;
    for (int k = 0; k < n; ++k)
      x(p, k + 1) = x(p, k) + (market.r[k] * x(p, k) + drift_pi[k]) * dt +
                    load[k].dot(noise[p].row(k));
  }
  return x;
}

Matrix simulate_wealth_feedback(const MarketModel& market, const std::vector<Vector>& xi,
                                double x0, const std::vector<Matrix>& noise, Scheme scheme) {
  const int n = market.grid.n_steps();
  const double dt = market.grid.dt();
  if ((int)xi.size() != n) throw DimensionMismatch("simulate_wealth: xi table per interval");
  check_noise(market, noise);
  Matrix x((int)noise.size(), n + 1);
  std::vector<double> mu(n);
  std::vector<Vector> load(n);
  for (int k = 0; k < n; ++k) {
    Vector theta = market_price_of_risk(market, k);
    load[k] = market.sigma[k].transpose() * xi[k];
    mu[k] = market.r[k] + xi[k].dot(market.sigma[k] * theta);
  }
  for (int p = 0; p < (int)noise.size(); ++p) {
    x(p, 0) = x0;
    for (int k = 0; k < n; ++k) {
      double dw = load[k].dot(noise[p].row(k));
      if (scheme == Scheme::ExactExponential)
        x(p, k + 1) = x(p, k) * std::exp((mu[k] - 0.5 * load[k].squaredNorm()) * dt + dw);
      else
        x(p, k + 1) = x(p, k) * (1.0 + mu[k] * dt) + x(p, k) * dw;
    }
  }
  return x;
}

Matrix simulate_dual_open_loop(const MarketModel& market, double y0,
                               const std::vector<double>& alpha, const std::vector<Vector>& beta,
                               const std::vector<Matrix>& noise) {
  const int n = market.grid.n_steps();
  const double dt = market.grid.dt();
  if ((int)alpha.size() != n || (int)beta.size() != n)
    throw DimensionMismatch("simulate_dual: control tables per interval");
  check_noise(market, noise);
  Matrix y((int)noise.size(), n + 1);
  std::vector<Vector> sib(n);
  std::vector<Vector> thetas(n);
  for (int k = 0; k < n; ++k) {
    sib[k] = market.sigma[k].fullPivLu().solve(beta[k]);
    thetas[k] = market_price_of_risk(market, k);
  }
  for (int p = 0; p < (int)noise.size(); ++p) {
    y(p, 0) = y0;
    for (int k = 0; k < n; ++k) {
      Vector loading = sib[k] - thetas[k] * y(p, k);
      y(p, k + 1) = y(p, k) + (alpha[k] - market.r[k] * y(p, k)) * dt +
                    loading.dot(noise[p].row(k));
    }
  }
  return y;
}

Matrix simulate_dual_proportional(const MarketModel& market, double y0,
                                  const std::vector<Vector>& eta,
                                  const std::vector<Matrix>& noise, Scheme scheme) {
  const int n = market.grid.n_steps();
  const double dt = market.grid.dt();
  if ((int)eta.size() != n) throw DimensionMismatch("simulate_dual: eta table per interval");
  check_noise(market, noise);
  Matrix y((int)noise.size(), n + 1);
  for (int p = 0; p < (int)noise.size(); ++p) {
    y(p, 0) = y0;
    for (int k = 0; k < n; ++k) {
      double dw = eta[k].dot(noise[p].row(k));
      if (scheme == Scheme::ExactExponential)
        y(p, k + 1) =
            y(p, k) * std::exp((-market.r[k] - 0.5 * eta[k].squaredNorm()) * dt + dw);
      else
        y(p, k + 1) = y(p, k) * (1.0 - market.r[k] * dt) + y(p, k) * dw;
    }
  }
  return y;
}

namespace {

Estimate mean_and_stderr(const std::vector<double>& samples) {
  const double n = (double)samples.size();
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

Estimate estimate_primal_cost(const Matrix& x_paths, const std::vector<Vector>& pi,
                              const QuadraticCost& cost, const TimeGrid& grid) {
  const int n = grid.n_steps();
  const double dt = grid.dt();
  if (x_paths.cols() != n + 1 || (int)pi.size() != n)
    throw DimensionMismatch("estimate_primal_cost: shape mismatch");
  std::vector<double> per_path((int)x_paths.rows());
  for (int p = 0; p < (int)x_paths.rows(); ++p) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
      acc += 0.5 * dt * (running_cost(cost, k, x_paths(p, k), pi[k]) +
                         running_cost(cost, k, x_paths(p, k + 1), pi[k]));
    per_path[p] = acc + terminal_cost(cost, x_paths(p, n));
  }
  return mean_and_stderr(per_path);
}

Estimate estimate_dual_cost(double x0, double y0, const Matrix& y_paths,
                            const std::vector<double>& alpha, const std::vector<Vector>& beta,
                            const QuadraticCost& cost, const Cone& cone, const TimeGrid& grid) {
  const int n = grid.n_steps();
  const double dt = grid.dt();
  double phi_term = 0.0;
  for (int k = 0; k < n; ++k) {
    PhiResult pr = phi(cost, cone, k, alpha[k], beta[k]);
    if (!pr.finite)
      throw InfeasibleDualControl("estimate_dual_cost: phi infinite at interval " +
                                  std::to_string(k));
    phi_term += pr.value * dt;
  }
  std::vector<double> per_path((int)y_paths.rows());
  for (int p = 0; p < (int)y_paths.rows(); ++p)
    per_path[p] = m_T(cost, y_paths(p, n));
  Estimate mt = mean_and_stderr(per_path);
  return {m_0(x0, y0) + phi_term + mt.mean, mt.stderr_};
}

Estimate estimate_dual_cost_proportional(double x0, double y0, const Matrix& y_paths,
                                         const std::vector<Vector>& gamma,
                                         const QuadraticCost& cost, const Cone& cone,
                                         const TimeGrid& grid) {
  const int n = grid.n_steps();
  // beta = gamma Y with sign(Y) = sign(y0): delta(beta) = 0 exactly when
  // sign(y0) gamma stays in the polar cone, else the control is infeasible.
  Cone pol = polar(cone);
  const double s = y0 > 0.0 ? 1.0 : (y0 < 0.0 ? -1.0 : 0.0);
  if (s != 0.0) {
    for (int k = 0; k < n; ++k)
      if (!contains(pol, s * gamma.at(k), 1e-8 * (1.0 + gamma[k].norm())))
        throw InfeasibleDualControl(
            "estimate_dual_cost_proportional: beta leaves the polar cone");
  }
  std::vector<double> per_path((int)y_paths.rows());
  for (int p = 0; p < (int)y_paths.rows(); ++p)
    per_path[p] = m_T(cost, y_paths(p, grid.n_steps()));
  Estimate mt = mean_and_stderr(per_path);
  return {m_0(x0, y0) + mt.mean, mt.stderr_};
}

GapEstimate duality_gap(const Estimate& primal, const Estimate& dual) {
  return {primal.mean + dual.mean,
          std::sqrt(primal.stderr_ * primal.stderr_ + dual.stderr_ * dual.stderr_)};
}

}  // namespace conelq
