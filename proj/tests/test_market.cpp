#include <doctest.h>

#include <cmath>
#include <random>

#include "conelq/errors.hpp"
#include "conelq/market.hpp"
#include "conelq/sde_sim.hpp"

using namespace conelq;

namespace {

MarketModel simple_market(int dim, double r, const Vector& theta, int n_steps = 10,
                          double horizon = 1.0) {
  Matrix sigma = Matrix::Identity(dim, dim);
  Vector b = Vector::Constant(dim, r) + theta;  // sigma = I so theta = b - r 1
  return MarketModel::constant(TimeGrid(horizon, n_steps), r, b, sigma, 1e-8);
}

}  // namespace

TEST_CASE("market_price_of_risk solves sigma theta = b - r 1") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    int dim = 1 + (int)(gen() % 4);
    Matrix sigma = Matrix::Identity(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) sigma(i, j) += 0.3 * nd(gen);
    if (std::fabs(sigma.determinant()) < 0.1) continue;
    Vector b(dim);
    for (int i = 0; i < dim; ++i) b(i) = nd(gen);
    double r = 0.03;
    MarketModel m = MarketModel::constant(TimeGrid(1.0, 4), r, b, sigma, 1e-10);
    Vector theta = market_price_of_risk(m, 2);
    Vector resid = sigma * theta - (b - Vector::Constant(dim, r));
    CHECK(resid.norm() <= 1e-10 * (1.0 + b.norm()));
  }
}

TEST_CASE("market_price_of_risk rejects singular volatility") {
  Matrix sigma(2, 2);
  sigma << 1.0, 2.0, 0.5, 1.0;  // rank one
  MarketModel m = MarketModel::constant(TimeGrid(1.0, 2), 0.0, Vector::Ones(2), sigma, 1e-10);
  CHECK_THROWS_AS(market_price_of_risk(m, 0), SingularVolatility);
}

TEST_CASE("validate_nondegeneracy identity passes at k = 0.5") {
  MarketModel m = simple_market(2, 0.0, Vector::Zero(2));
  m.nondegeneracy_k = 0.5;
  NondegeneracyReport rep = validate_nondegeneracy(m);
  CHECK(rep.overall_min == doctest::Approx(1.0));
  CHECK(rep.pass);
}

TEST_CASE("validate_nondegeneracy diag(0.1, 0.5) fails at k = 0.02") {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 0.1;
  sigma(1, 1) = 0.5;
  MarketModel m =
      MarketModel::constant(TimeGrid(1.0, 3), 0.0, Vector::Zero(2), sigma, 0.02);
  NondegeneracyReport rep = validate_nondegeneracy(m);
  CHECK(rep.overall_min == doctest::Approx(0.01));
  CHECK_FALSE(rep.pass);
}

TEST_CASE("validate_nondegeneracy matches 2x2 closed-form eigenvalues") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix sigma = Matrix::Identity(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sigma(i, j) += 0.4 * nd(gen);
    MarketModel m = MarketModel::constant(TimeGrid(1.0, 2), 0.0, Vector::Zero(2), sigma, 1e-12);
    Matrix ss = sigma * sigma.transpose();
    double tr = ss.trace(), det = ss.determinant();
    double lam_min = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
    NondegeneracyReport rep = validate_nondegeneracy(m);
    CHECK(rep.overall_min == doctest::Approx(lam_min).epsilon(1e-9));
  }
}

TEST_CASE("state_price_density: theta = 0 gives exp(-rT) exactly") {
  MarketModel m = simple_market(2, 0.05, Vector::Zero(2), 16);
  SimConfig sim;
  sim.n_paths = 4;
  auto noise = simulate_brownian(sim, m.grid, m.dim);
  for (const auto& w : noise) {
    auto gamma = state_price_density_path(m, w);
    CHECK(gamma.front() == doctest::Approx(1.0));
    CHECK(gamma.back() == doctest::Approx(std::exp(-0.05)).epsilon(1e-12));
    for (double g : gamma) CHECK(g > 0.0);
  }
}

TEST_CASE("state_price_density: r = 0, theta = 0.5 closed form on one path") {
  Vector theta(1);
  theta << 0.5;
  MarketModel m = simple_market(1, 0.0, theta, 8);
  SimConfig sim;
  sim.n_paths = 2;
  auto noise = simulate_brownian(sim, m.grid, 1);
  double w = noise[0].sum();
  auto gamma = state_price_density_path(m, noise[0]);
  CHECK(gamma.back() == doctest::Approx(std::exp(-0.125 - 0.5 * w)).epsilon(1e-12));
}

TEST_CASE("state_price_density: discounted martingale property") {
  Vector theta(2);
  theta << 0.3, -0.2;
  MarketModel m = simple_market(2, 0.04, theta, 20);
  SimConfig sim;
  sim.n_paths = 20000;
  sim.seed = 11;
  auto noise = simulate_brownian(sim, m.grid, 2);
  std::vector<double> samples;
  for (const auto& w : noise) samples.push_back(state_price_density_path(m, w).back() * std::exp(0.04));
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= samples.size();
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  double se = std::sqrt(var / (samples.size() - 1.0) / samples.size());
  CHECK(std::fabs(mean - 1.0) <= 4.0 * se);
}

TEST_CASE("hat_H_path with zero gamma is bitwise identical to the state-price density") {
  Vector theta(2);
  theta << 0.25, -0.15;
  MarketModel m = simple_market(2, 0.03, theta, 12);
  SimConfig sim;
  sim.n_paths = 8;
  auto noise = simulate_brownian(sim, m.grid, 2);
  std::vector<Vector> zero(m.grid.n_steps(), Vector::Zero(2));
  for (const auto& w : noise) {
    auto h = hat_H_path(m, zero, w);
    auto g = state_price_density_path(m, w);
    REQUIRE(h.size() == g.size());
    for (size_t i = 0; i < h.size(); ++i) CHECK(h[i] == g[i]);  // bitwise
  }
}

TEST_CASE("hat_H_path with gamma = sigma theta has zero loading") {
  Vector theta(2);
  theta << 0.2, 0.1;
  MarketModel m = simple_market(2, 0.06, theta, 9);
  std::vector<Vector> gamma(m.grid.n_steps(), theta);  // sigma = I
  SimConfig sim;
  sim.n_paths = 4;
  auto noise = simulate_brownian(sim, m.grid, 2);
  for (const auto& w : noise) {
    auto h = hat_H_path(m, gamma, w);
    CHECK(h.back() == doctest::Approx(std::exp(-0.06)).epsilon(1e-12));
  }
}

TEST_CASE("hat_H_path terminal mean matches the lognormal moment formula") {
  Vector theta(1);
  theta << 0.4;
  MarketModel m = simple_market(1, 0.02, theta, 10);
  Vector gamma_v(1);
  gamma_v << 0.1;
  std::vector<Vector> gamma(m.grid.n_steps(), gamma_v);
  SimConfig sim;
  sim.n_paths = 40000;
  sim.seed = 5;
  auto noise = simulate_brownian(sim, m.grid, 1);
  std::vector<double> samples;
  for (const auto& w : noise) samples.push_back(hat_H_path(m, gamma, w).back());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= samples.size();
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  double se = std::sqrt(var / (samples.size() - 1.0) / samples.size());
  // loading l = gamma - theta, drift -r - |l|^2/2, so E[H(T)] = e^{-rT}
  CHECK(std::fabs(mean - std::exp(-0.02)) <= 4.0 * se);
}

TEST_CASE("hat_H_path rejects mismatched noise shapes") {
  MarketModel m = simple_market(2, 0.0, Vector::Zero(2), 5);
  std::vector<Vector> gamma(5, Vector::Zero(2));
  Matrix bad = Matrix::Zero(4, 2);
  CHECK_THROWS_AS(hat_H_path(m, gamma, bad), DimensionMismatch);
}
