#include <doctest.h>

#include <cmath>
#include <random>

#include "conelq/cone_qrm.hpp"
#include "conelq/oracle.hpp"

using namespace conelq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out((int)v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

MarketModel identity_market(int dim, double r, const Vector& theta, int n_steps) {
  return MarketModel::constant(TimeGrid(1.0, n_steps), r,
                               Vector::Constant(dim, r) + theta, Matrix::Identity(dim, dim),
                               1e-10);
}

}  // namespace

TEST_CASE("dp_value_recursion: unconstrained market matches the exponential closed form") {
  Vector theta = vec({0.3, -0.2});
  MarketModel m = identity_market(2, 0.02, theta, 200);
  double a = 2.0;
  DPResult dp = dp_value_recursion(m, Cone::full_space(2), a);
  double exact = a * std::exp(0.04 - theta.squaredNorm());
  CHECK(std::fabs(dp.P.front() - exact) / exact <= 0.01);
  CHECK(dp.P.back() == a);
  // stationary minimizer is -theta for identity volatility, up to O(dt)
  CHECK((dp.v_star[100] + theta).norm() <= 0.05);
}

TEST_CASE("dp_value_recursion: zero risk premium compounds deterministically") {
  MarketModel m = identity_market(1, 0.03, vec({0.0}), 50);
  DPResult dp = dp_value_recursion(m, Cone::full_space(1), 1.5);
  double dt = m.grid.dt();
  CHECK(dp.P.front() ==
        doctest::Approx(1.5 * std::pow(1.0 + 0.03 * dt, 100)).epsilon(1e-9));
  for (const Vector& v : dp.v_star) CHECK(v.norm() <= 1e-9);
}

TEST_CASE("dp_value_recursion: no-shorting instance reproduces the solver value") {
  MarketModel m = identity_market(1, 0.02, vec({0.5}), 200);
  DPResult dp = dp_value_recursion(m, Cone::nonnegative_orthant(1), 2.0);
  double exact = 2.0 * std::exp(0.04);  // the binding constraint removes the theta term
  CHECK(std::fabs(dp.P.front() - exact) / exact <= 0.01);
  for (const Vector& v : dp.v_star) CHECK(v.norm() <= 1e-6);
}

TEST_CASE("dp_value_recursion agrees with sre_solution on a halfspace cone") {
  Cone k = Cone::halfspaces(2, {vec({1.0, -0.5})});
  ConeQRMProblem prob(identity_market(2, 0.01, vec({0.3, 0.4}), 200), k, 1.7, 1.0);
  ConeQRMSolution sol = solve(prob);
  DPResult dp = dp_value_recursion(prob.market, k, prob.a);
  CHECK(std::fabs(dp.P.front() - sol.P_hat.front()) / sol.P_hat.front() <= 0.01);
}

TEST_CASE("dp_value_recursion is monotone in the cone") {
  Vector theta = vec({0.3, -0.4});
  MarketModel m = identity_market(2, 0.02, theta, 40);
  double a = 2.0;
  double full = dp_value_recursion(m, Cone::full_space(2), a).P.front();
  double orthant = dp_value_recursion(m, Cone::nonnegative_orthant(2), a).P.front();
  double single = dp_value_recursion(m, Cone::rays(2, {vec({1.0, 0.0})}), a).P.front();
  double zero = dp_value_recursion(m, Cone::zero(2), a).P.front();
  CHECK(full <= orthant + 1e-12);
  CHECK(orthant <= single + 1e-12);
  CHECK(single <= zero + 1e-12);
  CHECK(zero == doctest::Approx(a * std::pow(1.0 + 0.02 * m.grid.dt(), 80)).epsilon(1e-10));
}

TEST_CASE("dp_value_recursion error halves under step refinement") {
  Vector theta = vec({0.35});
  Cone k = Cone::nonnegative_orthant(1);
  auto value = [&](int n) {
    MarketModel m = identity_market(1, 0.02, theta, n);  // positive premium binds
    return dp_value_recursion(m, k, 2.0).P.front();
  };
  double exact = 2.0 * std::exp(0.04);
  double e1 = std::fabs(value(50) - exact);
  double e2 = std::fabs(value(100) - exact);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("dp_value_recursion: Gauss-Hermite noise matches binomial on a smooth instance") {
  Vector theta = vec({0.3, -0.2});
  MarketModel m = identity_market(2, 0.02, theta, 60);
  DPConfig gh;
  gh.noise = NoiseModel::GaussHermite;
  gh.gh_nodes = 5;
  double pb = dp_value_recursion(m, Cone::nonnegative_orthant(2), 2.0).P.front();
  double pg = dp_value_recursion(m, Cone::nonnegative_orthant(2), 2.0, gh).P.front();
  CHECK(pb == doctest::Approx(pg).epsilon(5e-3));
}

TEST_CASE("single_period_lq: unconstrained complete-the-square closed form") {
  Vector theta = vec({0.3, -0.1});
  MarketModel m = identity_market(2, 0.02, theta, 4);
  double dt = m.grid.dt();
  double a = 1.8, x0 = 1.3;
  SinglePeriodLQ sp = single_period_lq(m, 1, Cone::full_space(2), a, x0);
  // argmin of E[(x0(1+r dt) + pi'(theta dt + dW))^2]:
  // (dt I + dt^2 theta theta')pi* = -x0(1+r dt) dt theta
  Matrix big = dt * Matrix::Identity(2, 2) + dt * dt * theta * theta.transpose();
  Vector expected = big.fullPivLu().solve(-x0 * (1.0 + 0.02 * dt) * dt * theta);
  CHECK((sp.pi_star - expected).norm() <= 1e-8 * (1.0 + expected.norm()));
  double base = x0 * (1.0 + 0.02 * dt);
  double val = 0.5 * a *
               (base * base + 2.0 * base * dt * theta.dot(sp.pi_star) +
                sp.pi_star.dot(big * sp.pi_star));
  CHECK(sp.value == doctest::Approx(val).epsilon(1e-10));
}

TEST_CASE("single_period_lq: zero risk premium keeps the portfolio at zero") {
  MarketModel m = identity_market(1, 0.05, vec({0.0}), 4);
  SinglePeriodLQ sp = single_period_lq(m, 0, Cone::full_space(1), 2.0, 1.0);
  CHECK(sp.pi_star.norm() <= 1e-10);
  double base = 1.0 + 0.05 * m.grid.dt();
  CHECK(sp.value == doctest::Approx(0.5 * 2.0 * base * base).epsilon(1e-12));
}

TEST_CASE("single_period_lq beats a fine grid on a constrained instance") {
  Vector theta = vec({0.4});
  MarketModel m = identity_market(1, 0.02, theta, 4);  // wants to short, orthant forbids it
  double dt = m.grid.dt();
  double a = 2.0, x0 = 1.0;
  SinglePeriodLQ sp = single_period_lq(m, 2, Cone::nonnegative_orthant(1), a, x0);
  double base = x0 * (1.0 + 0.02 * dt);
  double best = 1e300;
  for (double p = 0.0; p <= 5.0; p += 1e-4) {
    double mean = base + p * 0.4 * dt;
    double value = 0.5 * a * (mean * mean + p * p * dt);
    best = std::min(best, value);
  }
  CHECK(sp.value <= best + 1e-8);
  CHECK(sp.pi_star(0) >= -1e-12);
  CHECK(sp.pi_star(0) <= 1e-8);  // constraint binds
}

TEST_CASE("grid_phi matches the analytic conjugate on random positive-definite instances") {
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TimeGrid grid(1.0, 4);
  for (int trial = 0; trial < 20; ++trial) {
    int dim = 1 + (int)(std::fabs(u(gen)) * 1.9);
    Matrix root = Matrix::NullaryExpr(dim, dim, [&](int, int) { return u(gen); });
    Matrix r_mat = root * root.transpose() + 0.5 * Matrix::Identity(dim, dim);
    double q = 0.6 + std::fabs(u(gen));
    Vector s = Vector::NullaryExpr(dim, [&](int) { return 0.2 * u(gen); });
    QuadraticCost cost = QuadraticCost::constant(grid, q, s, r_mat, 2.0, 0.0);
    Cone k = trial % 2 == 0 ? Cone::full_space(dim) : Cone::nonnegative_orthant(dim);
    double alpha = u(gen);
    Vector beta = Vector::NullaryExpr(dim, [&](int) { return u(gen); });
    PhiResult pr = phi(cost, k, 0, alpha, beta);
    REQUIRE(pr.finite);
    GridBox box{-6.0, 6.0, Vector::Constant(dim, -6.0), Vector::Constant(dim, 6.0)};
    double g = grid_phi(cost, k, 0, alpha, beta, box, 1e-4);
    CHECK(std::fabs(g - pr.value) <= 1e-4 * (1.0 + std::fabs(pr.value)));
    CHECK(g <= pr.value + 1e-8);  // grid never exceeds the true supremum
  }
}

TEST_CASE("grid_phi: zero data gives zero; support regime matches") {
  TimeGrid grid(1.0, 2);
  QuadraticCost cost = QuadraticCost::zero_running(grid, 2, 2.0, 0.0);
  Cone k = Cone::nonnegative_orthant(2);
  GridBox box{-3.0, 3.0, Vector::Constant(2, -3.0), Vector::Constant(2, 3.0)};
  CHECK(grid_phi(cost, k, 0, 0.0, Vector::Zero(2), box, 1e-3) == 0.0);
  // beta in the polar cone: supremum over K is attained at the origin
  CHECK(grid_phi(cost, k, 0, 0.0, vec({-1.0, -0.5}), box, 1e-3) == doctest::Approx(0.0));
}

TEST_CASE("grid_phi grows with the box when the conjugate is unbounded") {
  TimeGrid grid(1.0, 2);
  QuadraticCost cost = QuadraticCost::zero_running(grid, 1, 2.0, 0.0);
  Cone k = Cone::nonnegative_orthant(1);
  Vector beta = vec({1.0});  // outside the polar cone: sup is +infinity
  GridBox small{-1.0, 1.0, vec({0.0}), vec({1.0})};
  GridBox large{-1.0, 1.0, vec({0.0}), vec({50.0})};
  double g_small = grid_phi(cost, k, 0, 0.0, beta, small, 1e-3);
  double g_large = grid_phi(cost, k, 0, 0.0, beta, large, 1e-2);
  CHECK(g_small == doctest::Approx(1.0));
  CHECK(g_large == doctest::Approx(50.0));
  CHECK(g_large > 10.0 * g_small);
}

TEST_CASE("grid_phi on a ray cone searches along the generator") {
  TimeGrid grid(1.0, 2);
  Cone k = Cone::rays(2, {vec({3.0, 4.0})});  // direction (0.6, 0.8)
  Matrix r_mat = Matrix::Identity(2, 2);
  QuadraticCost cost =
      QuadraticCost::constant(grid, 1.0, Vector::Zero(2), r_mat, 2.0, 0.0);
  double alpha = 0.5;
  Vector beta = vec({1.0, 1.0});
  PhiResult pr = phi(cost, k, 0, alpha, beta);
  REQUIRE(pr.finite);
  GridBox box{-4.0, 4.0, Vector::Constant(2, -4.0), Vector::Constant(2, 4.0)};
  double g = grid_phi(cost, k, 0, alpha, beta, box, 1e-4);
  CHECK(std::fabs(g - pr.value) <= 1e-4 * (1.0 + std::fabs(pr.value)));
}
