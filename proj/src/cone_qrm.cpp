#include "conelq/cone_qrm.hpp"

#include <cmath>

#include "conelq/errors.hpp"

namespace conelq {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Matrix sigma_inverse(const MarketModel& m, int k) {
  Eigen::FullPivLU<Matrix> lu(m.sigma.at(k));
  if (!lu.isInvertible()) throw SingularVolatility("cone_qrm: singular volatility matrix");
  return lu.inverse();
}

// Exponent of the closed forms on interval j: 2r - |sigma_field(., -x0)|^2.
double sre_exponent(const ConeQRMProblem& p, int j) {
  Vector sf = sigma_field(p, j, -p.x0);
  return 2.0 * p.market.r[j] - sf.squaredNorm();
}

double exp_sum_from(const ConeQRMProblem& p, int k) {
  const double dt = p.market.grid.dt();
  double acc = 0.0;
  for (int j = k; j < p.market.grid.n_steps(); ++j) acc += sre_exponent(p, j) * dt;
  return std::exp(acc);
}

}  // namespace

ConeQRMProblem::ConeQRMProblem(MarketModel market_, Cone cone_, double a_, double x0_)
    : market(std::move(market_)), cone(std::move(cone_)), a(a_), x0(x0_) {
  if (!(a > 0.0)) throw NonpositiveA("ConeQRMProblem: a must be positive");
  if (cone.dim() != market.dim)
    throw DimensionMismatch("ConeQRMProblem: cone dimension must match market dimension");
}

Vector beta_branch(const ConeQRMProblem& problem, int k, Branch branch) {
  const Matrix& sigma = problem.market.sigma.at(k);
  Matrix sigma_inv = sigma_inverse(problem.market, k);
  Cone transformed = transform_cone(sigma_inv, polar(problem.cone));
  Vector theta = market_price_of_risk(problem.market, k);
  Vector target = branch == Branch::Plus ? theta : Vector(-theta);
  Vector u_star = project(transformed, target);
  return sigma * u_star;
}

Vector sigma_field(const ConeQRMProblem& problem, int k, double y) {
  const int n = problem.market.dim;
  if (y == 0.0) return Vector::Zero(n);
  Matrix sigma_inv = sigma_inverse(problem.market, k);
  Vector theta = market_price_of_risk(problem.market, k);
  if (y > 0.0) return sigma_inv * beta_branch(problem, k, Branch::Plus) - theta;
  return sigma_inv * beta_branch(problem, k, Branch::Minus) + theta;
}

Vector signed_dual_volatility(const ConeQRMProblem& problem, int k, double y) {
  return sign(y) * sigma_field(problem, k, y);
}

double dual_value_function(const ConeQRMProblem& problem, int t_index, double y) {
  if (y == 0.0) return 0.0;
  const double dt = problem.market.grid.dt();
  double acc = 0.0;
  for (int j = t_index; j < problem.market.grid.n_steps(); ++j) {
    Vector sf = sigma_field(problem, j, y);
    acc += (-2.0 * problem.market.r[j] + sf.squaredNorm()) * dt;
  }
  return y * y * std::exp(acc);
}

double optimal_y(const ConeQRMProblem& problem) {
  if (problem.x0 == 0.0) return 0.0;
  return -problem.a * problem.x0 * exp_sum_from(problem, 0);
}

Vector optimal_beta(const ConeQRMProblem& problem, int k) {
  const int n = problem.market.dim;
  if (problem.x0 == 0.0) return Vector::Zero(n);
  const double factor = problem.a * problem.x0 * exp_sum_from(problem, k);
  if (problem.x0 > 0.0) return factor * beta_branch(problem, k, Branch::Minus);
  return -factor * beta_branch(problem, k, Branch::Plus);
}

double sre_solution(const ConeQRMProblem& problem, int k) {
  return problem.a * exp_sum_from(problem, k);
}

Vector optimal_feedback(const ConeQRMProblem& problem, int k) {
  if (problem.x0 == 0.0)
    throw ZeroInitialWealth("optimal_feedback: undefined at x0 = 0 (optimal portfolio is 0)");
  const double y_hat = optimal_y(problem);
  Vector eta = signed_dual_volatility(problem, k, y_hat);
  return problem.market.sigma.at(k).transpose().fullPivLu().solve(eta);
}

ConeQRMSolution solve(const ConeQRMProblem& problem) {
  const int n = problem.market.grid.n_steps();
  const int dim = problem.market.dim;
  ConeQRMSolution sol;
  sol.y_hat = optimal_y(problem);
  const double ys = sign(sol.y_hat);
  for (int k = 0; k < n; ++k) {
    sol.beta_plus.push_back(beta_branch(problem, k, Branch::Plus));
    sol.beta_minus.push_back(beta_branch(problem, k, Branch::Minus));
    sol.sigma_field.push_back(sigma_field(problem, k, sol.y_hat));
    sol.eta.push_back(ys * sol.sigma_field.back());
    sol.beta_hat.push_back(optimal_beta(problem, k));
    // beta_hat(t) = gamma_hat(t) Y(t) along the optimal dual state:
    // gamma_hat = beta_plus for y_hat > 0, -beta_minus for y_hat < 0.
    if (ys > 0.0)
      sol.gamma_hat.push_back(sol.beta_plus.back());
    else if (ys < 0.0)
      sol.gamma_hat.push_back(-sol.beta_minus.back());
    else
      sol.gamma_hat.push_back(Vector::Zero(dim));
    sol.xi_hat.push_back(problem.x0 == 0.0 ? Vector(Vector::Zero(dim))
                                           : optimal_feedback(problem, k));
  }
  for (int k = 0; k <= n; ++k) sol.P_hat.push_back(sre_solution(problem, k));
  sol.primal_value = 0.5 * sol.P_hat[0] * problem.x0 * problem.x0;
  // Psi* = x0 y_hat + v(0, y_hat) / (2a); the support-function term vanishes
  // because beta_hat stays in the polar cone.
  sol.dual_value =
      problem.x0 * sol.y_hat + dual_value_function(problem, 0, sol.y_hat) / (2.0 * problem.a);
  return sol;
}

HamiltonianMin hamiltonian_min(const ConeQRMProblem& problem, int k, double P,
                               const Vector& lambda, Branch branch) {
  if (!(P > 0.0)) throw std::invalid_argument("hamiltonian_min: P must be positive");
  const Matrix& sigma = problem.market.sigma.at(k);
  Vector theta = market_price_of_risk(problem.market, k);
  const double s = branch == Branch::Plus ? 1.0 : -1.0;
  // substitute w = sigma'v: H = P|w|^2 + 2 s w'(theta P + Lambda)
  Cone image = transform_cone(sigma.transpose(), problem.cone);
  Vector target = -s * (theta * P + lambda) / P;
  Vector w_star = project(image, target);
  Vector v_star = sigma.transpose().fullPivLu().solve(w_star);
  double value = P * w_star.squaredNorm() + 2.0 * s * w_star.dot(theta * P + lambda);
  return {value, v_star};
}

SREResidualReport sre_residual(const ConeQRMProblem& problem, const std::vector<double>& P,
                               const std::vector<Vector>& lambda, Branch branch) {
  const int n = problem.market.grid.n_steps();
  const double dt = problem.market.grid.dt();
  if ((int)P.size() != n + 1)
    throw DimensionMismatch("sre_residual: P table must live on grid points");
  SREResidualReport rep;
  rep.max_residual = 0.0;
  double sq = 0.0;
  for (int k = 0; k < n; ++k) {
    if (!(P[k] > 0.0)) throw std::invalid_argument("sre_residual: P must be positive");
    Vector lam = lambda.empty() ? Vector(Vector::Zero(problem.market.dim)) : lambda.at(k);
    HamiltonianMin hm = hamiltonian_min(problem, k, P[k], lam, branch);
    double res = P[k + 1] - P[k] + (2.0 * problem.market.r[k] * P[k] + hm.value) * dt;
    rep.per_interval.push_back(res);
    rep.max_residual = std::max(rep.max_residual, std::abs(res));
    sq += res * res;
  }
  rep.l2_residual = std::sqrt(sq / n);
  rep.terminal_mismatch = std::abs(P[n] - problem.a);
  return rep;
}

}  // namespace conelq
