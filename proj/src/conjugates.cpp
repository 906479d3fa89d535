#include "conelq/conjugates.hpp"

#include <cmath>

#include "conelq/errors.hpp"

namespace conelq {

QuadraticCost QuadraticCost::constant(const TimeGrid& grid, double q, const Vector& s,
                                      const Matrix& r, double a, double c) {
  const int n = grid.n_steps();
  QuadraticCost cost{std::vector<double>(n, q), std::vector<Vector>(n, s),
                     std::vector<Matrix>(n, r), a, c};
  cost.validate(grid, (int)s.size());
  return cost;
}

QuadraticCost QuadraticCost::zero_running(const TimeGrid& grid, int dim, double a, double c) {
  return constant(grid, 0.0, Vector::Zero(dim), Matrix::Zero(dim, dim), a, c);
}

void QuadraticCost::validate(const TimeGrid& grid, int dim) const {
  const int n = grid.n_steps();
  if ((int)Q.size() != n || (int)S.size() != n || (int)R.size() != n)
    throw DimensionMismatch("QuadraticCost: tables must have one entry per interval");
  if (!(a > 0.0)) throw NonpositiveA("QuadraticCost: terminal weight a must be positive");
  for (int k = 0; k < n; ++k) {
    if (S[k].size() != dim || R[k].rows() != dim || R[k].cols() != dim)
      throw DimensionMismatch("QuadraticCost: entry dimension mismatch");
    if ((R[k] - R[k].transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("QuadraticCost: R must be symmetric");
    Matrix block(dim + 1, dim + 1);
    block(0, 0) = Q[k];
    block.block(0, 1, 1, dim) = S[k].transpose();
    block.block(1, 0, dim, 1) = S[k];
    block.block(1, 1, dim, dim) = R[k];
    Eigen::SelfAdjointEigenSolver<Matrix> es(block, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-10)
      throw std::invalid_argument("QuadraticCost: [[Q,S'],[S,R]] not positive semidefinite");
  }
}

double running_cost(const QuadraticCost& cost, int k, double x, const Vector& pi) {
  return 0.5 * (cost.Q.at(k) * x * x + 2.0 * cost.S.at(k).dot(pi) * x +
                pi.dot(cost.R.at(k) * pi));
}

double terminal_cost(const QuadraticCost& cost, double x) {
  return 0.5 * (cost.a * x * x + 2.0 * cost.c * x);
}

double m_T(const QuadraticCost& cost, double y) {
  if (!(cost.a > 0.0)) throw NonpositiveA("m_T: a must be positive");
  const double z = y + cost.c;
  return z * z / (2.0 * cost.a);
}

double m_0(double x0, double y) { return x0 * y; }

namespace {

struct ReducedQuadratic {
  // maximize h(pi) = const_term + g'pi - pi'A pi / 2 over K
  Matrix a;      // PSD curvature
  Vector g_lin;  // gradient at pi = 0
  double c0;     // constant term
  // x recovery: x*(pi) = (alpha - S'pi)/Q when q_positive
  bool q_positive;
};

double reduced_value(const ReducedQuadratic& rq, const Vector& pi) {
  return rq.c0 + rq.g_lin.dot(pi) - 0.5 * pi.dot(rq.a * pi);
}

Vector reduced_gradient(const ReducedQuadratic& rq, const Vector& pi) {
  return rq.g_lin - rq.a * pi;
}

// Unbounded iff some feasible direction d in K with A d = 0 has positive
// slope g'd; the slope along a curvature-null direction is position
// independent.
bool detect_unbounded(const ReducedQuadratic& rq, const Cone& cone, double scale) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rq.a);
  const int n = (int)rq.a.rows();
  const double lam_max = std::max(es.eigenvalues()(n - 1), 1.0);
  const double null_tol = 1e-11 * lam_max;
  Matrix null_basis(n, 0);
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) <= null_tol) {
      null_basis.conservativeResize(n, null_basis.cols() + 1);
      null_basis.col(null_basis.cols() - 1) = es.eigenvectors().col(i);
    }
  }
  if (null_basis.cols() == 0) return false;
  const double slope_tol = 1e-9 * scale;
  std::vector<Vector> candidates;
  for (int i = 0; i < null_basis.cols(); ++i) {
    candidates.push_back(null_basis.col(i));
    candidates.push_back(-null_basis.col(i));
  }
  Vector g_null = null_basis * (null_basis.transpose() * rq.g_lin);
  if (g_null.norm() > 0) candidates.push_back(g_null.normalized());
  for (const auto& d0 : candidates) {
    Vector d = project(cone, d0);
    if (d.norm() < 1e-12) continue;
    d.normalize();
    if ((rq.a * d).norm() <= 1e-8 * lam_max && rq.g_lin.dot(d) > slope_tol) return true;
  }
  return false;
}

// Projected-gradient ascent with Armijo backtracking on the reduced concave
// quadratic. Returns false (non-convergence) only when the iteration cap is
// hit with a large prox residual.
Vector ascend(const ReducedQuadratic& rq, const Cone& cone, const PhiOptions& opts,
              bool* converged, double* final_residual) {
  const int n = (int)rq.a.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rq.a, Eigen::EigenvaluesOnly);
  const double lam_max = std::max(es.eigenvalues()(n - 1), 1e-12);
  double step = 1.0 / lam_max;
  Vector pi = project(cone, Vector::Zero(n));
  const double scale = 1.0 + rq.g_lin.norm();
  double residual = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vector grad = reduced_gradient(rq, pi);
    Vector cand = project(cone, pi + step * grad);
    residual = (cand - pi).norm() / step;
    if (residual <= opts.gradient_tol * scale) {
      *converged = true;
      *final_residual = residual;
      return cand;
    }
    // step = 1/lambda_max keeps the projected step monotone for a quadratic,
    // so the full step is always taken
    pi = cand;
  }
  *converged = false;
  *final_residual = residual;
  return pi;
}

}  // namespace

PhiResult phi(const QuadraticCost& cost, const Cone& cone, int k, double alpha,
              const Vector& beta, const PhiOptions& opts) {
  const int n = cone.dim();
  const double q = cost.Q.at(k);
  const Vector& s = cost.S.at(k);
  const Matrix& r = cost.R.at(k);
  const double data_scale = 1.0 + std::abs(alpha) + beta.norm();

  const bool q_zero = std::abs(q) <= opts.zero_tol;
  const bool s_zero = s.norm() <= opts.zero_tol;
  const bool r_zero = r.cwiseAbs().maxCoeff() <= opts.zero_tol;

  if (q_zero && s_zero && r_zero) {
    // support-function regime: f = 0, sup over x of x*alpha forces alpha = 0
    if (std::abs(alpha) > 1e-12 * data_scale) return {false, 0.0, 0.0, Vector::Zero(n)};
    SupportValue sv = support_function(cone, beta);
    if (!sv.finite) return {false, 0.0, 0.0, Vector::Zero(n)};
    return {true, 0.0, 0.0, Vector::Zero(n)};
  }

  ReducedQuadratic rq;
  if (!q_zero) {
    // eliminate x: x*(pi) = (alpha - S'pi)/Q
    rq.a = r - s * s.transpose() / q;
    rq.g_lin = beta - (alpha / q) * s;
    rq.c0 = 0.5 * alpha * alpha / q;
    rq.q_positive = true;
  } else if (s_zero) {
    // Q = 0, S = 0, R != 0: alpha must vanish
    if (std::abs(alpha) > 1e-12 * data_scale) return {false, 0.0, 0.0, Vector::Zero(n)};
    rq.a = r;
    rq.g_lin = beta;
    rq.c0 = 0.0;
    rq.q_positive = false;
  } else {
    // Q = 0 with S != 0 (mixed degenerate case): finite only when alpha is
    // attainable as S'pi on K. Solved by quadratic-penalty continuation;
    // divergence is reported as unbounded.
    double rho = 1e2;
    Vector pi = Vector::Zero(n);
    for (int round = 0; round < 6; ++round, rho *= 100.0) {
      ReducedQuadratic pen;
      pen.a = r + rho * s * s.transpose();
      pen.g_lin = beta + rho * alpha * s;
      pen.c0 = -0.5 * rho * alpha * alpha;
      pen.q_positive = false;
      if (detect_unbounded(pen, cone, data_scale)) return {false, 0.0, 0.0, Vector::Zero(n)};
      bool conv = false;
      double res = 0.0;
      pi = ascend(pen, cone, opts, &conv, &res);
      if (pi.norm() > 1e8) return {false, 0.0, 0.0, Vector::Zero(n)};
    }
    if (std::abs(s.dot(pi) - alpha) > 1e-5 * data_scale)
      return {false, 0.0, 0.0, Vector::Zero(n)};
    double value = pi.dot(beta) - 0.5 * pi.dot(r * pi);
    return {true, value, 0.0, pi};
  }

  if (detect_unbounded(rq, cone, data_scale)) return {false, 0.0, 0.0, Vector::Zero(n)};

  bool converged = false;
  double residual = 0.0;
  Vector pi_star = ascend(rq, cone, opts, &converged, &residual);
  if (!converged) throw NonConvergence("phi: projected-gradient ascent did not converge", residual);
  double x_star = rq.q_positive ? (alpha - s.dot(pi_star)) / q : 0.0;
  double value = reduced_value(rq, pi_star);
  return {true, value, x_star, pi_star};
}

bool fenchel_check(const QuadraticCost& cost, const Cone& cone, int k, double alpha,
                   const Vector& beta, double x, const Vector& pi, double tol,
                   const PhiOptions& opts) {
  PhiResult p = phi(cost, cone, k, alpha, beta, opts);
  if (!p.finite) return false;
  double gap = p.value + running_cost(cost, k, x, pi) - x * alpha - pi.dot(beta);
  return gap <= tol;
}

}  // namespace conelq
