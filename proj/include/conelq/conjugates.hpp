#pragma once

#include <Eigen/Dense>
#include <vector>

#include "conelq/cone.hpp"
#include "conelq/market.hpp"
#include "conelq/time_grid.hpp"

namespace conelq {

/// Running cost data f = (Q x^2 + 2 S'x pi + pi'R pi)/2 per interval and
/// terminal cost g = (a x^2 + 2 c x)/2. The stacked [[Q, S'],[S, R]] block
/// must be positive semidefinite on every interval and a must be positive.
struct QuadraticCost {
  std::vector<double> Q;
  std::vector<Vector> S;
  std::vector<Matrix> R;
  double a;
  double c;

  static QuadraticCost constant(const TimeGrid& grid, double q, const Vector& s, const Matrix& r,
                                double a, double c);
  static QuadraticCost zero_running(const TimeGrid& grid, int dim, double a, double c);

  /// Checks symmetry of R, semidefiniteness of the block matrix, a > 0.
  void validate(const TimeGrid& grid, int dim) const;
};

double running_cost(const QuadraticCost& cost, int k, double x, const Vector& pi);
double terminal_cost(const QuadraticCost& cost, double x);

/// Conjugate of the terminal cost: m_T(y) = (y + c)^2 / (2a).
double m_T(const QuadraticCost& cost, double y);

/// Conjugate of the initial-point indicator: m_0(y) = x0 * y.
double m_0(double x0, double y);

struct PhiResult {
  bool finite;
  double value;    // valid when finite
  double x_star;   // argmax (valid when finite)
  Vector pi_star;  // argmax (valid when finite)
};

struct PhiOptions {
  int max_iterations = 100000;
  double gradient_tol = 1e-10;
  double zero_tol = 1e-12;  // threshold for treating cost entries / alpha as zero
};

/// phi(alpha, beta) = sup over x in R, pi in K of x alpha + pi'beta - f.
/// Dispatches on the cost data: support-function regime when Q = S = R = 0,
/// x-elimination plus projected-gradient ascent when Q > 0, degenerate
/// handling otherwise. Unboundedness is reported as a flag, never as a
/// large float.
PhiResult phi(const QuadraticCost& cost, const Cone& cone, int k, double alpha,
              const Vector& beta, const PhiOptions& opts = {});

/// Fenchel-Young equality check: phi(alpha, beta) + f(x, pi) - x alpha -
/// pi'beta <= tol. Characterizes subgradient membership for the conjugate
/// pair. False when phi is infinite.
bool fenchel_check(const QuadraticCost& cost, const Cone& cone, int k, double alpha,
                   const Vector& beta, double x, const Vector& pi, double tol,
                   const PhiOptions& opts = {});

}  // namespace conelq
