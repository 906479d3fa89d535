#pragma once

#include <vector>

#include "conelq/cone.hpp"
#include "conelq/conjugates.hpp"
#include "conelq/market.hpp"

namespace conelq {

/// Simulated path bundle on a grid: Brownian increments plus primal state X,
/// dual state Y, adjoint pairs (p1, q1) and (p2, q2), and control paths.
/// Scalar paths are n_paths x (n_steps + 1); vector paths are stored one
/// matrix (n_steps x N) per path. Empty containers mean "not populated".
struct PathBundle {
  TimeGrid grid;
  int n_paths = 0;
  int dim = 0;
  double x0 = 0.0;
  double y0 = 0.0;

  std::vector<Matrix> dW;    // per path, n_steps x N
  Matrix X;                  // n_paths x (n_steps+1)
  Matrix Y;
  Matrix p1;
  Matrix p2;
  std::vector<Matrix> q1;    // per path, n_steps x N
  std::vector<Matrix> q2;
  std::vector<Matrix> pi;
  std::vector<Matrix> beta;
  Matrix alpha;              // n_paths x n_steps

  explicit PathBundle(TimeGrid grid_, int n_paths_, int dim_)
      : grid(grid_), n_paths(n_paths_), dim(dim_) {}
};

struct ConditionReport {
  long checked = 0;
  long violations = 0;
  double worst_margin = 0.0;  // largest violation magnitude observed
  bool pass() const { return violations == 0; }
};

struct DualConditionReport {
  ConditionReport initial_wealth;   // p2(0) = x0
  ConditionReport feasibility;      // [sigma']^{-1} q2 in K
  ConditionReport subgradient;      // Fenchel-Young equality
  bool pass() const {
    return initial_wealth.pass() && feasibility.pass() && subgradient.pass();
  }
};

struct ResidualReport {
  double max_residual = 0.0;
  double l2_residual = 0.0;        // RMS over (path, interval)
  double terminal_mismatch = 0.0;  // max over paths
};

/// Primal maximum-principle optimality: the gradient expression
/// G = p1 sigma theta + sigma q1 + S X + R pi must lie in the normal cone of
/// K at pi on every (path, interval). Throws InfeasibleControl when pi
/// leaves K beyond tol.
ConditionReport primal_condition_check(const PathBundle& bundle, const MarketModel& market,
                                       const QuadraticCost& cost, const Cone& cone, double tol);

/// Dual maximum-principle optimality: p2(0) = x0, [sigma']^{-1} q2 in K, and the
/// Fenchel-Young subgradient equality at (alpha, beta).
DualConditionReport dual_condition_check(const PathBundle& bundle, const MarketModel& market,
                                         const QuadraticCost& cost, const Cone& cone, double x0,
                                         double tol);

/// Euler residual of the primal adjoint BSDE:
/// p1(k+1) - p1(k) - [-r p1 + Q X + S'pi] dt - q1' dW, plus terminal
/// mismatch |p1(T) + a X(T) + c|.
ResidualReport primal_bsde_residual(const PathBundle& bundle, const MarketModel& market,
                                    const QuadraticCost& cost);

/// Euler residual of the dual adjoint BSDE:
/// p2(k+1) - p2(k) - [r p2 + q2'theta] dt - q2' dW, terminal
/// |p2(T) + (Y(T) + c)/a|.
ResidualReport dual_bsde_residual(const PathBundle& bundle, const MarketModel& market,
                                  const QuadraticCost& cost);

/// Dual-to-primal bijection: fills (pi, X, p1, q1) pointwise from
/// (Y, p2, q2, beta).
void dual_to_primal_map(PathBundle& bundle, const MarketModel& market);

/// Primal-to-dual bijection: fills (y0, alpha, beta, Y, p2, q2) pointwise from
/// (X, pi, p1, q1).
void primal_to_dual_map(PathBundle& bundle, const MarketModel& market, const QuadraticCost& cost);

}  // namespace conelq
