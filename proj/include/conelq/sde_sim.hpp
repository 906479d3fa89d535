#pragma once

#include <cstdint>
#include <vector>

#include "conelq/cone.hpp"
#include "conelq/conjugates.hpp"
#include "conelq/market.hpp"

namespace conelq {

enum class Scheme { Euler, ExactExponential };

struct SimConfig {
  int n_paths = 10000;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::ExactExponential;
  bool antithetic = false;

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard error of the mean
};

/// i.i.d. N(0, dt) increments, one matrix (n_steps x N) per path.
/// Counter-based keying makes the draw for (path, step, component) a pure
/// function of the seed; antithetic pairs (2i, 2i+1) sum to zero exactly.
std::vector<Matrix> simulate_brownian(const SimConfig& config, const TimeGrid& grid, int dim);

/// Wealth paths for an open-loop control table (Euler scheme).
Matrix simulate_wealth_open_loop(const MarketModel& market, const std::vector<Vector>& pi,
                                 double x0, const std::vector<Matrix>& noise);

/// Wealth paths for a proportional feedback table pi = xi * X. Exact
/// exponential scheme by default, Euler available for convergence studies.
Matrix simulate_wealth_feedback(const MarketModel& market, const std::vector<Vector>& xi,
                                double x0, const std::vector<Matrix>& noise, Scheme scheme);

/// Dual state paths for open-loop controls (alpha, beta); Euler scheme.
Matrix simulate_dual_open_loop(const MarketModel& market, double y0,
                               const std::vector<double>& alpha, const std::vector<Vector>& beta,
                               const std::vector<Matrix>& noise);

/// Dual state with proportional loading: dY = -rY dt + eta'Y dW (the alpha=0,
/// beta = gamma Y case). Exact exponential or Euler.
Matrix simulate_dual_proportional(const MarketModel& market, double y0,
                                  const std::vector<Vector>& eta,
                                  const std::vector<Matrix>& noise, Scheme scheme);

/// J estimate: trapezoid-in-time running cost plus terminal cost, averaged
/// over paths.
Estimate estimate_primal_cost(const Matrix& x_paths, const std::vector<Vector>& pi,
                              const QuadraticCost& cost, const TimeGrid& grid);

/// Dual objective for deterministic open-loop controls:
/// x0 y0 + E[m_T(Y(T))] + sum_k phi(k, alpha_k, beta_k) dt. Throws
/// InfeasibleDualControl when phi is infinite on some interval.
Estimate estimate_dual_cost(double x0, double y0, const Matrix& y_paths,
                            const std::vector<double>& alpha, const std::vector<Vector>& beta,
                            const QuadraticCost& cost, const Cone& cone, const TimeGrid& grid);

/// Dual objective for the adapted control beta = gamma * Y with alpha = 0
/// (the cone case): the phi term is exactly zero when sign(y0) gamma_k stays
/// in the polar cone, checked once per interval.
Estimate estimate_dual_cost_proportional(double x0, double y0, const Matrix& y_paths,
                                         const std::vector<Vector>& gamma,
                                         const QuadraticCost& cost, const Cone& cone,
                                         const TimeGrid& grid);

struct GapEstimate {
  double gap = 0.0;
  double stderr_ = 0.0;
};

/// gap = J + Psi with combined standard error; weak duality asserts
/// gap >= -4 stderr for any feasible pair.
GapEstimate duality_gap(const Estimate& primal, const Estimate& dual);

}  // namespace conelq
