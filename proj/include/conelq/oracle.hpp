#pragma once

#include <vector>

#include "conelq/cone.hpp"
#include "conelq/conjugates.hpp"
#include "conelq/market.hpp"

namespace conelq {

enum class NoiseModel { Binomial, GaussHermite };

struct DPConfig {
  NoiseModel noise = NoiseModel::Binomial;
  int gh_nodes = 7;

  void validate(int dim) const;
};

struct DPResult {
  std::vector<double> P;         // grid points 0..n_steps, V_k(x) = P_k x^2 / 2
  std::vector<Vector> v_star;    // per-step minimizing proportional direction
};

/// Discrete-time dynamic programming for the cone-constrained quadratic risk
/// minimization value. Exploits quadratic homogeneity V_k(x) = P_k x^2 / 2:
/// P_k = min over v in K of E[P_{k+1} (1 + (r + v' sigma theta) dt +
/// v' sigma dW)^2] under the chosen discrete noise model. Inner minimization
/// is a transformed cone projection followed by an independent local
/// pattern-search refinement on the literal node expectation.
DPResult dp_value_recursion(const MarketModel& market, const Cone& cone, double a,
                            const DPConfig& config = {});

struct SinglePeriodLQ {
  double value;
  Vector pi_star;
};

/// One-period closed form: minimize E[a (x0 + (r x0 + pi' sigma theta) dt +
/// pi' sigma dW)^2 / 2] over pi in K.
SinglePeriodLQ single_period_lq(const MarketModel& market, int k, const Cone& cone, double a,
                                double x0);

struct GridBox {
  double x_lo;
  double x_hi;
  Vector pi_lo;
  Vector pi_hi;
};

/// Brute-force maximization of x alpha + pi'beta - f over a grid intersected
/// with the cone, refined around the incumbent until the requested step is
/// reached. Ray and subspace cones are gridded in their coefficient
/// parameterization so the search never misses the (measure-zero) cone.
double grid_phi(const QuadraticCost& cost, const Cone& cone, int k, double alpha,
                const Vector& beta, const GridBox& box, double step);

}  // namespace conelq
