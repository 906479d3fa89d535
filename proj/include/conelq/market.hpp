#pragma once

#include <Eigen/Dense>
#include <vector>

#include "conelq/time_grid.hpp"

namespace conelq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Market coefficients tabulated per grid interval: scalar interest rate r,
/// appreciation rates b, volatility matrix sigma. Immutable after
/// construction and safe to share across threads.
struct MarketModel {
  TimeGrid grid;
  int dim;                         // number of stocks N
  std::vector<double> r;           // one entry per interval
  std::vector<Vector> b;           // one N-vector per interval
  std::vector<Matrix> sigma;       // one NxN matrix per interval
  double nondegeneracy_k;          // lower bound on eigenvalues of sigma*sigma'

  MarketModel(TimeGrid grid_, int dim_, std::vector<double> r_, std::vector<Vector> b_,
              std::vector<Matrix> sigma_, double nondegeneracy_k_);

  /// Constant-coefficient convenience constructor.
  static MarketModel constant(TimeGrid grid, double r, const Vector& b, const Matrix& sigma,
                              double nondegeneracy_k);

  bool deterministic() const { return true; }  // tables are per-interval, not per-path
};

struct NondegeneracyReport {
  std::vector<double> min_eigenvalues;  // smallest eigenvalue of sigma*sigma' per interval
  double overall_min;
  bool pass;
};

/// theta(k) = sigma(k)^{-1} (b(k) - r(k) 1). Throws SingularVolatility if the
/// volatility matrix is numerically singular (condition number above 1e12).
Vector market_price_of_risk(const MarketModel& model, int k);

/// Smallest eigenvalue of sigma sigma' per interval, checked against the
/// model's nondegeneracy constant. Reports failure, never throws.
NondegeneracyReport validate_nondegeneracy(const MarketModel& model);

/// State-price density path on one noise draw, Gamma(0) = 1. Uses the exact
/// exponential (log-Euler) scheme so the martingale property has no
/// discretization bias. `noise` is n_steps x N.
std::vector<double> state_price_density_path(const MarketModel& model, const Matrix& noise);

/// Exponential factor of the optimal dual state: drift -r - |s|^2/2 and
/// diffusion loading s = sigma^{-1} gamma_hat - theta, H(0) = 1.
/// Coincides with the state-price density when gamma_hat = 0.
std::vector<double> hat_H_path(const MarketModel& model, const std::vector<Vector>& gamma_hat,
                               const Matrix& noise);

}  // namespace conelq
