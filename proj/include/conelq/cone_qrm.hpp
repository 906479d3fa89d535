#pragma once

#include <vector>

#include "conelq/cone.hpp"
#include "conelq/market.hpp"

namespace conelq {

/// Cone-constrained quadratic risk minimization with deterministic
/// coefficients: minimize E[a X(T)^2 / 2] over portfolios constrained to a
/// closed convex cone K.
struct ConeQRMProblem {
  MarketModel market;
  Cone cone;
  double a;   // terminal weight, positive
  double x0;  // initial wealth

  ConeQRMProblem(MarketModel market_, Cone cone_, double a_, double x0_);
};

enum class Branch { Plus, Minus };

/// Closed-form solution bundle. All tables have one entry per interval
/// except P_hat, which lives on grid points.
struct ConeQRMSolution {
  double y_hat;
  std::vector<Vector> beta_plus;
  std::vector<Vector> beta_minus;
  std::vector<Vector> sigma_field;  // evaluated at y = y_hat sign
  std::vector<Vector> eta;          // signed dual volatility at y_hat
  std::vector<Vector> beta_hat;
  std::vector<Vector> gamma_hat;    // beta_hat / Y ratio
  std::vector<Vector> xi_hat;       // proportional feedback, pi = xi * X
  std::vector<double> P_hat;        // grid points 0..n_steps
  double primal_value;              // J*
  double dual_value;                // Psi*
};

/// beta_{+/-}(k) = argmin over the polar cone of |sigma^{-1} beta -/+ theta|^2,
/// computed by projecting +/-theta onto sigma^{-1} K0.
Vector beta_branch(const ConeQRMProblem& problem, int k, Branch branch);

/// Optimal dual diffusion magnitude field: sigma^{-1} beta_+ - theta for
/// y > 0, sigma^{-1} beta_- + theta for y < 0, zero at y = 0. Depends on y
/// only through its sign.
Vector sigma_field(const ConeQRMProblem& problem, int k, double y);

/// Sign-resolved loading of dY/Y for the optimal dual state:
/// eta(k, y) = sign(y) * sigma_field(k, y).
Vector signed_dual_volatility(const ConeQRMProblem& problem, int k, double y);

/// v(t, y) = y^2 exp(sum over intervals >= t of (-2r + |sigma_field|^2) dt).
double dual_value_function(const ConeQRMProblem& problem, int t_index, double y);

/// y_hat = -a x0 exp(int (2r - |sigma_field(., -x0)|^2)).
double optimal_y(const ConeQRMProblem& problem);

/// The optimal dual control's printed closed form; always in the polar cone.
Vector optimal_beta(const ConeQRMProblem& problem, int k);

/// P_hat at grid point k: a exp(int_t^T (2r - |sigma_field(., -x0)|^2)).
double sre_solution(const ConeQRMProblem& problem, int k);

/// xi_hat(k) = [sigma']^{-1} eta(k, y_hat); pi_hat = xi_hat * X. Throws
/// ZeroInitialWealth when x0 = 0 (the optimal portfolio is identically 0).
Vector optimal_feedback(const ConeQRMProblem& problem, int k);

/// Assembles the full closed-form solution bundle.
ConeQRMSolution solve(const ConeQRMProblem& problem);

struct HamiltonianMin {
  double value;      // H*
  Vector minimizer;  // v*
};

/// Exact minimization of the branch Hamiltonian
/// H_+(v) = v'P sigma sigma' v + 2 v'[sigma theta P + sigma Lambda] (minus
/// branch flips the linear term) over v in K, via w = sigma'v and cone
/// projection.
HamiltonianMin hamiltonian_min(const ConeQRMProblem& problem, int k, double P,
                               const Vector& lambda, Branch branch);

struct SREResidualReport {
  std::vector<double> per_interval;
  double max_residual;
  double l2_residual;        // RMS over intervals
  double terminal_mismatch;  // |P(T) - a|
};

/// Per-interval residual of the extended SRE for a candidate P table on grid
/// points (deterministic mode: Lambda = 0, no noise term).
SREResidualReport sre_residual(const ConeQRMProblem& problem, const std::vector<double>& P,
                               const std::vector<Vector>& lambda, Branch branch);

}  // namespace conelq
