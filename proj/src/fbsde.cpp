#include "conelq/fbsde.hpp"

#include <cmath>
#include <functional>

#include "conelq/errors.hpp"

namespace conelq {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionMismatch(std::string("fbsde: missing or misshaped field: ") + what);
}

}  // namespace

ConditionReport primal_condition_check(const PathBundle& bundle, const MarketModel& market,
                                       const QuadraticCost& cost, const Cone& cone, double tol) {
  const int n = bundle.grid.n_steps();
  require(bundle.X.rows() == bundle.n_paths && bundle.X.cols() == n + 1, "X");
  require(bundle.p1.rows() == bundle.n_paths, "p1");
  require((int)bundle.q1.size() == bundle.n_paths, "q1");
  require((int)bundle.pi.size() == bundle.n_paths, "pi");

  ConditionReport rep;
  auto samples = sample_cone_points(cone, 64, 0x7c15ull);
  for (int k = 0; k < n; ++k) {
    Vector theta = market_price_of_risk(market, k);
    const Matrix& sigma = market.sigma[k];
    Vector sig_theta = sigma * theta;
    for (int p = 0; p < bundle.n_paths; ++p) {
      Vector pik = bundle.pi[p].row(k).transpose();
      if (!contains(cone, pik, tol * (1.0 + pik.norm())))
        throw InfeasibleControl("primal_condition_check: control leaves the cone");
      Vector g = bundle.p1(p, k) * sig_theta + sigma * bundle.q1[p].row(k).transpose() +
                 cost.S[k] * bundle.X(p, k) + cost.R[k] * pik;
      ++rep.checked;
      if (!normal_cone_check(cone, pik, g, tol, samples)) {
        ++rep.violations;
        rep.worst_margin = std::max(rep.worst_margin, g.norm());
      }
    }
  }
  return rep;
}

DualConditionReport dual_condition_check(const PathBundle& bundle, const MarketModel& market,
                                         const QuadraticCost& cost, const Cone& cone, double x0,
                                         double tol) {
  const int n = bundle.grid.n_steps();
  require(bundle.Y.rows() == bundle.n_paths, "Y");
  require(bundle.p2.rows() == bundle.n_paths, "p2");
  require((int)bundle.q2.size() == bundle.n_paths, "q2");
  require(bundle.alpha.rows() == bundle.n_paths, "alpha");
  require((int)bundle.beta.size() == bundle.n_paths, "beta");

  DualConditionReport rep;
  for (int p = 0; p < bundle.n_paths; ++p) {
    ++rep.initial_wealth.checked;
    double gap = std::abs(bundle.p2(p, 0) - x0);
    if (gap > tol * (1.0 + std::abs(x0))) {
      ++rep.initial_wealth.violations;
      rep.initial_wealth.worst_margin = std::max(rep.initial_wealth.worst_margin, gap);
    }
  }
  for (int k = 0; k < n; ++k) {
    Eigen::FullPivLU<Matrix> sigma_t(market.sigma[k].transpose());
    for (int p = 0; p < bundle.n_paths; ++p) {
      Vector pik = sigma_t.solve(bundle.q2[p].row(k).transpose());
      ++rep.feasibility.checked;
      double dist = (pik - project(cone, pik)).norm();
      if (dist > tol * (1.0 + pik.norm())) {
        ++rep.feasibility.violations;
        rep.feasibility.worst_margin = std::max(rep.feasibility.worst_margin, dist);
      }
      ++rep.subgradient.checked;
      Vector betak = bundle.beta[p].row(k).transpose();
      if (!fenchel_check(cost, cone, k, bundle.alpha(p, k), betak, bundle.p2(p, k), pik, tol)) {
        ++rep.subgradient.violations;
        rep.subgradient.worst_margin = std::max(rep.subgradient.worst_margin, 1.0);
      }
    }
  }
  return rep;
}

namespace {

ResidualReport bsde_residual_impl(const PathBundle& bundle,
                                  const std::function<double(int p, int k)>& drift,
                                  const std::function<const Matrix&(int p)>& q,
                                  const Matrix& state,
                                  const std::function<double(int p)>& terminal_target) {
  const int n = bundle.grid.n_steps();
  const double dt = bundle.grid.dt();
  ResidualReport rep;
  double sq = 0.0;
  long count = 0;
  for (int p = 0; p < bundle.n_paths; ++p) {
    const Matrix& qp = q(p);
    for (int k = 0; k < n; ++k) {
      double res = state(p, k + 1) - state(p, k) - drift(p, k) * dt -
                   qp.row(k).dot(bundle.dW[p].row(k));
      rep.max_residual = std::max(rep.max_residual, std::abs(res));
      sq += res * res;
      ++count;
    }
    rep.terminal_mismatch =
        std::max(rep.terminal_mismatch, std::abs(state(p, n) - terminal_target(p)));
  }
  rep.l2_residual = std::sqrt(sq / std::max<long>(count, 1));
  return rep;
}

}  // namespace

ResidualReport primal_bsde_residual(const PathBundle& bundle, const MarketModel& market,
                                    const QuadraticCost& cost) {
  require(bundle.p1.rows() == bundle.n_paths, "p1");
  require((int)bundle.q1.size() == bundle.n_paths, "q1");
  require((int)bundle.dW.size() == bundle.n_paths, "dW");
  return bsde_residual_impl(
      bundle,
      [&](int p, int k) {
        Vector pik = bundle.pi[p].row(k).transpose();
        return -market.r[k] * bundle.p1(p, k) + cost.Q[k] * bundle.X(p, k) +
               cost.S[k].dot(pik);
      },
      [&](int p) -> const Matrix& { return bundle.q1[p]; }, bundle.p1,
      [&](int p) { return -cost.a * bundle.X(p, bundle.grid.n_steps()) - cost.c; });
}

ResidualReport dual_bsde_residual(const PathBundle& bundle, const MarketModel& market,
                                  const QuadraticCost& cost) {
  require(bundle.p2.rows() == bundle.n_paths, "p2");
  require((int)bundle.q2.size() == bundle.n_paths, "q2");
  require((int)bundle.dW.size() == bundle.n_paths, "dW");
  std::vector<Vector> thetas;
  for (int k = 0; k < bundle.grid.n_steps(); ++k) thetas.push_back(market_price_of_risk(market, k));
  return bsde_residual_impl(
      bundle,
      [&](int p, int k) {
        return market.r[k] * bundle.p2(p, k) +
               bundle.q2[p].row(k).dot(thetas[k]);
      },
      [&](int p) -> const Matrix& { return bundle.q2[p]; }, bundle.p2,
      [&](int p) { return -(bundle.Y(p, bundle.grid.n_steps()) + cost.c) / cost.a; });
}

void dual_to_primal_map(PathBundle& bundle, const MarketModel& market) {
  const int n = bundle.grid.n_steps();
  require(bundle.Y.rows() == bundle.n_paths, "Y");
  require(bundle.p2.rows() == bundle.n_paths, "p2");
  require((int)bundle.q2.size() == bundle.n_paths, "q2");
  require((int)bundle.beta.size() == bundle.n_paths, "beta");
  bundle.X = bundle.p2;
  bundle.p1 = bundle.Y;
  bundle.pi.assign(bundle.n_paths, Matrix::Zero(n, bundle.dim));
  bundle.q1.assign(bundle.n_paths, Matrix::Zero(n, bundle.dim));
  for (int k = 0; k < n; ++k) {
    Eigen::FullPivLU<Matrix> sigma_t(market.sigma[k].transpose());
    Eigen::FullPivLU<Matrix> sigma_lu(market.sigma[k]);
    if (!sigma_lu.isInvertible())
      throw SingularVolatility("dual_to_primal_map: singular volatility");
    Vector theta = market_price_of_risk(market, k);
    for (int p = 0; p < bundle.n_paths; ++p) {
      bundle.pi[p].row(k) = sigma_t.solve(bundle.q2[p].row(k).transpose()).transpose();
      Vector q1k = sigma_lu.solve(bundle.beta[p].row(k).transpose()) - theta * bundle.Y(p, k);
      bundle.q1[p].row(k) = q1k.transpose();
    }
  }
  bundle.x0 = bundle.X(0, 0);
}

void primal_to_dual_map(PathBundle& bundle, const MarketModel& market,
                        const QuadraticCost& cost) {
  const int n = bundle.grid.n_steps();
  require(bundle.X.rows() == bundle.n_paths, "X");
  require(bundle.p1.rows() == bundle.n_paths, "p1");
  require((int)bundle.q1.size() == bundle.n_paths, "q1");
  require((int)bundle.pi.size() == bundle.n_paths, "pi");
  bundle.Y = bundle.p1;
  bundle.p2 = bundle.X;
  bundle.y0 = bundle.p1(0, 0);
  bundle.alpha = Matrix::Zero(bundle.n_paths, n);
  bundle.q2.assign(bundle.n_paths, Matrix::Zero(n, bundle.dim));
  bundle.beta.assign(bundle.n_paths, Matrix::Zero(n, bundle.dim));
  for (int k = 0; k < n; ++k) {
    Vector theta = market_price_of_risk(market, k);
    const Matrix& sigma = market.sigma[k];
    for (int p = 0; p < bundle.n_paths; ++p) {
      Vector pik = bundle.pi[p].row(k).transpose();
      bundle.alpha(p, k) = cost.Q[k] * bundle.X(p, k) + cost.S[k].dot(pik);
      bundle.q2[p].row(k) = (sigma.transpose() * pik).transpose();
      Vector betak =
          sigma * (bundle.q1[p].row(k).transpose() + theta * bundle.p1(p, k));
      bundle.beta[p].row(k) = betak.transpose();
    }
  }
}

}  // namespace conelq
