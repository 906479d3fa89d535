#include "conelq/market.hpp"

#include <cmath>

#include "conelq/errors.hpp"

namespace conelq {

namespace {

void check_tables(const MarketModel& m) {
  const int n = m.grid.n_steps();
  if ((int)m.r.size() != n || (int)m.b.size() != n || (int)m.sigma.size() != n)
    throw DimensionMismatch("MarketModel: coefficient tables must have one entry per interval");
  for (int k = 0; k < n; ++k) {
    if (m.b[k].size() != m.dim || m.sigma[k].rows() != m.dim || m.sigma[k].cols() != m.dim)
      throw DimensionMismatch("MarketModel: entry dimension mismatch at interval " +
                              std::to_string(k));
    if (!std::isfinite(m.r[k]) || !m.b[k].allFinite() || !m.sigma[k].allFinite())
      throw std::invalid_argument("MarketModel: non-finite coefficient at interval " +
                                  std::to_string(k));
  }
  if (!(m.nondegeneracy_k > 0.0))
    throw std::invalid_argument("MarketModel: nondegeneracy constant must be positive");
}

}  // namespace

MarketModel::MarketModel(TimeGrid grid_, int dim_, std::vector<double> r_, std::vector<Vector> b_,
                         std::vector<Matrix> sigma_, double nondegeneracy_k_)
    : grid(grid_),
      dim(dim_),
      r(std::move(r_)),
      b(std::move(b_)),
      sigma(std::move(sigma_)),
      nondegeneracy_k(nondegeneracy_k_) {
  if (dim < 1) throw std::invalid_argument("MarketModel: dim must be positive");
  check_tables(*this);
}

MarketModel MarketModel::constant(TimeGrid grid, double r, const Vector& b, const Matrix& sigma,
                                  double nondegeneracy_k) {
  const int n = grid.n_steps();
  return MarketModel(grid, (int)b.size(), std::vector<double>(n, r),
                     std::vector<Vector>(n, b), std::vector<Matrix>(n, sigma), nondegeneracy_k);
}

Vector market_price_of_risk(const MarketModel& model, int k) {
  const Matrix& s = model.sigma.at(k);
  Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double smax = svd.singularValues()(0);
  if (smin <= 0.0 || smax / smin > 1e12)
    throw SingularVolatility("market_price_of_risk: sigma ill-conditioned at interval " +
                             std::to_string(k));
  Vector rhs = model.b[k] - Vector::Constant(model.dim, model.r[k]);
  return svd.solve(rhs);
}

NondegeneracyReport validate_nondegeneracy(const MarketModel& model) {
  NondegeneracyReport rep;
  rep.overall_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.grid.n_steps(); ++k) {
    Matrix a = model.sigma[k] * model.sigma[k].transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    double lam = es.eigenvalues()(0);
    rep.min_eigenvalues.push_back(lam);
    rep.overall_min = std::min(rep.overall_min, lam);
  }
  rep.pass = rep.overall_min >= model.nondegeneracy_k;
  return rep;
}

std::vector<double> hat_H_path(const MarketModel& model, const std::vector<Vector>& gamma_hat,
                               const Matrix& noise) {
  const int n = model.grid.n_steps();
  const double dt = model.grid.dt();
  if ((int)gamma_hat.size() != n)
    throw DimensionMismatch("hat_H_path: gamma_hat needs one entry per interval");
  if (noise.rows() != n || noise.cols() != model.dim)
    throw DimensionMismatch("hat_H_path: noise must be n_steps x N");
  std::vector<double> h(n + 1);
  h[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    if (gamma_hat[k].size() != model.dim)
      throw DimensionMismatch("hat_H_path: gamma_hat dimension mismatch");
    Vector theta = market_price_of_risk(model, k);
    Vector loading = model.sigma[k].fullPivLu().solve(gamma_hat[k]) - theta;
    double drift = -model.r[k] - 0.5 * loading.squaredNorm();
    h[k + 1] = h[k] * std::exp(drift * dt + loading.dot(noise.row(k)));
  }
  return h;
}

std::vector<double> state_price_density_path(const MarketModel& model, const Matrix& noise) {
  // Gamma is hat_H with gamma_hat = 0: drift -r - |theta|^2/2, loading -theta.
  std::vector<Vector> zeros(model.grid.n_steps(), Vector::Zero(model.dim));
  return hat_H_path(model, zeros, noise);
}

}  // namespace conelq
