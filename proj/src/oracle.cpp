#include "conelq/oracle.hpp"

#include <cmath>
#include <functional>

#include "conelq/errors.hpp"

namespace conelq {

void DPConfig::validate(int /*dim*/) const {
  if (gh_nodes < 2) throw std::invalid_argument("DPConfig: need at least two quadrature nodes");
}

namespace {

struct NoiseNodes {
  std::vector<Vector> points;   // dW realizations (already scaled by sqrt(dt))
  std::vector<double> weights;  // sum to 1
};

// Gauss-Hermite nodes/weights for the standard normal via Golub-Welsch.
void gauss_hermite_normal(int m, std::vector<double>* nodes, std::vector<double>* weights) {
  Matrix jac = Matrix::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    double off = std::sqrt(i / 2.0);
    jac(i, i - 1) = off;
    jac(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jac);
  nodes->resize(m);
  weights->resize(m);
  for (int i = 0; i < m; ++i) {
    (*nodes)[i] = std::sqrt(2.0) * es.eigenvalues()(i);  // physicists' -> normal
    double v0 = es.eigenvectors()(0, i);
    (*weights)[i] = v0 * v0;  // normalized: weights sum to 1
  }
}

NoiseNodes build_nodes(int dim, double dt, const DPConfig& config) {
  NoiseNodes out;
  const double sd = std::sqrt(dt);
  if (config.noise == NoiseModel::Binomial) {
    const int total = 1 << dim;
    const double w = 1.0 / total;
    for (int mask = 0; mask < total; ++mask) {
      Vector p(dim);
      for (int c = 0; c < dim; ++c) p(c) = (mask & (1 << c)) ? sd : -sd;
      out.points.push_back(p);
      out.weights.push_back(w);
    }
    return out;
  }
  std::vector<double> nodes, weights;
  gauss_hermite_normal(config.gh_nodes, &nodes, &weights);
  std::vector<int> idx(dim, 0);
  while (true) {
    Vector p(dim);
    double w = 1.0;
    for (int c = 0; c < dim; ++c) {
      p(c) = sd * nodes[idx[c]];
      w *= weights[idx[c]];
    }
    out.points.push_back(p);
    out.weights.push_back(w);
    int c = 0;
    while (c < dim && ++idx[c] == config.gh_nodes) idx[c++] = 0;
    if (c == dim) break;
  }
  return out;
}

// E[(1 + (r + v'sigma theta) dt + (sigma'v)'dW)^2] under the discrete model.
double literal_expectation(const Vector& v, double r, const Matrix& sigma, const Vector& theta,
                           double dt, const NoiseNodes& nodes) {
  const double base = 1.0 + (r + v.dot(sigma * theta)) * dt;
  Vector load = sigma.transpose() * v;
  double acc = 0.0;
  for (size_t i = 0; i < nodes.points.size(); ++i) {
    double z = base + load.dot(nodes.points[i]);
    acc += nodes.weights[i] * z * z;
  }
  return acc;
}

// Stage 1 of the inner minimization: with w = sigma'v the second-moment
// objective is w'M w + 2 q'w + const, M = dt I + dt^2 theta theta'. Exact
// minimizer by projecting onto the image cone in whitened coordinates.
Vector projected_minimizer(const Matrix& sigma, const Vector& theta, const Cone& cone, double r,
                           double dt) {
  const int n = (int)theta.size();
  Matrix m = dt * Matrix::Identity(n, n) + dt * dt * theta * theta.transpose();
  Eigen::LLT<Matrix> llt(m);
  Matrix l = llt.matrixL();
  Vector q = (1.0 + r * dt) * dt * theta;
  Cone image = transform_cone(l.transpose() * sigma.transpose(), cone);
  Vector target = -l.triangularView<Eigen::Lower>().solve(q);
  Vector z_star = project(image, target);
  Vector w_star = l.transpose().triangularView<Eigen::Upper>().solve(z_star);
  return sigma.transpose().fullPivLu().solve(w_star);
}

// Stage 2: local pattern search on the literal node expectation, independent
// of the projection formulation.
Vector refine_locally(Vector v, const Cone& cone,
                      const std::function<double(const Vector&)>& objective) {
  double best = objective(v);
  double radius = 1e-3 * (1.0 + v.norm());
  const int n = (int)v.size();
  while (radius > 1e-10) {
    bool improved = false;
    for (int c = 0; c < n; ++c) {
      for (double s : {radius, -radius}) {
        Vector cand = v;
        cand(c) += s;
        cand = project(cone, cand);
        double val = objective(cand);
        if (val < best - 1e-15) {
          best = val;
          v = cand;
          improved = true;
        }
      }
    }
    if (!improved) radius *= 0.5;
  }
  return v;
}

}  // namespace

DPResult dp_value_recursion(const MarketModel& market, const Cone& cone, double a,
                            const DPConfig& config) {
  config.validate(market.dim);
  const int n = market.grid.n_steps();
  const double dt = market.grid.dt();
  DPResult res;
  res.P.assign(n + 1, 0.0);
  res.v_star.assign(n, Vector::Zero(market.dim));
  res.P[n] = a;
  NoiseNodes nodes = build_nodes(market.dim, dt, config);
  for (int k = n - 1; k >= 0; --k) {
    Vector theta = market_price_of_risk(market, k);
    auto objective = [&](const Vector& v) {
      return literal_expectation(v, market.r[k], market.sigma[k], theta, dt, nodes);
    };
    Vector v = projected_minimizer(market.sigma[k], theta, cone, market.r[k], dt);
    v = refine_locally(v, cone, objective);
    res.v_star[k] = v;
    res.P[k] = res.P[k + 1] * objective(v);
  }
  return res;
}

SinglePeriodLQ single_period_lq(const MarketModel& market, int k, const Cone& cone, double a,
                                double x0) {
  const double dt = market.grid.dt();
  const int n = market.dim;
  Vector theta = market_price_of_risk(market, k);
  // quadratic in w = sigma'pi: w'Mw + 2 x0(1+r dt) dt theta'w + x0^2(1+r dt)^2
  Matrix m = dt * Matrix::Identity(n, n) + dt * dt * theta * theta.transpose();
  Eigen::LLT<Matrix> llt(m);
  Matrix l = llt.matrixL();
  Vector q = x0 * (1.0 + market.r[k] * dt) * dt * theta;
  Cone image = transform_cone(l.transpose() * market.sigma[k].transpose(), cone);
  Vector target = -l.triangularView<Eigen::Lower>().solve(q);
  Vector z_star = project(image, target);
  Vector w_star = l.transpose().triangularView<Eigen::Upper>().solve(z_star);
  Vector pi_star = market.sigma[k].transpose().fullPivLu().solve(w_star);
  double base = x0 * (1.0 + market.r[k] * dt);
  double value =
      0.5 * a * (w_star.dot(m * w_star) + 2.0 * q.dot(w_star) + base * base);
  return {value, pi_star};
}

namespace {

// Coefficient parameterization of the grid: maps a parameter vector to a
// cone member (or rejects it for halfspace cones).
struct GridParam {
  int n_params;
  std::function<bool(const Vector& params, Vector* pi)> to_point;
  Vector lo;
  Vector hi;
};

GridParam make_param(const Cone& cone, const GridBox& box) {
  const int n = cone.dim();
  GridParam gp;
  switch (cone.kind()) {
    case ConeKind::Zero:
      gp.n_params = 0;
      gp.to_point = [n](const Vector&, Vector* pi) {
        *pi = Vector::Zero(n);
        return true;
      };
      return gp;
    case ConeKind::FullSpace:
      gp.n_params = n;
      gp.lo = box.pi_lo;
      gp.hi = box.pi_hi;
      gp.to_point = [](const Vector& p, Vector* pi) {
        *pi = p;
        return true;
      };
      return gp;
    case ConeKind::NonnegativeOrthant:
      gp.n_params = n;
      gp.lo = box.pi_lo.cwiseMax(0.0);
      gp.hi = box.pi_hi.cwiseMax(0.0);
      gp.to_point = [](const Vector& p, Vector* pi) {
        *pi = p;
        return true;
      };
      return gp;
    case ConeKind::HalfspaceIntersection: {
      gp.n_params = n;
      gp.lo = box.pi_lo;
      gp.hi = box.pi_hi;
      std::vector<Vector> normals = cone.vectors();
      gp.to_point = [normals](const Vector& p, Vector* pi) {
        for (const auto& g : normals)
          if (g.dot(p) > 1e-9 * (1.0 + p.norm())) return false;
        *pi = p;
        return true;
      };
      return gp;
    }
    case ConeKind::RayGenerated: {
      const auto gens = cone.vectors();
      gp.n_params = (int)gens.size();
      double span = std::max(box.pi_hi.cwiseAbs().maxCoeff(), box.pi_lo.cwiseAbs().maxCoeff());
      gp.lo = Vector::Zero(gp.n_params);
      gp.hi = Vector::Constant(gp.n_params, span);
      gp.to_point = [gens, n](const Vector& lam, Vector* pi) {
        Vector acc = Vector::Zero(n);
        for (int i = 0; i < (int)gens.size(); ++i) acc += lam(i) * gens[i].normalized();
        *pi = acc;
        return true;
      };
      return gp;
    }
    case ConeKind::Subspace: {
      const auto basis = cone.vectors();
      gp.n_params = (int)basis.size();
      double span = std::max(box.pi_hi.cwiseAbs().maxCoeff(), box.pi_lo.cwiseAbs().maxCoeff());
      gp.lo = Vector::Constant(gp.n_params, -span);
      gp.hi = Vector::Constant(gp.n_params, span);
      gp.to_point = [basis, n](const Vector& lam, Vector* pi) {
        Vector acc = Vector::Zero(n);
        for (int i = 0; i < (int)basis.size(); ++i) acc += lam(i) * basis[i].normalized();
        *pi = acc;
        return true;
      };
      return gp;
    }
  }
  throw std::logic_error("grid_phi: unknown cone kind");
}

// Best x on a refined 1-D grid for fixed pi.
double best_x_value(const QuadraticCost& cost, int k, double alpha, const Vector& beta,
                    const Vector& pi, double x_lo, double x_hi, double step) {
  double lo = x_lo, hi = x_hi;
  double best = -std::numeric_limits<double>::infinity();
  double best_x = 0.5 * (lo + hi);
  const int pts = 41;
  while (true) {
    double h = (hi - lo) / (pts - 1);
    for (int i = 0; i < pts; ++i) {
      double x = lo + i * h;
      double val = x * alpha + pi.dot(beta) - running_cost(cost, k, x, pi);
      if (val > best) {
        best = val;
        best_x = x;
      }
    }
    if (h <= step) return best;
    double span = 2.0 * h;
    lo = std::max(x_lo, best_x - span);
    hi = std::min(x_hi, best_x + span);
  }
}

}  // namespace

double grid_phi(const QuadraticCost& cost, const Cone& cone, int k, double alpha,
                const Vector& beta, const GridBox& box, double step) {
  GridParam gp = make_param(cone, box);
  if (gp.n_params == 0) {
    Vector pi;
    gp.to_point(Vector(), &pi);
    return best_x_value(cost, k, alpha, beta, pi, box.x_lo, box.x_hi, step);
  }
  Vector lo = gp.lo, hi = gp.hi;
  const int pts = 11;
  double best = -std::numeric_limits<double>::infinity();
  Vector best_p = 0.5 * (lo + hi);
  while (true) {
    double max_h = 0.0;
    std::vector<int> idx(gp.n_params, 0);
    Vector h(gp.n_params);
    for (int c = 0; c < gp.n_params; ++c) {
      h(c) = (hi(c) - lo(c)) / (pts - 1);
      max_h = std::max(max_h, h(c));
    }
    while (true) {
      Vector p(gp.n_params);
      for (int c = 0; c < gp.n_params; ++c) p(c) = lo(c) + idx[c] * h(c);
      Vector pi;
      if (gp.to_point(p, &pi)) {
        double val = best_x_value(cost, k, alpha, beta, pi, box.x_lo, box.x_hi, step);
        if (val > best) {
          best = val;
          best_p = p;
        }
      }
      int c = 0;
      while (c < gp.n_params && ++idx[c] == pts) idx[c++] = 0;
      if (c == gp.n_params) break;
    }
    if (max_h <= step) return best;
    for (int c = 0; c < gp.n_params; ++c) {
      double span = 2.0 * h(c);
      lo(c) = std::max(gp.lo(c), best_p(c) - span);
      hi(c) = std::min(gp.hi(c), best_p(c) + span);
    }
  }
}

}  // namespace conelq
