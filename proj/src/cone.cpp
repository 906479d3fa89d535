#include "conelq/cone.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "conelq/errors.hpp"

namespace conelq {

Cone::Cone(ConeKind kind, int dim, std::vector<Vector> vectors)
    : kind_(kind), dim_(dim), vectors_(std::move(vectors)) {
  if (dim < 1) throw std::invalid_argument("Cone: dim must be positive");
  for (const auto& v : vectors_) {
    if (v.size() != dim) throw DimensionMismatch("Cone: vector dimension mismatch");
    if (!v.allFinite()) throw std::invalid_argument("Cone: non-finite vector");
  }
}

Cone Cone::full_space(int dim) { return Cone(ConeKind::FullSpace, dim, {}); }
Cone Cone::zero(int dim) { return Cone(ConeKind::Zero, dim, {}); }
Cone Cone::nonnegative_orthant(int dim) { return Cone(ConeKind::NonnegativeOrthant, dim, {}); }

Cone Cone::rays(int dim, std::vector<Vector> generators) {
  if (generators.empty()) return zero(dim);
  for (const auto& g : generators)
    if (g.norm() == 0.0) throw std::invalid_argument("Cone: zero ray generator");
  return Cone(ConeKind::RayGenerated, dim, std::move(generators));
}

Cone Cone::halfspaces(int dim, std::vector<Vector> normals) {
  if (normals.empty()) return full_space(dim);
  return Cone(ConeKind::HalfspaceIntersection, dim, std::move(normals));
}

Cone Cone::subspace(int dim, std::vector<Vector> basis) {
  if (basis.empty()) return zero(dim);
  Matrix b(dim, (int)basis.size());
  for (int i = 0; i < (int)basis.size(); ++i) b.col(i) = basis[i];
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  if (qr.rank() < (int)basis.size())
    throw std::invalid_argument("Cone: subspace basis not linearly independent");
  return Cone(ConeKind::Subspace, dim, std::move(basis));
}

namespace {

Matrix stack_rows(const std::vector<Vector>& vs, int dim) {
  Matrix m((int)vs.size(), dim);
  for (int i = 0; i < (int)vs.size(); ++i) m.row(i) = vs[i];
  return m;
}

// Orthonormal basis of the span of the given vectors (thin Q).
Matrix orthonormal_basis(const std::vector<Vector>& basis, int dim) {
  Matrix b(dim, (int)basis.size());
  for (int i = 0; i < (int)basis.size(); ++i) b.col(i) = basis[i];
  Eigen::HouseholderQR<Matrix> qr(b);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, (int)basis.size());
  return q;
}

bool halfspace_feasible(const Matrix& g, const Vector& u, double tol) {
  return ((g * u).array() <= tol).all();
}

// Exhaustive active-set projection onto {u : G u <= 0}: for every subset of
// facets of size <= dim, project x onto the subspace orthogonal to the
// active normals, keep the feasible candidate closest to x. The true
// projection's active set is always among the subsets, so the minimum is
// exact.
Vector project_halfspaces_enumeration(const Matrix& g, const Vector& x, double feas_tol) {
  const int m = (int)g.rows();
  const int dim = (int)x.size();
  double best_dist = std::numeric_limits<double>::infinity();
  Vector best = Vector::Zero(dim);
  bool found = false;
  const int max_active = std::min(m, dim);
  std::vector<int> subset;
  // iterate subsets by bitmask, skipping those larger than max_active
  const std::uint32_t total = 1u << m;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    int popcount = __builtin_popcount(mask);
    if (popcount > max_active) continue;
    Vector u;
    if (mask == 0) {
      u = x;
    } else {
      Matrix ga(popcount, dim);
      int row = 0;
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) ga.row(row++) = g.row(i);
      // u = x - Ga' (Ga Ga')^+ Ga x
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ga * ga.transpose());
      u = x - ga.transpose() * cod.solve(ga * x);
    }
    if (!halfspace_feasible(g, u, feas_tol)) continue;
    double d = (u - x).norm();
    if (d < best_dist) {
      best_dist = d;
      best = u;
      found = true;
    }
  }
  if (!found) throw NonConvergence("project: active-set enumeration found no feasible candidate",
                                   best_dist);
  return best;
}

Vector project_halfspaces_dykstra(const Matrix& g, const Vector& x,
                                  const ProjectionOptions& opts) {
  const int m = (int)g.rows();
  const int dim = (int)x.size();
  std::vector<Vector> corrections(m, Vector::Zero(dim));
  Vector u = x;
  const double scale = 1.0 + x.norm();
  double change = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    change = 0.0;
    for (int i = 0; i < m; ++i) {
      Vector y = u + corrections[i];
      double viol = g.row(i).dot(y);
      Vector next = viol > 0.0 ? Vector(y - (viol / g.row(i).squaredNorm()) * g.row(i).transpose())
                               : y;
      corrections[i] = y - next;
      change += (next - u).norm();
      u = next;
    }
    if (change <= opts.residual_tol * scale) return u;
  }
  throw NonConvergence("project: Dykstra iteration cap reached", change);
}

}  // namespace

Vector project(const Cone& cone, const Vector& x, const ProjectionOptions& opts) {
  if (x.size() != cone.dim()) throw DimensionMismatch("project: point dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("project: non-finite point");
  switch (cone.kind()) {
    case ConeKind::FullSpace:
      return x;
    case ConeKind::Zero:
      return Vector::Zero(cone.dim());
    case ConeKind::NonnegativeOrthant:
      return x.cwiseMax(0.0);
    case ConeKind::Subspace: {
      Matrix q = orthonormal_basis(cone.vectors(), cone.dim());
      return q * (q.transpose() * x);
    }
    case ConeKind::HalfspaceIntersection: {
      Matrix g = stack_rows(cone.vectors(), cone.dim());
      const double feas_tol = 1e-10 * (1.0 + x.norm());
      if (halfspace_feasible(g, x, feas_tol)) return x;
      if ((int)cone.vectors().size() <= opts.active_set_facet_limit)
        return project_halfspaces_enumeration(g, x, feas_tol);
      return project_halfspaces_dykstra(g, x, opts);
    }
    case ConeKind::RayGenerated: {
      // Moreau: P_K x = x - P_{K0} x with K0 = {u : v_i' u <= 0}.
      Cone pol = Cone::halfspaces(cone.dim(), cone.vectors());
      return x - project(pol, x, opts);
    }
  }
  throw std::logic_error("project: unknown cone kind");
}

Cone polar(const Cone& cone) {
  const int n = cone.dim();
  switch (cone.kind()) {
    case ConeKind::FullSpace:
      return Cone::zero(n);
    case ConeKind::Zero:
      return Cone::full_space(n);
    case ConeKind::NonnegativeOrthant: {
      // nonpositive orthant: {beta : e_i' beta <= 0}
      std::vector<Vector> normals;
      for (int i = 0; i < n; ++i) normals.push_back(Vector::Unit(n, i));
      return Cone::halfspaces(n, std::move(normals));
    }
    case ConeKind::RayGenerated:
      if ((int)cone.vectors().size() > 64)
        throw UnsupportedRepresentation("polar: generator count exceeds bound");
      return Cone::halfspaces(n, cone.vectors());
    case ConeKind::HalfspaceIntersection:
      // Farkas: the polar of {x : Gx <= 0} is the cone generated by the
      // normals, exactly and for any normal list.
      if ((int)cone.vectors().size() > 64)
        throw UnsupportedRepresentation("polar: facet count exceeds bound");
      return Cone::rays(n, cone.vectors());
    case ConeKind::Subspace: {
      Matrix b(n, (int)cone.vectors().size());
      for (int i = 0; i < (int)cone.vectors().size(); ++i) b.col(i) = cone.vectors()[i];
      Eigen::FullPivHouseholderQR<Matrix> qr(b);
      Matrix q = qr.matrixQ();
      int rank = (int)cone.vectors().size();
      std::vector<Vector> comp;
      for (int i = rank; i < n; ++i) comp.push_back(q.col(i));
      if (comp.empty()) return Cone::zero(n);
      return Cone::subspace(n, std::move(comp));
    }
  }
  throw std::logic_error("polar: unknown cone kind");
}

Cone transform_cone(const Matrix& a, const Cone& cone) {
  const int n = cone.dim();
  if (a.rows() != n || a.cols() != n) throw DimensionMismatch("transform_cone: map dimension");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw SingularVolatility("transform_cone: map not invertible");
  auto map_all = [&](auto&& f) {
    std::vector<Vector> out;
    out.reserve(cone.vectors().size());
    for (const auto& v : cone.vectors()) out.push_back(f(v));
    return out;
  };
  switch (cone.kind()) {
    case ConeKind::FullSpace:
      return Cone::full_space(n);
    case ConeKind::Zero:
      return Cone::zero(n);
    case ConeKind::NonnegativeOrthant: {
      std::vector<Vector> gens;
      for (int i = 0; i < n; ++i) gens.push_back(a.col(i));
      return Cone::rays(n, std::move(gens));
    }
    case ConeKind::RayGenerated:
      return Cone::rays(n, map_all([&](const Vector& v) { return Vector(a * v); }));
    case ConeKind::HalfspaceIntersection: {
      // {x : g'x <= 0} maps to {y : (A^{-T} g)' y <= 0}
      Eigen::FullPivLU<Matrix> lut(a.transpose());
      return Cone::halfspaces(n, map_all([&](const Vector& g) { return Vector(lut.solve(g)); }));
    }
    case ConeKind::Subspace:
      return Cone::subspace(n, map_all([&](const Vector& v) { return Vector(a * v); }));
  }
  throw std::logic_error("transform_cone: unknown cone kind");
}

bool contains(const Cone& cone, const Vector& x, double tol) {
  return (x - project(cone, x)).norm() <= tol;
}

SupportValue support_function(const Cone& cone, const Vector& beta, double tol) {
  if (contains(polar(cone), beta, tol)) return {true, 0.0};
  return {false, 0.0};
}

std::vector<Vector> sample_cone_points(const Cone& cone, int count, std::uint64_t seed) {
  std::vector<Vector> pts;
  const int n = cone.dim();
  // representative directions first
  switch (cone.kind()) {
    case ConeKind::NonnegativeOrthant:
      for (int i = 0; i < n; ++i) pts.push_back(Vector::Unit(n, i));
      break;
    case ConeKind::RayGenerated:
      for (const auto& g : cone.vectors()) pts.push_back(g.normalized());
      break;
    case ConeKind::Subspace:
      for (const auto& b : cone.vectors()) {
        pts.push_back(b.normalized());
        pts.push_back(-b.normalized());
      }
      break;
    case ConeKind::FullSpace:
      for (int i = 0; i < n; ++i) {
        pts.push_back(Vector::Unit(n, i));
        pts.push_back(-Vector::Unit(n, i));
      }
      break;
    default:
      break;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while ((int)pts.size() < count) {
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
    Vector p = project(cone, z);
    if (p.norm() > 1e-12) pts.push_back(p);
    else if (cone.kind() == ConeKind::Zero) {
      pts.push_back(Vector::Zero(n));
      break;
    }
  }
  return pts;
}

bool normal_cone_check(const Cone& cone, const Vector& x, const Vector& p, double tol,
                       const std::vector<Vector>& test_points) {
  if (!contains(cone, x, std::max(tol, 1e-8)))
    throw InfeasiblePoint("normal_cone_check: point not in cone");
  // cones force complementarity p'x = 0
  if (std::abs(p.dot(x)) > tol * (1.0 + x.norm()) * (1.0 + p.norm())) return false;
  const double scale = 1.0 + x.norm();
  std::vector<double> scales = {1.0, scale, 2.0 * x.norm() + 1.0};
  for (const auto& u : test_points)
    for (double s : scales)
      if (p.dot(s * u - x) > tol * scale * (1.0 + p.norm())) return false;
  if (p.dot(2.0 * x - x) > tol * scale * (1.0 + p.norm())) return false;
  if (p.dot(0.5 * x - x) > tol * scale * (1.0 + p.norm())) return false;
  return true;
}

bool normal_cone_check(const Cone& cone, const Vector& x, const Vector& p, double tol) {
  auto pts = sample_cone_points(cone, 64, 0x9e3779b97f4a7c15ull ^ (std::uint64_t)cone.dim());
  return normal_cone_check(cone, x, p, tol, pts);
}

}  // namespace conelq
