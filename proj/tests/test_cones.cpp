#include <doctest.h>

#include <cmath>
#include <random>

#include "conelq/cone.hpp"
#include "conelq/errors.hpp"

using namespace conelq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out((int)v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::mt19937_64& gen() {
  static std::mt19937_64 g(2024);
  return g;
}

Vector random_vector(int dim, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = scale * nd(gen());
  return v;
}

Cone random_cone(int dim) {
  std::uniform_int_distribution<int> pick(0, 5);
  switch (pick(gen())) {
    case 0: return Cone::full_space(dim);
    case 1: return Cone::zero(dim);
    case 2: return Cone::nonnegative_orthant(dim);
    case 3: {
      int m = 1 + (int)(gen()() % dim);
      std::vector<Vector> rays;
      for (int i = 0; i < m; ++i) rays.push_back(random_vector(dim));
      return Cone::rays(dim, rays);
    }
    case 4: {
      int m = 1 + (int)(gen()() % dim);
      std::vector<Vector> normals;
      for (int i = 0; i < m; ++i) normals.push_back(random_vector(dim));
      return Cone::halfspaces(dim, normals);
    }
    default: {
      int m = 1 + (int)(gen()() % dim);
      Matrix q = Matrix::Random(dim, dim);
      Eigen::HouseholderQR<Matrix> qr(q);
      Matrix orth = qr.householderQ();
      std::vector<Vector> basis;
      for (int i = 0; i < m; ++i) basis.push_back(orth.col(i));
      return Cone::subspace(dim, basis);
    }
  }
}

// Independent oracle for halfspace-cone projection: for every subset of
// facets, solve the equality-constrained least squares, keep the feasible
// candidate closest to x.
Vector active_set_oracle(const std::vector<Vector>& normals, const Vector& x) {
  const int m = (int)normals.size();
  const int dim = (int)x.size();
  Vector best = Vector::Zero(dim);
  double best_d2 = x.squaredNorm();  // the origin is always feasible
  for (int mask = 1; mask < (1 << m); ++mask) {
    int count = __builtin_popcount(mask);
    Matrix g(count, dim);
    int row = 0;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) g.row(row++) = normals[i].transpose();
    // candidate = x - G'(GG')^+ G x (projection onto the null space of G)
    Matrix gram = g * g.transpose();
    Vector u = x - g.transpose() * gram.completeOrthogonalDecomposition().solve(g * x);
    bool feasible = true;
    for (const auto& n : normals)
      if (n.dot(u) > 1e-9 * (1.0 + u.norm())) feasible = false;
    if (!feasible) continue;
    double d2 = (u - x).squaredNorm();
    if (d2 < best_d2 - 1e-14) {
      best_d2 = d2;
      best = u;
    }
  }
  // also the unconstrained candidate (no active facet)
  bool x_feasible = true;
  for (const auto& n : normals)
    if (n.dot(x) > 1e-9 * (1.0 + x.norm())) x_feasible = false;
  if (x_feasible) return x;
  return best;
}

}  // namespace

TEST_CASE("polar of the extreme cones") {
  Cone full = Cone::full_space(3);
  Cone z = polar(full);
  CHECK(z.kind() == ConeKind::Zero);
  CHECK(polar(z).kind() == ConeKind::FullSpace);
}

TEST_CASE("polar of the orthant is the nonpositive orthant") {
  Cone k = Cone::nonnegative_orthant(2);
  Cone p = polar(k);
  CHECK(contains(p, vec({-1.0, -2.0})));
  CHECK(contains(p, vec({0.0, 0.0})));
  CHECK_FALSE(contains(p, vec({0.1, -1.0}), 1e-6));
}

TEST_CASE("polar of a single ray is its halfspace") {
  Cone k = Cone::rays(2, {vec({1.0, 1.0})});
  Cone p = polar(k);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 1000; ++i) {
    Vector beta = random_vector(2, 2.0);
    bool in_polar = contains(p, beta, 1e-8);
    bool ineq = beta(0) + beta(1) <= 1e-8;
    CHECK(in_polar == ineq);
  }
}

TEST_CASE("project: orthant componentwise clamp") {
  Cone k = Cone::nonnegative_orthant(2);
  Vector r = project(k, vec({1.0, -2.0}));
  CHECK(r(0) == doctest::Approx(1.0));
  CHECK(r(1) == doctest::Approx(0.0));
}

TEST_CASE("project: single ray") {
  Cone k = Cone::rays(2, {vec({1.0, 0.0})});
  Vector r = project(k, vec({3.0, 4.0}));
  CHECK(r(0) == doctest::Approx(3.0));
  CHECK(r(1) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("project matches the exhaustive active-set oracle on halfspace cones") {
  std::uniform_int_distribution<int> dims(1, 4);
  for (int trial = 0; trial < 2000; ++trial) {
    int dim = dims(gen());
    int m = 1 + (int)(gen()() % (dim + 1));
    std::vector<Vector> normals;
    for (int i = 0; i < m; ++i) normals.push_back(random_vector(dim));
    Cone k = Cone::halfspaces(dim, normals);
    Vector x = random_vector(dim, 3.0);
    Vector mine = project(k, x);
    Vector oracle = active_set_oracle(normals, x);
    CHECK((mine - oracle).norm() <= 1e-8 * (1.0 + x.norm()));
  }
}

TEST_CASE("projection optimality system holds") {
  for (int trial = 0; trial < 300; ++trial) {
    int dim = 1 + (int)(gen()() % 4);
    Cone k = random_cone(dim);
    Vector x = random_vector(dim, 2.0);
    Vector px = project(k, x);
    double tol = 1e-9 * (1.0 + x.norm());
    CHECK(std::fabs((x - px).dot(px)) <= 10 * tol);
    for (const Vector& u : sample_cone_points(k, 16, 99 + trial))
      CHECK((x - px).dot(u) <= 10 * tol * (1.0 + u.norm()));
  }
}

TEST_CASE("contains: zero belongs to every cone; near-miss rejected") {
  for (int trial = 0; trial < 50; ++trial) {
    int dim = 1 + (int)(gen()() % 4);
    Cone k = random_cone(dim);
    CHECK(contains(k, Vector::Zero(dim)));
  }
  CHECK_FALSE(contains(Cone::nonnegative_orthant(2), vec({-1e-3, 1.0}), 1e-6));
}

TEST_CASE("contains agrees with the H-representation inequalities") {
  for (int trial = 0; trial < 2000; ++trial) {
    int dim = 1 + (int)(gen()() % 4);
    int m = 1 + (int)(gen()() % dim);
    std::vector<Vector> normals;
    for (int i = 0; i < m; ++i) normals.push_back(random_vector(dim));
    Cone k = Cone::halfspaces(dim, normals);
    Vector x = random_vector(dim, 2.0);
    bool direct = true;
    for (const auto& n : normals)
      if (n.dot(x) > 1e-10) direct = false;
    // skip points within tolerance of a facet (both answers defensible)
    bool near_boundary = false;
    for (const auto& n : normals)
      if (std::fabs(n.dot(x)) < 1e-6 * n.norm()) near_boundary = true;
    if (near_boundary) continue;
    CHECK(contains(k, x, 1e-7) == direct);
  }
}

TEST_CASE("support_function on cones") {
  Cone full = Cone::full_space(2);
  CHECK(support_function(full, vec({0.0, 0.0})).finite);
  CHECK_FALSE(support_function(full, vec({1.0, 0.0})).finite);
  SupportValue s = support_function(Cone::nonnegative_orthant(2), vec({-1.0, -2.0}));
  CHECK(s.finite);
  CHECK(s.value == 0.0);
}

TEST_CASE("support_function finite exactly on the polar cone") {
  for (int trial = 0; trial < 500; ++trial) {
    int dim = 1 + (int)(gen()() % 4);
    Cone k = random_cone(dim);
    Cone p = polar(k);
    Vector beta = random_vector(dim, 2.0);
    double d = (beta - project(p, beta)).norm();
    if (d < 1e-6) continue;  // skip ambiguous boundary cases
    CHECK(support_function(k, beta).finite == contains(p, beta, 1e-8));
  }
}

TEST_CASE("normal_cone_check: full space admits only p = 0") {
  Cone k = Cone::full_space(2);
  Vector x = vec({0.3, -0.7});
  CHECK(normal_cone_check(k, x, vec({0.0, 0.0})));
  CHECK_FALSE(normal_cone_check(k, x, vec({0.1, 0.0})));
}

TEST_CASE("normal_cone_check: orthant boundary example") {
  Cone k = Cone::nonnegative_orthant(2);
  CHECK(normal_cone_check(k, vec({0.0, 1.0}), vec({-1.0, 0.0})));
  CHECK_FALSE(normal_cone_check(k, vec({0.0, 1.0}), vec({0.0, -1.0})));
  CHECK_THROWS_AS(normal_cone_check(k, vec({-1.0, 0.0}), vec({0.0, 0.0})), InfeasiblePoint);
}

TEST_CASE("normal_cone_check vs facet-wise oracle on halfspace cones") {
  // For x in K with active facets A = {i : g_i'x = 0}, N_K(x) is the cone
  // generated by {g_i : i in A}.
  for (int trial = 0; trial < 300; ++trial) {
    int dim = 2 + (int)(gen()() % 3);
    int m = 1 + (int)(gen()() % 2);
    std::vector<Vector> normals;
    for (int i = 0; i < m; ++i) normals.push_back(random_vector(dim).normalized());
    Cone k = Cone::halfspaces(dim, normals);
    Vector x = project(k, random_vector(dim, 2.0));
    std::vector<Vector> active;
    for (const auto& n : normals)
      if (std::fabs(n.dot(x)) <= 1e-9 * (1.0 + x.norm())) active.push_back(n);
    // nonnegative combination of active normals must pass
    Vector p = Vector::Zero(dim);
    std::uniform_real_distribution<double> ur(0.1, 2.0);
    for (const auto& n : active) p += ur(gen()) * n;
    CHECK(normal_cone_check(k, x, p, 1e-7));
    if (!active.empty()) {
      // the inward-pointing facet normal cannot be normal unless the cone
      // degenerates; require a strongly violating feasible direction first
      Vector g = active.front();
      Vector witness = project(k, -g);
      if (g.dot(witness) < -0.1) CHECK_FALSE(normal_cone_check(k, x, -g, 1e-7));
    } else if (x.norm() > 0.5) {
      // interior point: complementarity p'x = 0 rejects anything aligned
      // with x
      CHECK_FALSE(normal_cone_check(k, x, x / x.norm(), 1e-7));
    }
  }
}

TEST_CASE("projection properties: idempotence, nonexpansiveness, Moreau, homogeneity") {
  for (int trial = 0; trial < 2000; ++trial) {
    int dim = 1 + (int)(gen()() % 4);
    Cone k = random_cone(dim);
    Vector x = random_vector(dim, 2.0);
    Vector y = random_vector(dim, 2.0);
    Vector px = project(k, x), py = project(k, y);
    CHECK((project(k, px) - px).norm() <= 1e-10 * (1.0 + px.norm()));
    CHECK((px - py).norm() <= (x - y).norm() + 1e-10);
    Vector pp = project(polar(k), x);
    CHECK((x - px - pp).norm() <= 1e-8 * (1.0 + x.norm()));
    CHECK(std::fabs(px.dot(pp)) <= 1e-8 * (1.0 + x.squaredNorm()));
    double lam = 0.25 + (trial % 7);
    CHECK((project(k, lam * x) - lam * px).norm() <= 1e-8 * (1.0 + lam * x.norm()));
  }
}

TEST_CASE("double polar recovers the cone (sampled both directions)") {
  for (int trial = 0; trial < 200; ++trial) {
    int dim = 1 + (int)(gen()() % 3);
    Cone k = random_cone(dim);
    Cone kk = polar(polar(k));
    for (const Vector& u : sample_cone_points(k, 8, 1000 + trial))
      CHECK(contains(kk, u, 1e-6 * (1.0 + u.norm())));
    for (const Vector& u : sample_cone_points(kk, 8, 2000 + trial))
      CHECK(contains(k, u, 1e-6 * (1.0 + u.norm())));
  }
}

TEST_CASE("cone invariants: zero membership and positive homogeneity of samples") {
  for (int trial = 0; trial < 100; ++trial) {
    int dim = 1 + (int)(gen()() % 4);
    Cone k = random_cone(dim);
    for (const Vector& u : sample_cone_points(k, 6, 3000 + trial)) {
      CHECK(contains(k, 2.5 * u, 1e-6 * (1.0 + u.norm())));
      CHECK(contains(k, 0.3 * u, 1e-6 * (1.0 + u.norm())));
    }
  }
}
