#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "conelq/market.hpp"

namespace conelq {

enum class ConeKind { FullSpace, Zero, NonnegativeOrthant, RayGenerated, HalfspaceIntersection, Subspace };

/// Closed convex cone in R^N. RayGenerated(V) is the set of nonnegative
/// combinations of the generators; HalfspaceIntersection(G) is
/// {x : g_i' x <= 0 for all i}; Subspace(B) is the span of the basis.
/// Immutable; all operations on cones are pure.
class Cone {
 public:
  static Cone full_space(int dim);
  static Cone zero(int dim);
  static Cone nonnegative_orthant(int dim);
  static Cone rays(int dim, std::vector<Vector> generators);
  static Cone halfspaces(int dim, std::vector<Vector> normals);
  static Cone subspace(int dim, std::vector<Vector> basis);

  ConeKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Generators, normals, or basis depending on the variant.
  const std::vector<Vector>& vectors() const { return vectors_; }

 private:
  Cone(ConeKind kind, int dim, std::vector<Vector> vectors);
  ConeKind kind_;
  int dim_;
  std::vector<Vector> vectors_;
};

struct ProjectionOptions {
  int max_iterations = 10000;       // Dykstra cap
  double residual_tol = 1e-10;      // Dykstra stopping residual
  int active_set_facet_limit = 16;  // exhaustive enumeration up to this many facets
  int representation_bound = 64;    // max facets/generators accepted
};

/// Euclidean projection onto the cone. Closed forms for full space, zero,
/// orthant, subspace; exhaustive active-set enumeration for halfspace cones
/// with few facets, Dykstra above the limit; ray cones via the Moreau
/// identity x = P_K x + P_{K0} x.
Vector project(const Cone& cone, const Vector& x, const ProjectionOptions& opts = {});

/// Polar cone {beta : beta' pi <= 0 for all pi in K}.
Cone polar(const Cone& cone);

/// Image A*K of the cone under an invertible linear map.
Cone transform_cone(const Matrix& a, const Cone& cone);

/// distance(x, K) <= tol, computed via project.
bool contains(const Cone& cone, const Vector& x, double tol = 1e-8);

/// Support function of a cone: 0 on the polar cone, +infinity elsewhere.
struct SupportValue {
  bool finite;
  double value;  // 0 when finite
};
SupportValue support_function(const Cone& cone, const Vector& beta, double tol = 1e-8);

/// Deterministic seeded sample of cone members (random ambient points
/// projected onto the cone, plus representative directions).
std::vector<Vector> sample_cone_points(const Cone& cone, int count, std::uint64_t seed);

/// Normal-cone membership p in N_K(x): p'(u - x) <= tol over a test set of
/// cone members, plus the complementarity p'x = 0 forced by the cone
/// structure. Throws InfeasiblePoint if x is not in K.
bool normal_cone_check(const Cone& cone, const Vector& x, const Vector& p, double tol = 1e-7);

/// Same check against a caller-supplied test set (avoids re-sampling in
/// per-path loops).
bool normal_cone_check(const Cone& cone, const Vector& x, const Vector& p, double tol,
                       const std::vector<Vector>& test_points);

}  // namespace conelq
