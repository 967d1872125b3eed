#pragma once

#include <optional>
#include <string>
#include <variant>

#include "conetest/sample.hpp"

namespace conetest {

/// The positive orthant {theta >= 0} in R^dim.
struct Orthant {
  int dim;
};

/// {theta : theta_coordinate >= 0}; the halfspace alternative uses the last
/// coordinate.
struct CoordinateHalfspace {
  int dim;
  int coordinate;
};

/// {theta : B theta >= 0} for an m x p constraint matrix B of full row rank.
struct Polyhedral {
  Matrix constraints;
};

/// A closed convex cone used as the alternative region.
class ConeSpec {
 public:
  using Variant = std::variant<Orthant, CoordinateHalfspace, Polyhedral>;

  static ConeSpec orthant(int dim);
  static ConeSpec halfspace(int dim, int coordinate);
  /// The halfspace {theta_p >= 0} on the last coordinate.
  static ConeSpec last_coordinate_halfspace(int dim);
  /// Validates that B has full row rank (singular values above 1e-10 of the
  /// largest) and at most as many rows as columns.
  static ConeSpec polyhedral(Matrix constraints);

  int dim() const;
  const Variant& variant() const noexcept { return variant_; }
  bool is_orthant() const noexcept;
  bool is_halfspace() const noexcept;
  bool is_polyhedral() const noexcept;

  /// Membership with an absolute slack on every constraint.
  bool contains(const Vector& theta, double tol = 0.0) const;

  std::string name() const;

 private:
  explicit ConeSpec(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// Projection of x onto a cone in the metric ||z||_M^2 = z' M^{-1} z.
struct MetricProjection {
  Vector point;
  Vector residual;
  double sq_norm_projection = 0.0;
  double sq_norm_residual = 0.0;
  /// Coordinates strictly inside their constraint: the support of the
  /// projection for the orthant, the halfspace branch for the halfspace, and
  /// the non-binding constraints for a polyhedral cone.
  std::optional<SubsetPartition> active_subset;
  int solver_iterations = 0;
};

/// Squared metric norm z' M^{-1} z.
double sq_metric_norm(const Vector& z, const Matrix& metric);

/// Minimizer of (x - theta)' M^{-1} (x - theta) over theta in the cone.
///
/// Orthant and square polyhedral cones go through the active-set solver;
/// the halfspace has a closed form; rectangular polyhedral cones are solved
/// in the dual (multipliers on the constraints). Throws MetricError for a
/// non-positive-definite metric and SolverError on non-convergence.
MetricProjection project(const Vector& x, const Matrix& metric,
                         const ConeSpec& cone);

/// Orthant projection from the unique-subset characterization: the
/// conditional mean on the active subset a, zero on its complement.
MetricProjection project_orthant_by_subsets(const Vector& x,
                                            const Matrix& metric);

/// Membership of w in the polar cone {w : <w, x>_M <= 0 for all x in cone},
/// where <w, x>_M = w' M^{-1} x. Pass the identity for the Euclidean pairing.
bool dual_cone_contains(const Vector& w, const ConeSpec& cone,
                        const Matrix& metric);
bool dual_cone_contains(const Vector& w, const ConeSpec& cone);

/// Data and cone after mapping H0: B1 mu = 0 vs B2 mu >= 0 onto
/// theta = B1 mu, with cone {B theta >= 0}, B = B2 B1' (B1 B1')^{-1}.
struct ReducedModel {
  Matrix data;
  ConeSpec cone;
  Matrix transform;  // B1; reduced rows are transform * x_i
};

ReducedModel reduce_model(const Matrix& b1, const Matrix& b2,
                          const Matrix& data);

}  // namespace conetest
