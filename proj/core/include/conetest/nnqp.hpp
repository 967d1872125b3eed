#pragma once

#include <vector>

#include "conetest/sample.hpp"

namespace conetest {

/// Result of minimizing 1/2 z'Hz + g'z subject to z >= 0.
struct NonnegQpResult {
  Vector solution;
  Vector gradient;          // H z + g; the KKT multipliers on the bound set
  std::vector<bool> free;   // coordinates with z_i > 0
  int iterations;
};

/// Primal active-set solver (Lawson-Hanson style) for a strictly convex
/// quadratic over the nonnegative orthant.
///
/// The free set starts from the sign pattern of the unconstrained minimizer;
/// each outer iteration frees the bound coordinate with the most negative
/// multiplier and inner steps drop coordinates that would turn negative.
/// Throws SolverError when `max_iterations` outer iterations (default 10 * dim)
/// pass without meeting the KKT conditions, and MetricError when H is not
/// positive definite.
NonnegQpResult solve_nonneg_qp(const Matrix& hessian, const Vector& linear,
                               int max_iterations = -1);

}  // namespace conetest
