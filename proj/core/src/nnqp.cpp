#include "conetest/nnqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conetest/errors.hpp"

namespace conetest {

namespace {

std::vector<int> to_indices(const std::vector<bool>& free) {
  std::vector<int> out;
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i]) out.push_back(static_cast<int>(i));
  return out;
}

// Minimizer of the quadratic restricted to the free coordinates, zero elsewhere.
Vector solve_on_free(const Matrix& h, const Vector& g,
                     const std::vector<bool>& free) {
  Vector z = Vector::Zero(g.size());
  const auto idx = to_indices(free);
  if (idx.empty()) return z;
  Eigen::LLT<Matrix> llt(h(idx, idx));
  if (llt.info() != Eigen::Success) {
    throw MetricError("quadratic form is not positive definite on a face");
  }
  z(idx) = llt.solve(Vector(-g(idx))).eval();
  return z;
}

}  // namespace

NonnegQpResult solve_nonneg_qp(const Matrix& hessian, const Vector& linear,
                               int max_iterations) {
  const auto m = static_cast<int>(linear.size());
  if (hessian.rows() != m || hessian.cols() != m) {
    throw InputError("QP hessian and linear term dimensions disagree");
  }
  NonnegQpResult res{Vector::Zero(m), linear, std::vector<bool>(m, false), 0};
  if (m == 0) return res;

  Eigen::LLT<Matrix> full(hessian);
  if (full.info() != Eigen::Success) {
    throw MetricError("QP hessian is not positive definite");
  }
  const int cap = max_iterations > 0 ? max_iterations : 10 * m;

  const double scale =
      1.0 + linear.lpNorm<Eigen::Infinity>() +
      hessian.diagonal().cwiseAbs().maxCoeff();
  const double kkt_tol = 1e-13 * scale;

  // Warm start from the sign pattern of the unconstrained minimizer.
  const Vector unconstrained = full.solve(-linear);
  std::vector<bool> free(m);
  for (int i = 0; i < m; ++i) free[i] = unconstrained(i) > 0.0;
  Vector x = Vector::Zero(m);
  {
    const Vector z = solve_on_free(hessian, linear, free);
    bool feasible = true;
    for (int i = 0; i < m; ++i)
      if (free[i] && !(z(i) > 0.0)) feasible = false;
    if (feasible) {
      x = z;
    } else {
      std::fill(free.begin(), free.end(), false);
    }
  }

  int iter = 0;
  double worst = 0.0;
  for (;;) {
    const Vector grad = hessian * x + linear;
    int entering = -1;
    worst = 0.0;
    for (int i = 0; i < m; ++i) {
      if (free[i]) continue;
      if (grad(i) < -kkt_tol && grad(i) < worst) {
        worst = grad(i);
        entering = i;
      }
    }
    if (entering < 0) {
      res.solution = x;
      res.gradient = grad;
      res.free = free;
      res.iterations = iter;
      return res;
    }
    if (iter >= cap) break;
    ++iter;
    free[entering] = true;

    for (int inner = 0; inner <= m; ++inner) {
      const Vector z = solve_on_free(hessian, linear, free);
      double step = 1.0;
      int blocking = -1;
      for (int i = 0; i < m; ++i) {
        if (!free[i] || z(i) > 0.0) continue;
        const double denom = x(i) - z(i);
        const double t = denom > 0.0 ? x(i) / denom : 0.0;
        if (t < step) {
          step = t;
          blocking = i;
        }
      }
      if (blocking < 0) {
        x = z;
        break;
      }
      x += step * (z - x);
      x(blocking) = 0.0;
      free[blocking] = false;
      for (int i = 0; i < m; ++i) {
        if (free[i] && x(i) <= 0.0) {
          x(i) = 0.0;
          free[i] = false;
        }
      }
    }
  }
  throw SolverError("active-set solver did not satisfy KKT conditions within " +
                        std::to_string(cap) + " iterations",
                    iter, -worst);
}

}  // namespace conetest
