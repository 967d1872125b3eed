#include "conetest/cone.hpp"

#include <cmath>

#include "conetest/errors.hpp"
#include "conetest/nnqp.hpp"

namespace conetest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kRankTol = 1e-10;

bool full_row_rank(const Matrix& m) {
  if (m.rows() == 0 || m.rows() > m.cols() || !m.allFinite()) return false;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double largest = sv(0);
  return largest > 0.0 && sv(sv.size() - 1) > kRankTol * largest;
}

Eigen::LLT<Matrix> metric_llt(const Matrix& metric, Eigen::Index dim) {
  if (metric.rows() != dim || metric.cols() != dim) {
    throw MetricError("metric dimension does not match the point");
  }
  if (!metric.allFinite() ||
      !metric.isApprox(metric.transpose(), 1e-12 * (1.0 + metric.norm()))) {
    throw MetricError("metric must be a finite symmetric matrix");
  }
  Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1.0 / kConditionCap)) {
    throw MetricError("metric is not positive definite");
  }
  return llt;
}

double quad_inv(const Eigen::LLT<Matrix>& llt, const Vector& z) {
  return z.dot(llt.solve(z));
}

void fill_norms(MetricProjection& out, const Vector& x,
                const Eigen::LLT<Matrix>& llt) {
  out.residual = x - out.point;
  out.sq_norm_projection = std::max(0.0, quad_inv(llt, out.point));
  out.sq_norm_residual = std::max(0.0, quad_inv(llt, out.residual));
}

std::uint32_t mask_of(const std::vector<bool>& flags) {
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) mask |= 1u << i;
  return mask;
}

MetricProjection project_orthant_active_set(const Vector& x,
                                            const Eigen::LLT<Matrix>& llt) {
  const auto p = x.size();
  const Matrix precision = llt.solve(Matrix::Identity(p, p));
  const Vector linear = -(precision * x);
  const auto qp = solve_nonneg_qp(precision, linear);
  MetricProjection out;
  out.point = qp.solution;
  fill_norms(out, x, llt);
  out.active_subset = SubsetPartition(static_cast<int>(p), mask_of(qp.free));
  out.solver_iterations = qp.iterations;
  return out;
}

MetricProjection project_halfspace(const Vector& x, const Matrix& metric,
                                   const Eigen::LLT<Matrix>& llt,
                                   const CoordinateHalfspace& h) {
  const int k = h.coordinate;
  MetricProjection out;
  if (x(k) >= 0.0) {
    out.point = x;
  } else {
    out.point = x - metric.col(k) * (x(k) / metric(k, k));
    out.point(k) = 0.0;
  }
  fill_norms(out, x, llt);
  const auto full = SubsetPartition::full(h.dim).mask();
  out.active_subset =
      x(k) > 0.0 ? SubsetPartition(h.dim, full)
                 : SubsetPartition(h.dim, full & ~(1u << k));
  return out;
}

MetricProjection project_polyhedral(const Vector& x, const Matrix& metric,
                                    const Eigen::LLT<Matrix>& llt,
                                    const Matrix& b) {
  const auto m = b.rows();
  MetricProjection out;
  if (m == b.cols()) {
    // Square B: beta = B theta turns the cone into an orthant with metric
    // B M B'.
    const Matrix reduced_metric = b * metric * b.transpose();
    const auto reduced_llt = metric_llt(0.5 * (reduced_metric + reduced_metric.transpose()), m);
    const auto inner = project_orthant_active_set(b * x, reduced_llt);
    out.point = b.partialPivLu().solve(inner.point);
    out.active_subset = inner.active_subset;
    out.solver_iterations = inner.solver_iterations;
  } else {
    // Dual: theta = x + M B' lambda with lambda >= 0 minimizing
    // 1/2 lambda' B M B' lambda + lambda' B x.
    const Matrix h = b * metric * b.transpose();
    const auto qp = solve_nonneg_qp(0.5 * (h + h.transpose()), b * x);
    out.point = x + metric * (b.transpose() * qp.solution);
    std::vector<bool> slack(m);
    for (Eigen::Index i = 0; i < m; ++i) slack[i] = !qp.free[i];
    out.active_subset = SubsetPartition(static_cast<int>(m), mask_of(slack));
    out.solver_iterations = qp.iterations;
  }
  fill_norms(out, x, llt);
  return out;
}

}  // namespace

ConeSpec ConeSpec::orthant(int dim) {
  if (dim < 1) throw InputError("cone dimension must be positive");
  return ConeSpec(Orthant{dim});
}

ConeSpec ConeSpec::halfspace(int dim, int coordinate) {
  if (dim < 1) throw InputError("cone dimension must be positive");
  if (coordinate < 0 || coordinate >= dim) {
    throw InputError("halfspace coordinate out of range");
  }
  return ConeSpec(CoordinateHalfspace{dim, coordinate});
}

ConeSpec ConeSpec::last_coordinate_halfspace(int dim) {
  return halfspace(dim, dim - 1);
}

ConeSpec ConeSpec::polyhedral(Matrix constraints) {
  if (constraints.rows() > 31) {
    throw InputError("polyhedral cones support at most 31 constraints");
  }
  if (!full_row_rank(constraints)) {
    throw InputError("polyhedral constraint matrix must have full row rank");
  }
  return ConeSpec(Polyhedral{std::move(constraints)});
}

int ConeSpec::dim() const {
  return std::visit(
      overloaded{[](const Orthant& o) { return o.dim; },
                 [](const CoordinateHalfspace& h) { return h.dim; },
                 [](const Polyhedral& p) {
                   return static_cast<int>(p.constraints.cols());
                 }},
      variant_);
}

bool ConeSpec::is_orthant() const noexcept {
  return std::holds_alternative<Orthant>(variant_);
}
bool ConeSpec::is_halfspace() const noexcept {
  return std::holds_alternative<CoordinateHalfspace>(variant_);
}
bool ConeSpec::is_polyhedral() const noexcept {
  return std::holds_alternative<Polyhedral>(variant_);
}

bool ConeSpec::contains(const Vector& theta, double tol) const {
  if (theta.size() != dim()) return false;
  return std::visit(
      overloaded{
          [&](const Orthant&) { return (theta.array() >= -tol).all(); },
          [&](const CoordinateHalfspace& h) {
            return theta(h.coordinate) >= -tol;
          },
          [&](const Polyhedral& p) {
            return ((p.constraints * theta).array() >= -tol).all();
          }},
      variant_);
}

std::string ConeSpec::name() const {
  return std::visit(
      overloaded{[](const Orthant& o) {
                   return "orthant(" + std::to_string(o.dim) + ")";
                 },
                 [](const CoordinateHalfspace& h) {
                   return "halfspace(" + std::to_string(h.dim) + ", " +
                          std::to_string(h.coordinate + 1) + ")";
                 },
                 [](const Polyhedral& p) {
                   return "polyhedral(" + std::to_string(p.constraints.rows()) +
                          "x" + std::to_string(p.constraints.cols()) + ")";
                 }},
      variant_);
}

double sq_metric_norm(const Vector& z, const Matrix& metric) {
  return quad_inv(metric_llt(metric, z.size()), z);
}

MetricProjection project(const Vector& x, const Matrix& metric,
                         const ConeSpec& cone) {
  if (x.size() != cone.dim()) {
    throw InputError("point dimension does not match the cone");
  }
  if (!x.allFinite()) throw InputError("point has non-finite entries");
  const auto llt = metric_llt(metric, x.size());
  return std::visit(
      overloaded{[&](const Orthant&) {
                   return project_orthant_active_set(x, llt);
                 },
                 [&](const CoordinateHalfspace& h) {
                   return project_halfspace(x, metric, llt, h);
                 },
                 [&](const Polyhedral& p) {
                   return project_polyhedral(x, metric, llt, p.constraints);
                 }},
      cone.variant());
}

MetricProjection project_orthant_by_subsets(const Vector& x,
                                            const Matrix& metric) {
  const auto llt = metric_llt(metric, x.size());
  const auto active = active_subset_orthant(x, metric);
  const auto a = active.indices();
  const auto ac = active.complement();

  MetricProjection out;
  out.point = Vector::Zero(x.size());
  out.active_subset = active;
  if (!a.empty()) {
    const auto block = conditional_block(x, metric, active);
    out.point(a) = block.mean_cond;
    Eigen::LLT<Matrix> cond_llt(block.cov_cond);
    out.sq_norm_projection = block.mean_cond.dot(cond_llt.solve(block.mean_cond));
  }
  if (!ac.empty()) {
    Eigen::LLT<Matrix> comp_llt(metric(ac, ac));
    const Vector xc = x(ac);
    out.sq_norm_residual = xc.dot(comp_llt.solve(xc));
  }
  out.residual = x - out.point;
  return out;
}

bool dual_cone_contains(const Vector& w, const ConeSpec& cone,
                        const Matrix& metric) {
  if (w.size() != cone.dim()) {
    throw InputError("vector dimension does not match the cone");
  }
  const auto llt = metric_llt(metric, w.size());
  const Vector u = llt.solve(w);
  const double scale = 1.0 + u.lpNorm<Eigen::Infinity>();
  return std::visit(
      overloaded{
          [&](const Orthant&) { return (u.array() <= 1e-10 * scale).all(); },
          [&](const CoordinateHalfspace& h) {
            for (Eigen::Index j = 0; j < u.size(); ++j) {
              if (j == h.coordinate) continue;
              if (std::abs(u(j)) > 1e-10 * scale) return false;
            }
            return u(h.coordinate) <= 1e-10 * scale;
          },
          [&](const Polyhedral& p) {
            // Farkas: u lies in the polar iff u = -B' lambda for some
            // lambda >= 0; decided by a nonnegative least-squares fit.
            const Matrix& b = p.constraints;
            const auto qp = solve_nonneg_qp(b * b.transpose(), b * u);
            const Vector fit = b.transpose() * qp.solution + u;
            return fit.norm() <= 1e-10 * scale;
          }},
      cone.variant());
}

bool dual_cone_contains(const Vector& w, const ConeSpec& cone) {
  return dual_cone_contains(w, cone, Matrix::Identity(w.size(), w.size()));
}

ReducedModel reduce_model(const Matrix& b1, const Matrix& b2,
                          const Matrix& data) {
  if (b1.cols() != data.cols() || b2.cols() != data.cols()) {
    throw ReductionError("B1, B2 and the data must share the dimension p");
  }
  if (!full_row_rank(b1)) throw ReductionError("B1 is rank deficient");
  if (!full_row_rank(b2)) throw ReductionError("B2 is rank deficient");

  const Matrix gram = b1 * b1.transpose();
  const Matrix b = b2 * b1.transpose() * gram.llt().solve(Matrix::Identity(gram.rows(), gram.cols()));
  try {
    return ReducedModel{data * b1.transpose(), ConeSpec::polyhedral(b), b1};
  } catch (const InputError&) {
    throw ReductionError(
        "reduced constraint matrix B2 B1'(B1 B1')^{-1} is not of full row rank");
  }
}

}  // namespace conetest
