#include <gtest/gtest.h>

#include <conetest/cone.hpp>
#include <conetest/errors.hpp>
#include <conetest/nnqp.hpp>

#include "test_support.hpp"

using namespace conetest;
using conetest::testing::random_matrix;
using conetest::testing::brute_force_orthant;
using conetest::testing::random_spd;

namespace {

void expect_moreau(const Vector& x, const Matrix& m, const ConeSpec& cone) {
  const auto pr = project(x, m, cone);
  const double total = sq_metric_norm(x, m);
  EXPECT_NEAR(pr.sq_norm_projection + pr.sq_norm_residual, total, 1e-9 * std::max(1.0, total));
  const double inner = pr.point.dot(m.ldlt().solve(pr.residual));
  EXPECT_NEAR(inner, 0.0, 1e-9 * std::max(1.0, total));
  EXPECT_TRUE(cone.contains(pr.point, 1e-9));
  EXPECT_TRUE(dual_cone_contains(pr.residual, cone, m));
  EXPECT_LE(pr.sq_norm_projection, total * (1 + 1e-12) + 1e-12);
}

}  // namespace

TEST(Project, InteriorPointIsFixed) {
  Vector x(2);
  x << 1, 2;
  const auto pr = project(x, Matrix::Identity(2, 2), ConeSpec::orthant(2));
  EXPECT_EQ(pr.point, x);
  EXPECT_NEAR(pr.sq_norm_projection, 5.0, 1e-14);
}

TEST(Project, PolarPointGoesToOrigin) {
  Vector x(2);
  x << -1, -3;
  const auto pr = project(x, Matrix::Identity(2, 2), ConeSpec::orthant(2));
  EXPECT_TRUE(pr.point.isZero(0.0));
  EXPECT_EQ(pr.sq_norm_projection, 0.0);
}

TEST(Project, OrthantMatchesSubsetFormulaAndExhaustiveKkt) {
  Rng rng(101);
  for (int p = 2; p <= 6; ++p) {
    for (int rep = 0; rep < 200; ++rep) {
      const Matrix m = random_spd(rng, p);
      Vector x(p);
      for (int i = 0; i < p; ++i) x(i) = 2.0 * rng.normal();
      const auto active = project(x, m, ConeSpec::orthant(p));
      const auto subset = project_orthant_by_subsets(x, m);
      Vector oracle_point;
      const double oracle_res = brute_force_orthant(x, m, &oracle_point);
      const double total = sq_metric_norm(x, m);
      const double oracle = total - oracle_res;
      const double scale = std::max(1.0, total);
      EXPECT_NEAR(active.sq_norm_projection, oracle, 1e-8 * scale);
      EXPECT_NEAR(subset.sq_norm_projection, oracle, 1e-8 * scale);
      EXPECT_LT((active.point - oracle_point).norm(), 1e-7 * std::max(1.0, x.norm()));
      ASSERT_TRUE(active.active_subset.has_value());
      EXPECT_EQ(*active.active_subset, *subset.active_subset);
    }
  }
}

TEST(Project, MoreauDecompositionOnEveryConeKind) {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 2 + rep % 4;
    const Matrix m = random_spd(rng, p);
    Vector x(p);
    for (int i = 0; i < p; ++i) x(i) = rng.normal();
    expect_moreau(x, m, ConeSpec::orthant(p));
    expect_moreau(x, m, ConeSpec::last_coordinate_halfspace(p));
    expect_moreau(x, m, ConeSpec::polyhedral(random_matrix(rng, p, p)));
    expect_moreau(x, m, ConeSpec::polyhedral(random_matrix(rng, p - 1, p)));
    expect_moreau(x, m, ConeSpec::polyhedral(random_matrix(rng, 1, p)));
  }
}

TEST(Project, Idempotent) {
  Rng rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix m = random_spd(rng, 4);
    Vector x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.normal();
    for (const auto& cone : {ConeSpec::orthant(4), ConeSpec::last_coordinate_halfspace(4)}) {
      const auto once = project(x, m, cone);
      const auto twice = project(once.point, m, cone);
      EXPECT_LT((twice.point - once.point).norm(), 1e-9 * std::max(1.0, once.point.norm()));
    }
  }
}

TEST(Project, HalfspaceNormDominatesOrthantNorm) {
  Rng rng(13);
  for (int rep = 0; rep < 500; ++rep) {
    const int p = 2 + rep % 5;
    const Matrix m = random_spd(rng, p);
    Vector x(p);
    for (int i = 0; i < p; ++i) x(i) = rng.normal();
    const double orth = project(x, m, ConeSpec::orthant(p)).sq_norm_projection;
    const double half = project(x, m, ConeSpec::last_coordinate_halfspace(p)).sq_norm_projection;
    EXPECT_LE(orth, half + 1e-10 * std::max(1.0, half));
  }
}

TEST(Project, RejectsIndefiniteMetric) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_THROW(project(Vector::Ones(2), m, ConeSpec::orthant(2)), MetricError);
}

TEST(DualCone, OrthantCases) {
  Vector w(2);
  w << -1, -1;
  EXPECT_TRUE(dual_cone_contains(w, ConeSpec::orthant(2)));
  w << -1, 1;
  EXPECT_FALSE(dual_cone_contains(w, ConeSpec::orthant(2)));
}

TEST(DualCone, SumHalfspaceAgainstSampledSupport) {
  const int p = 3;
  const ConeSpec cone = ConeSpec::polyhedral(Matrix::Ones(1, p));
  EXPECT_TRUE(dual_cone_contains(Vector::Constant(p, -0.7), cone));
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    Vector w(p);
    for (int i = 0; i < p; ++i) w(i) = rng.normal();
    EXPECT_FALSE(dual_cone_contains(w, cone));
    // Some sampled cone point must have a positive inner product with w.
    bool found = false;
    for (int k = 0; k < 2000 && !found; ++k) {
      Vector x(p);
      for (int i = 0; i < p; ++i) x(i) = rng.normal();
      if (x.sum() < 0) x = -x;
      found = w.dot(x) > 0;
    }
    EXPECT_TRUE(found);
  }
}

TEST(DualCone, UnboundedUnderScaling) {
  Vector w(3);
  w << -1, -2, -0.5;
  EXPECT_TRUE(dual_cone_contains(1e6 * w, ConeSpec::orthant(3)));
}

TEST(Boundedness, EllipsoidContainsNoRay) {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix m = random_spd(rng, 3);
    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.normal();
    x *= 0.1;
    if (sq_metric_norm(x, m) > 1.0) continue;
    EXPECT_GT(sq_metric_norm(1e6 * x, m), 1.0);
  }
}

TEST(ConeSpecTest, RankDeficientPolyhedralIsRejected) {
  Matrix b(2, 3);
  b << 1, 2, 3, 2, 4, 6;
  EXPECT_THROW(ConeSpec::polyhedral(b), InputError);
  EXPECT_THROW(ConeSpec::polyhedral(Matrix::Ones(4, 3)), InputError);
}

TEST(ReduceModel, IdentityReduction) {
  Rng rng(1);
  const Matrix x = random_matrix(rng, 10, 3);
  const auto r = reduce_model(Matrix::Identity(3, 3), Matrix::Identity(3, 3), x);
  EXPECT_LT((r.data - x).norm(), 1e-14);
  const auto& b = std::get<Polyhedral>(r.cone.variant()).constraints;
  EXPECT_LT((b - Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(ReduceModel, OrthonormalRowsSimplify) {
  Rng rng(2);
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(rng, 3, 3)).householderQ();
  const Matrix b1 = q.topRows(2);
  const Matrix b2 = random_matrix(rng, 2, 3);
  const auto r = reduce_model(b1, b2, random_matrix(rng, 5, 3));
  const auto& b = std::get<Polyhedral>(r.cone.variant()).constraints;
  EXPECT_LT((b - b2 * b1.transpose()).norm(), 1e-12);
}

TEST(ReduceModel, NullMeanMapsToZeroAndIsLinear) {
  Rng rng(3);
  const Matrix b1 = random_matrix(rng, 2, 3);
  const Matrix b2 = random_matrix(rng, 2, 3);
  Eigen::FullPivLU<Matrix> lu(b1);
  const Vector mu = lu.kernel().col(0);
  const Matrix rows = mu.transpose().replicate(4, 1);
  EXPECT_LT(reduce_model(b1, b2, rows).data.norm(), 1e-12);

  const Matrix x = random_matrix(rng, 6, 3);
  const auto y = reduce_model(b1, b2, x).data;
  const auto y3 = reduce_model(b1, b2, 3.0 * x).data;
  EXPECT_LT((y3 - 3.0 * y).norm(), 1e-12 * y.norm());
}

TEST(ReduceModel, RankDeficientInputFails) {
  Matrix b1(2, 3);
  b1 << 1, 0, 0, 2, 0, 0;
  EXPECT_THROW(reduce_model(b1, Matrix::Identity(2, 3), Matrix::Ones(4, 3)), ReductionError);
}

TEST(NonnegQp, MatchesExhaustiveSearchAndKkt) {
  Rng rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    const int p = 1 + rep % 6;
    const Matrix h = random_spd(rng, p);
    Vector g(p);
    for (int i = 0; i < p; ++i) g(i) = rng.normal();
    const auto res = solve_nonneg_qp(h, g);
    // Same problem as projecting x = -H^{-1} g in the metric H^{-1}.
    const Vector x = -h.ldlt().solve(g);
    Vector oracle;
    brute_force_orthant(x, h.inverse(), &oracle);
    EXPECT_LT((res.solution - oracle).norm(), 1e-8 * std::max(1.0, oracle.norm()));
    for (int i = 0; i < p; ++i) {
      EXPECT_GE(res.solution(i), 0.0);
      EXPECT_GE(res.gradient(i), -1e-9);
      EXPECT_NEAR(res.solution(i) * res.gradient(i), 0.0, 1e-9);
    }
  }
}
