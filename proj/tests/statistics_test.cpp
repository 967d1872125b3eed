#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>

#include <conetest/calibration.hpp>
#include <conetest/cone.hpp>
#include <conetest/errors.hpp>
#include <conetest/statistics.hpp>

#include "test_support.hpp"

using namespace conetest;
using conetest::testing::random_matrix;
using conetest::testing::random_spd;
using conetest::testing::random_summary;

TEST(HotellingT2, UnivariateIsSquaredT) {
  Rng rng(1);
  const Matrix x = random_matrix(rng, 12, 1);
  const auto s = summarize(x);
  const double t = std::sqrt(12.0) * s.mean(0) / std::sqrt(s.cov(0, 0));
  EXPECT_NEAR(hotelling_t2(s).statistic, t * t, 1e-12 * t * t);
}

TEST(HotellingT2, ZeroMean) {
  EXPECT_EQ(hotelling_t2(make_summary(10, Vector::Zero(3), Matrix::Identity(3, 3))).statistic, 0.0);
}

TEST(HotellingT2, EqualsFullSpaceProjectionNorm) {
  Rng rng(2);
  const auto s = random_summary(rng, 15, 3);
  const Vector x = std::sqrt(15.0) * s.mean;
  EXPECT_NEAR(hotelling_t2(s).statistic, sq_metric_norm(x, s.cov), 1e-12 * sq_metric_norm(x, s.cov));
}

TEST(OrthantStatistics, EmptyAndFullActiveSets) {
  Vector m(2);
  m << -1, -0.5;
  const auto neg = make_summary(10, m, Matrix::Identity(2, 2));
  EXPECT_EQ(lrt_orthant(neg).statistic, 0.0);
  EXPECT_EQ(uit_orthant(neg).statistic, 0.0);
  EXPECT_TRUE(uit_orthant(neg).active_subset->is_empty());

  Rng rng(3);
  const Matrix s = random_spd(rng, 2);
  m << 0.8, 0.6;
  // Make sure the full set is the active one.
  const auto pos = make_summary(10, s * m, s);
  const double t2 = hotelling_t2(pos).statistic;
  EXPECT_NEAR(uit_orthant(pos).statistic, t2, 1e-10 * t2);
  EXPECT_NEAR(lrt_orthant(pos).statistic, t2, 1e-10 * t2);
}

TEST(OrthantStatistics, PolarCaseGivesZero) {
  Rng rng(4);
  const Matrix s = random_spd(rng, 3);
  const Vector m = s * Vector::Constant(3, -1.0);
  EXPECT_EQ(uit_orthant(make_summary(8, m, s)).statistic, 0.0);
}

TEST(OrthantStatistics, SubsetFormulaAgreesWithProjection) {
  Rng rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto s = random_summary(rng, 20, 3);
    const double u_sub = uit_orthant(s, Route::subset_formula).statistic;
    const double u_proj = uit_orthant(s, Route::projection).statistic;
    const double l_sub = lrt_orthant(s, Route::subset_formula).statistic;
    const double l_proj = lrt_orthant(s, Route::projection).statistic;
    EXPECT_NEAR(u_sub, u_proj, 1e-8 * std::max(1.0, u_proj));
    EXPECT_NEAR(l_sub, l_proj, 1e-8 * std::max(1.0, l_proj));
    const double direct = project(std::sqrt(20.0) * s.mean, s.cov, ConeSpec::orthant(3)).sq_norm_projection;
    EXPECT_NEAR(u_proj, direct, 1e-10 * std::max(1.0, direct));
    EXPECT_NO_THROW(uit_orthant(s, Route::cross_check));
  }
}

TEST(HalfspaceStatistics, PositiveLastCoordinateGivesT2) {
  Vector m(3);
  m << -2, 1, 0.5;
  Rng rng(6);
  const auto s = make_summary(12, m, random_spd(rng, 3));
  const double t2 = hotelling_t2(s).statistic;
  EXPECT_NEAR(uit_halfspace(s).statistic, t2, 1e-12 * t2);
  EXPECT_NEAR(lrt_halfspace(s).statistic, t2, 1e-12 * t2);
}

TEST(HalfspaceStatistics, UnivariateNonpositiveMean) {
  Vector m(1);
  m << -0.3;
  const auto s = make_summary(9, m, Matrix::Identity(1, 1));
  EXPECT_EQ(uit_halfspace(s).statistic, 0.0);
  EXPECT_EQ(lrt_halfspace(s).statistic, 0.0);
}

TEST(Ordering, ChainAndDominationOnEveryDraw) {
  Rng rng(7);
  for (int rep = 0; rep < 2000; ++rep) {
    const int p = 1 + rep % 5;
    const auto s = random_summary(rng, p + 6, p);
    const auto all = compute_all(s);
    const double tol = 1e-10 * std::max(1.0, all.t2);
    EXPECT_GE(all.lrt_orthant, 0.0);
    EXPECT_LE(all.lrt_orthant, all.uit_orthant + tol);
    EXPECT_LE(all.uit_orthant, all.t2 + tol);
    EXPECT_LE(all.lrt_halfspace, all.uit_halfspace + tol);
    EXPECT_LE(all.uit_halfspace, all.t2 + tol);
    EXPECT_GE(all.uit_halfspace + tol, all.uit_orthant);
    EXPECT_GE(all.lrt_halfspace + tol, all.lrt_orthant);
    EXPECT_NEAR(all.uit_orthant, uit_orthant(s).statistic, tol);
    EXPECT_NEAR(all.lrt_halfspace, lrt_halfspace(s).statistic, tol);
  }
}

TEST(Invariance, PositiveDiagonalScaling) {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix x = random_matrix(rng, 15, 3) + Matrix::Constant(15, 3, 0.2);
    Vector d(3);
    for (int i = 0; i < 3; ++i) d(i) = 0.2 + 5.0 * rng.uniform();
    const Matrix y = x * d.asDiagonal();
    const auto a = compute_all(summarize(x));
    const auto b = compute_all(summarize(y));
    EXPECT_NEAR(a.t2, b.t2, 1e-9 * std::max(1.0, a.t2));
    EXPECT_NEAR(a.uit_orthant, b.uit_orthant, 1e-9 * std::max(1.0, a.t2));
    EXPECT_NEAR(a.lrt_orthant, b.lrt_orthant, 1e-9 * std::max(1.0, a.t2));
  }
}

TEST(Fuit, UnivariateIsOneSidedT) {
  Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = summarize(random_matrix(rng, 10, 1) + Matrix::Constant(10, 1, 0.4));
    const auto r = fuit(s, 0.05);
    const double t = std::sqrt(10.0) * s.mean(0) / std::sqrt(s.cov(0, 0));
    const boost::math::students_t dist(9.0);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.05));
    EXPECT_NEAR(r.max_t, t, 1e-12 * std::max(1.0, std::abs(t)));
    EXPECT_NEAR(r.threshold, q, 1e-9);
    EXPECT_EQ(r.reject, t >= q);
  }
}

TEST(Fuit, ZeroMeanNeverRejects) {
  const auto r = fuit(make_summary(10, Vector::Zero(3), Matrix::Identity(3, 3)), 0.2);
  EXPECT_TRUE(r.t_values.isZero(0.0));
  EXPECT_FALSE(r.reject);
}

TEST(Fuit, BonferroniThresholdMatchesCdfInversion) {
  const auto r = fuit(make_summary(16, Vector::Zero(4), Matrix::Identity(4, 4)), 0.05);
  EXPECT_NEAR(r.alpha_star * 4, 0.05, 1e-12);
  const boost::math::students_t dist(15.0);
  double lo = 0, hi = 50;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (boost::math::cdf(boost::math::complement(dist, mid)) > 0.0125 ? lo : hi) = mid;
  }
  EXPECT_NEAR(r.threshold, 0.5 * (lo + hi), 1e-9);
}

TEST(Fuit, AgreesWithUnivariateHalfspaceUit) {
  Rng rng(10);
  const double alpha = 0.05;
  const double crit = sup_critical_value(Family::UIT_halfspace, alpha, 12, 1).value;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto s = summarize(random_matrix(rng, 12, 1) + Matrix::Constant(12, 1, 0.5));
    const bool uit_rejects = uit_halfspace(s).statistic >= crit;
    const auto f = fuit(s, alpha);
    if (std::abs(f.max_t - f.threshold) < 1e-8) continue;
    EXPECT_EQ(f.reject, uit_rejects);
  }
}

TEST(IntegratedLikelihood, SpecialValues) {
  // L = 0 gives 1.
  EXPECT_EQ(integrated_lr_ratio(make_summary(10, -Vector::Ones(2), Matrix::Identity(2, 2))), 1.0);
  // n = 3: the exponent is 1 and L / (n - 1) = 3 gives 4.
  Vector m(1);
  m << std::sqrt(2.0);
  const auto s = make_summary(3, m, Matrix::Identity(1, 1));
  EXPECT_NEAR(lrt_orthant(s).statistic, 6.0, 1e-13);
  EXPECT_NEAR(integrated_lr_ratio(s), 4.0, 1e-13);
}

TEST(IntegratedLikelihood, LogDomainIdentity) {
  Rng rng(11);
  for (int rep = 0; rep < 500; ++rep) {
    const auto s = random_summary(rng, 12, 3, 0.3);
    const double l = lrt_orthant(s).statistic;
    const double expected = 5.5 * std::log1p(l / 11.0);
    EXPECT_NEAR(integrated_lr_log_ratio(s), expected, 1e-12 * std::max(1.0, expected));
    EXPECT_NEAR(profile_log_ratio_direct(s), expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(Directional, EmptyActiveSetGivesZero) {
  const auto s = make_summary(10, -Vector::Ones(3), Matrix::Identity(3, 3));
  EXPECT_EQ(directional_component(s, Vector::Ones(3)), 0.0);
}

TEST(Directional, BoundedByUAndAttained) {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = random_summary(rng, 15, 4, 0.3);
    const double u = uit_orthant(s).statistic;
    if (u == 0.0) continue;
    const Vector b = optimal_direction(s);
    EXPECT_NEAR(directional_component(s, b), u, 1e-9 * std::max(1.0, u));
    const auto a = uit_orthant(s).active_subset->indices();
    for (int k = 0; k < 200; ++k) {
      Vector d(4);
      for (int i = 0; i < 4; ++i) d(i) = rng.normal();
      bool vanishes = true;
      for (int i : a) vanishes = vanishes && d(i) == 0.0;
      if (vanishes) continue;
      EXPECT_LE(directional_component(s, d), u + 1e-9);
    }
  }
}

TEST(Evaluate, DispatchAndFuitRejected) {
  Rng rng(13);
  const auto s = random_summary(rng, 10, 2);
  EXPECT_EQ(evaluate(Family::T2, s).statistic, hotelling_t2(s).statistic);
  EXPECT_THROW(evaluate(Family::FUIT, s), InputError);
  EXPECT_EQ(family_from_string("uit_orthant"), Family::UIT_orthant);
  EXPECT_EQ(family_from_string("t2"), Family::T2);
  EXPECT_THROW(family_from_string("nope"), InputError);
}
