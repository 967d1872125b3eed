#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <conetest/calibration.hpp>
#include <conetest/errors.hpp>
#include <conetest/random.hpp>

#include "test_support.hpp"

using namespace conetest;
using conetest::testing::random_spd;
using conetest::testing::random_summary;

namespace {

double binomial_weight(int p, int k) {
  return boost::math::binomial_coefficient<double>(p, k) * std::ldexp(1.0, -p);
}

Matrix equicorrelation(int p, double rho) {
  Matrix r = Matrix::Constant(p, p, rho);
  r.diagonal().setOnes();
  return r;
}

MonteCarloOptions mc(std::int64_t samples, std::uint64_t seed) {
  return MonteCarloOptions{samples, seed, 1};
}

}  // namespace

TEST(GRatio, ExchangeableHalf) { EXPECT_NEAR(g_ratio_cdf(1, 1, 1.0), 0.5, 1e-14); }

TEST(GRatio, ZeroDegreesOfFreedomIsPointMass) {
  EXPECT_EQ(g_ratio_cdf(0, 5, 0.3), 1.0);
  EXPECT_EQ(g_ratio_tail(0, 5, 0.3), 0.0);
  EXPECT_EQ(g_ratio_tail(0, 5, 0.0), 1.0);
  EXPECT_EQ(g_ratio_tail(3, 5, -1.0), 1.0);
}

TEST(GRatio, MatchesSimulatedRatios) {
  Rng rng(42);
  const std::int64_t n = 10'000'000;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n; ++i) hits += rng.chi_squared(2) / rng.chi_squared(5) <= 0.8;
  const double est = static_cast<double>(hits) / n;
  const double se = std::sqrt(est * (1 - est) / n);
  EXPECT_NEAR(g_ratio_cdf(2, 5, 0.8), est, 3 * se);
}

TEST(GStar, DegenerateAndBoundaryCases) {
  EXPECT_NEAR(g_star_tail(15, 3, 3, 0.4), g_ratio_tail(3, 12, 0.4), 1e-14);
  EXPECT_EQ(g_star_tail(15, 2, 3, 0.0), 1.0);
  EXPECT_EQ(g_star_tail(15, 0, 3, 0.2), 0.0);
}

TEST(GStar, MatchesTwoStageSampling) {
  Rng rng(7);
  struct Point { int n, a, p; double u; };
  for (const Point pt : {Point{20, 2, 4, 0.5}, Point{15, 1, 3, 0.3}}) {
    const std::int64_t reps = 1'000'000;
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < reps; ++i) {
      const double ratio = rng.chi_squared(pt.a) / rng.chi_squared(pt.n - pt.p);
      const double shrink = rng.chi_squared(pt.p - pt.a) / rng.chi_squared(pt.n - pt.p + pt.a);
      hits += ratio * (1.0 + shrink) > pt.u;
    }
    EXPECT_NEAR(g_star_tail(pt.n, pt.a, pt.p, pt.u), static_cast<double>(hits) / reps, 2e-3);
  }
}

TEST(GStar, DominatesPlainRatioTail) {
  for (double u : {0.05, 0.2, 1.0}) {
    EXPECT_GE(g_star_tail(20, 2, 4, u), g_ratio_tail(2, 16, u));
  }
}

TEST(ChiBarWeights, IdentityIsBinomial) {
  for (int p = 1; p <= 3; ++p) {
    const auto w = chi_bar_weights(Matrix::Identity(p, p), WeightMethod::closed_form);
    for (int k = 0; k <= p; ++k) EXPECT_NEAR(w.weights[k], binomial_weight(p, k), 1e-14);
  }
  for (int p = 4; p <= 6; ++p) {
    const auto w = chi_bar_weights(Matrix::Identity(p, p), mc(100'000, 3));
    EXPECT_EQ(w.method, WeightMethod::monte_carlo);
    // 4 SE: eighteen weights are checked at once.
    for (int k = 0; k <= p; ++k) {
      EXPECT_NEAR(w.weights[k], binomial_weight(p, k), 4 * w.std_errors[k] + 1e-12);
    }
  }
}

TEST(ChiBarWeights, ArcsinClosedForm) {
  const auto w = chi_bar_weights(equicorrelation(2, 0.5), WeightMethod::closed_form);
  EXPECT_NEAR(w.weights[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w.weights[1], 0.5, 1e-15);
  const auto m = chi_bar_weights(equicorrelation(2, 0.5), WeightMethod::monte_carlo, mc(200'000, 9));
  EXPECT_NEAR(m.weights[2], 1.0 / 3.0, 3 * m.std_errors[2]);
}

TEST(ChiBarWeights, ThreeDimClosedFormMatchesSimulation) {
  Rng rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    const Matrix s = random_spd(rng, 3);
    const auto cf = chi_bar_weights(s, WeightMethod::closed_form);
    const auto sim = chi_bar_weights(s, WeightMethod::monte_carlo, mc(200'000, rep));
    double total = 0;
    for (int k = 0; k <= 3; ++k) {
      EXPECT_NEAR(cf.weights[k], sim.weights[k], 3.5 * sim.std_errors[k] + 1e-12);
      EXPECT_GE(cf.weights[k], 0.0);
      total += cf.weights[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ChiBarWeights, IndependentSeedsAgree) {
  Rng rng(6);
  const Matrix r = random_correlation(rng, 4, 6);
  const auto a = chi_bar_weights(r, mc(200'000, 1));
  const auto b = chi_bar_weights(r, mc(200'000, 2));
  double sa = 0;
  for (int k = 0; k <= 4; ++k) {
    const double se = std::hypot(a.std_errors[k], b.std_errors[k]);
    EXPECT_NEAR(a.weights[k], b.weights[k], 3.5 * se + 1e-12);
    sa += a.weights[k];
  }
  EXPECT_NEAR(sa, 1.0, 1e-12);
}

TEST(ChiBarWeights, DependOnCorrelationOnly) {
  Rng rng(8);
  const Matrix s = random_spd(rng, 3);
  Vector d(3);
  d << 0.1, 4.0, 2.5;
  const Matrix dsd = d.asDiagonal() * s * d.asDiagonal();
  const auto a = chi_bar_weights(s, WeightMethod::closed_form);
  const auto b = chi_bar_weights(dsd, WeightMethod::closed_form);
  for (int k = 0; k <= 3; ++k) EXPECT_NEAR(a.weights[k], b.weights[k], 1e-12);
  const Matrix s5 = random_spd(rng, 5);
  Vector d5 = Vector::LinSpaced(5, 0.5, 3.0);
  const auto c = chi_bar_weights(s5, mc(100'000, 4));
  const auto e = chi_bar_weights(Matrix(d5.asDiagonal() * s5 * d5.asDiagonal()), mc(100'000, 4));
  for (int k = 0; k <= 5; ++k) EXPECT_NEAR(c.weights[k], e.weights[k], 1e-12);
}

TEST(ChiBarWeights, ClosedFormUnavailableAboveThree) {
  EXPECT_THROW(chi_bar_weights(Matrix::Identity(4, 4), WeightMethod::closed_form), InputError);
}

TEST(NullTail, ZeroAndUnivariateHalfspace) {
  for (Family f : {Family::T2, Family::LRT_halfspace, Family::UIT_halfspace}) {
    EXPECT_EQ(null_tail(f, 0.0, 15, 3), 1.0);
  }
  for (double c : {0.5, 2.0, 5.0}) {
    EXPECT_NEAR(null_tail(Family::LRT_halfspace, c, 20, 1), 0.5 * g_ratio_tail(1, 19, c / 19.0), 1e-14);
  }
}

TEST(NullTail, NonincreasingInCriticalValue) {
  const auto w = chi_bar_weights(Matrix::Identity(3, 3), WeightMethod::closed_form);
  for (Family f : {Family::T2, Family::LRT_orthant, Family::UIT_orthant, Family::LRT_halfspace,
                   Family::UIT_halfspace}) {
    double prev = 1.0;
    for (double c = 0.0; c < 30.0; c += 0.5) {
      const double t = null_tail(f, c, 20, 3, &w);
      EXPECT_LE(t, prev + 1e-12);
      prev = t;
    }
  }
}

TEST(NullTail, OrthantUitMatchesSimulation) {
  const auto w = chi_bar_weights(Matrix::Identity(3, 3), WeightMethod::closed_form);
  const double c = 2.0;
  const double theory = null_tail(Family::UIT_orthant, c, 15, 3, &w);
  const Matrix factor = Matrix::Identity(3, 3);
  const std::int64_t reps = 100'000;
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    Rng rng = Rng::substream(99, 0, r);
    hits += compute_all(draw_summary(rng, 15, Vector::Zero(3), factor)).uit_orthant >= c;
  }
  const double est = static_cast<double>(hits) / reps;
  EXPECT_NEAR(est, theory, 3 * std::sqrt(theory * (1 - theory) / reps));
}

TEST(SupCritical, UnivariateIsSquaredTQuantile) {
  const auto c = sup_critical_value(Family::LRT_halfspace, 0.05, 20, 1);
  const double q = boost::math::quantile(boost::math::complement(boost::math::students_t(19.0), 0.05));
  EXPECT_NEAR(c.value, q * q, 1e-7);
  EXPECT_NEAR(sup_critical_value(Family::UIT_orthant, 0.05, 20, 1).value, q * q, 1e-7);
}

TEST(SupCritical, RoundTripAndMonotone) {
  for (Family f : {Family::LRT_orthant, Family::UIT_orthant, Family::LRT_halfspace,
                   Family::UIT_halfspace, Family::T2}) {
    for (double a : {0.01, 0.05, 0.10}) {
      const auto c = sup_critical_value(f, a, 15, 3);
      EXPECT_NEAR(sup_null_tail(f, c.value, 15, 3), a, 1e-6);
    }
    EXPECT_GT(sup_critical_value(f, 0.01, 15, 3).value, sup_critical_value(f, 0.10, 15, 3).value);
  }
}

TEST(SupCritical, UnreachableLevel) {
  EXPECT_THROW(sup_critical_value(Family::LRT_halfspace, 0.6, 10, 1), CalibrationError);
}

TEST(SupCritical, OrthantIsConservativeAtIdentity) {
  for (auto [p, n] : {std::pair{2, 15}, std::pair{3, 20}}) {
    const auto w = chi_bar_weights(Matrix::Identity(p, p), WeightMethod::closed_form);
    const auto c = sup_critical_value(Family::UIT_orthant, 0.05, n, p);
    EXPECT_LT(null_tail(Family::UIT_orthant, c.value, n, p, &w), 0.05);
  }
}

TEST(ExactCritical, OnlyForT2AndHalfspace) {
  EXPECT_NO_THROW(exact_critical_value(Family::T2, 0.05, 10, 2));
  EXPECT_NO_THROW(exact_critical_value(Family::UIT_halfspace, 0.05, 10, 2));
  EXPECT_THROW(exact_critical_value(Family::UIT_orthant, 0.05, 10, 2), CalibrationError);
}

TEST(BayesWeights, UnivariateSymmetry) {
  const auto w = bayes_weights_b1(12, 1, PriorSpec::inverse_wishart(Matrix::Identity(1, 1), 3), mc(100'000, 1));
  EXPECT_NEAR(w.weights[0] + w.weights[1], 1.0, 1e-12);
  EXPECT_NEAR(w.weights[1], 0.5, 3 * w.std_errors[1]);
}

TEST(BayesWeights, LargeDegreesOfFreedomApproachIdentityWeights) {
  const int p = 3;
  const auto w = bayes_weights_b1(20, p, PriorSpec::inverse_wishart(Matrix::Identity(p, p), 4000),
                                  mc(100'000, 2));
  for (int k = 0; k <= p; ++k) {
    EXPECT_NEAR(w.weights[k], binomial_weight(p, k), 5 * w.std_errors[k]);
  }
}

TEST(BayesWeights, SeedsAgreeAndSumToOne) {
  const auto prior = PriorSpec::inverse_wishart(Matrix::Identity(2, 2), 6);
  const auto a = bayes_weights_b1(20, 2, prior, mc(100'000, 10));
  const auto b = bayes_weights_b1(20, 2, prior, mc(100'000, 11));
  double sa = 0;
  for (int k = 0; k <= 2; ++k) {
    EXPECT_NEAR(a.weights[k], b.weights[k], 3.5 * std::hypot(a.std_errors[k], b.std_errors[k]));
    sa += a.weights[k];
  }
  EXPECT_NEAR(sa, 1.0, 1e-12);
  EXPECT_GT(a.weights[1], 0.0);
  EXPECT_GT(a.weights[2], 0.0);
}

TEST(BayesWeights, PriorValidation) {
  EXPECT_THROW(bayes_weights_b1(10, 2, PriorSpec::haar(), mc(100, 1)), UnsupportedCalibrationError);
  EXPECT_THROW(PriorSpec::inverse_wishart(Matrix::Identity(3, 3), 1.5), InputError);
  EXPECT_THROW(PriorSpec::inverse_wishart(-Matrix::Identity(2, 2), 5), InputError);
}

TEST(BayesCritical, DegenerateWeightsReduceToSingleRatio) {
  MixtureWeights w;
  w.weights = {0.0, 0.0, 1.0};
  w.std_errors = {0.0, 0.0, 0.0};
  const auto c = bayes_critical_value(Family::LRT_orthant, 0.05, 15, w);
  EXPECT_NEAR(g_ratio_tail(2, 13, c.value / 14.0), 0.05, 1e-6);
}

TEST(BayesCritical, RoundTripAndBelowSup) {
  const auto w = bayes_weights_b1(20, 2, PriorSpec::inverse_wishart(Matrix::Identity(2, 2), 6),
                                  mc(50'000, 3));
  for (Family f : {Family::LRT_orthant, Family::UIT_orthant}) {
    const auto c = bayes_critical_value(f, 0.05, 20, w);
    EXPECT_NEAR(null_tail(f, c.value, 20, 2, &w), 0.05, 1e-6);
    EXPECT_LT(c.value, sup_critical_value(f, 0.05, 20, 2).value);
  }
}

TEST(MarginalDensity, MaximizedAtSampleMean) {
  Rng rng(12);
  const auto s = random_summary(rng, 15, 3);
  const auto prior = PriorSpec::inverse_wishart(1e-3 * Matrix::Identity(3, 3), 5);
  const double at_mean = marginal_logdensity(s, s.mean, prior);
  for (int rep = 0; rep < 50; ++rep) {
    Vector t = s.mean;
    for (int i = 0; i < 3; ++i) t(i) += 0.3 * rng.normal();
    EXPECT_LT(marginal_logdensity(s, t, prior), at_mean);
  }
}

TEST(MarginalDensity, UnivariateHaarForm) {
  Vector m(1);
  m << 0.4;
  Matrix c(1, 1);
  c << 2.0;
  const auto s = make_summary(10, m, c);
  const double ref = 3.5 * std::log(2.0) - 5.0 * std::log(9.0 * 2.0 + 10.0 * 0.16);
  EXPECT_NEAR(marginal_logdensity(s, Vector::Zero(1), PriorSpec::haar()), ref, 1e-12);
}

TEST(MarginalDensity, DecreasingInScatterDeterminant) {
  Rng rng(14);
  const auto s = random_summary(rng, 12, 2);
  const auto prior = PriorSpec::inverse_wishart(Matrix::Identity(2, 2), 4);
  auto wdet = [&](const Vector& t) {
    const Vector d = s.mean - t;
    return Matrix(s.cov + 12.0 * d * d.transpose() + prior.scale).determinant();
  };
  for (int rep = 0; rep < 100; ++rep) {
    Vector t1(2), t2(2);
    t1 << rng.normal(), rng.normal();
    t2 << rng.normal(), rng.normal();
    if (wdet(t1) > wdet(t2)) std::swap(t1, t2);
    EXPECT_GE(marginal_logdensity(s, t1, prior), marginal_logdensity(s, t2, prior));
  }
}

TEST(PValue, ZeroStatisticAndInversion) {
  TestOutcome o;
  o.family = Family::UIT_orthant;
  o.n = 15;
  o.p = 3;
  o.statistic = 0.0;
  EXPECT_EQ(p_value(o, Calibration::sup_sigma), 1.0);
  o.family = Family::UIT_halfspace;
  o.statistic = sup_critical_value(Family::UIT_halfspace, 0.05, 15, 3).value;
  EXPECT_NEAR(p_value(o, Calibration::sup_sigma), 0.05, 1e-6);
  EXPECT_NEAR(p_value(o, Calibration::exact_halfspace), 0.05, 1e-6);
}

TEST(PValue, WeightedNeverExceedsConservative) {
  Rng rng(15);
  const auto w = chi_bar_weights(Matrix::Identity(3, 3), WeightMethod::closed_form);
  for (int rep = 0; rep < 100; ++rep) {
    const auto o = uit_orthant(random_summary(rng, 15, 3, 0.3));
    EXPECT_LE(p_value(o, Calibration::weighted, &w), p_value(o, Calibration::sup_sigma) + 1e-12);
  }
}

TEST(PValue, IncompatibleModes) {
  TestOutcome o;
  o.family = Family::UIT_orthant;
  o.n = 10;
  o.p = 2;
  o.statistic = 3.0;
  EXPECT_THROW(p_value(o, Calibration::exact_halfspace), CalibrationError);
  EXPECT_THROW(p_value(o, Calibration::weighted), CalibrationError);
}
