#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conetest/sample.hpp"
#include "conetest/statistics.hpp"

namespace conetest {

/// P{chi2_a / chi2_b <= u}. chi2_0 is a point mass at zero, so a = 0 gives
/// 1 for u >= 0 and 0 for u < 0.
double g_ratio_cdf(double a, double b, double u);
/// P{chi2_a / chi2_b > u}.
double g_ratio_tail(double a, double b, double u);

/// Tail of chi2_a / chi2_{n-p} convolved with an independent
/// chi2_{p-a} / chi2_{n-p+a} shrinkage:
///   int_0^inf G_{a,n-p}(u / (1 + t)) dG_{p-a,n-p+a}(t).
/// Integrated in y = t / (1 + t), which is Beta((p-a)/2, (n-p+a)/2), with
/// y = v^{2/(p-a)} to flatten the endpoint singularity. Absolute tolerance
/// 1e-7; throws QuadratureError if that is not reached.
double g_star_tail(int n, int a, int p, double u);

enum class Calibration {
  exact_halfspace,  // halfspace families (and T2): the null law is free of sigma
  sup_sigma,        // least favourable sigma; conservative for the orthant
  weighted,         // chi-bar weights w(p, k; sigma) or Bayes weights b1
};

std::string to_string(Calibration c);
Calibration calibration_from_string(const std::string& s);

enum class WeightMethod { closed_form, monte_carlo };

struct MonteCarloOptions {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Mixture weights indexed k = 0..p.
struct MixtureWeights {
  std::vector<double> weights;
  std::vector<double> std_errors;
  WeightMethod method = WeightMethod::closed_form;
  std::int64_t mc_samples = 0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(weights.size()) - 1; }
};

/// Orthant-probability weights w(p, k; sigma): the probability that the
/// active subset of Z ~ N(0, sigma) has k elements. Depends on sigma only
/// through its correlation matrix. Closed forms exist for p <= 3; asking for
/// them at larger p throws InputError.
MixtureWeights chi_bar_weights(const Matrix& sigma, WeightMethod method,
                               const MonteCarloOptions& mc = {});
/// Closed form when p <= 3, Monte Carlo otherwise.
MixtureWeights chi_bar_weights(const Matrix& sigma,
                               const MonteCarloOptions& mc = {});

/// Weight function on sigma for Bayes-weighted calibration.
struct PriorSpec {
  enum class Kind { inverse_wishart, haar };

  Kind kind = Kind::haar;
  Matrix scale;   // Gamma
  double df = 0;  // m

  /// Sigma^{-1} ~ Wishart(Gamma^{-1}, m); needs Gamma p.d. and m > p - 1.
  static PriorSpec inverse_wishart(Matrix gamma, double m);
  static PriorSpec haar();
};

/// Null tail P{statistic >= c}. Statistics are on the S scale, so the
/// chi2-ratio forms are evaluated at c / (n - 1). Orthant families need
/// weights; the others ignore them. Tails at c <= 0 are 1.
double null_tail(Family family, double c, int n, int p,
                 const MixtureWeights* weights = nullptr);

/// The halfspace null tail of the LRT or UIT, which is also the supremum over
/// sigma of the orthant null tail.
double sup_null_tail(Family family, double c, int n, int p);

struct CriticalValue {
  double value = 0.0;
  double alpha = 0.0;
  Family family = Family::T2;
  Calibration calibration = Calibration::sup_sigma;
};

/// Solves sup_null_tail(c) = alpha. Accepts LRT and UIT families of either
/// cone; T2 is calibrated exactly. Throws CalibrationError when alpha is not
/// below the tail at 0+ (e.g. alpha >= 1/2 for the univariate LRT).
CriticalValue sup_critical_value(Family family, double alpha, int n, int p);

/// Exact critical value for T2 and the halfspace families.
CriticalValue exact_critical_value(Family family, double alpha, int n, int p);

/// Critical value of an orthant family under a weighted mixture.
CriticalValue weighted_critical_value(Family family, double alpha, int n,
                                      const MixtureWeights& weights);

/// b1(k, n, p): compound-model probability that the active subset of
/// (xbar, S) has k elements when sigma is drawn from the prior and the data
/// from the null. Throws UnsupportedCalibrationError for the Haar weight.
MixtureWeights bayes_weights_b1(int n, int p, const PriorSpec& prior,
                                const MonteCarloOptions& mc);

/// weighted_critical_value with b1 weights.
CriticalValue bayes_critical_value(Family family, double alpha, int n,
                                   const MixtureWeights& b1);

/// Log marginal density of the sample at theta, up to an additive constant.
///   inverse Wishart: (m/2) log|G| + ((n-p-2)/2) log|S| - ((n+m-1)/2) log|W + G|
///     with W = S + n (xbar - theta)(xbar - theta)'
///   haar: ((n-p-2)/2) log|S| - (n/2) log|(n-1) S + n (xbar - theta)(xbar - theta)'|
double marginal_logdensity(const SampleSummary& s, const Vector& theta,
                           const PriorSpec& prior);

/// Tail probability at the observed statistic. A statistic of exactly zero
/// gets p-value 1. FUIT outcomes (statistic = max t) get the Bonferroni
/// p-value min(1, p P{t_{n-1} >= max t}).
double p_value(const TestOutcome& outcome, Calibration mode,
               const MixtureWeights* weights = nullptr);

}  // namespace conetest
