#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "conetest/calibration.hpp"
#include "conetest/statistics.hpp"

namespace conetest {

/// Where the covariance matrices of an experiment come from.
struct SigmaSource {
  enum class Kind { fixed, random_correlation, sequence };

  Kind kind = Kind::fixed;
  std::vector<Matrix> matrices;  // fixed (one) or sequence
  std::uint64_t seed = 0;        // random_correlation
  int count = 1;                 // random_correlation
  double df = 0.0;               // random_correlation; 0 means p + 1

  static SigmaSource fixed(Matrix sigma);
  static SigmaSource random_correlation(std::uint64_t seed, int count,
                                        double df = 0.0);
  static SigmaSource sequence(std::vector<Matrix> sigmas);
};

std::vector<Matrix> resolve_sigmas(const SigmaSource& source, int p);

struct TestSpec {
  Family family = Family::UIT_orthant;
  Calibration calibration = Calibration::sup_sigma;
};

struct ExperimentConfig {
  int p = 2;
  int n = 15;
  SigmaSource sigma_source;
  std::vector<Vector> theta_grid;
  double alpha = 0.05;
  std::int64_t replications = 1000;
  std::uint64_t seed = 0;
  std::vector<TestSpec> tests;
  /// Weighted calibration uses Bayes b1 weights from this prior when set,
  /// otherwise the chi-bar weights of each sigma.
  std::optional<PriorSpec> prior;
  MonteCarloOptions weight_mc;
  int workers = 1;
};

/// Throws InputError on inconsistent dimensions, replications < 1, or a theta
/// outside the alternative of a configured test.
void validate(const ExperimentConfig& cfg);

struct PowerRow {
  int theta_id = 0;
  Vector theta;
  int sigma_id = 0;
  TestSpec test;
  double critical_value = 0.0;
  std::int64_t rejections = 0;
  std::int64_t replications = 0;
  double rejection_rate = 0.0;
  double std_error = 0.0;
};

struct PowerTable {
  std::vector<PowerRow> rows;
  std::uint64_t seed = 0;
  std::int64_t replications = 0;
};

/// Rejection frequencies for every (theta, sigma, test). Replicate r under
/// sigma j uses the stream keyed by (seed, j, r) for all thetas and tests, so
/// comparisons are paired. Results do not depend on cfg.workers.
PowerTable simulate_power(const ExperimentConfig& cfg);

struct DominationRow {
  int theta_id = 0;
  Vector theta;
  int sigma_id = 0;
  Family orthant_family = Family::UIT_orthant;
  Family halfspace_family = Family::UIT_halfspace;
  double critical_value = 0.0;
  std::int64_t replications = 0;
  std::int64_t orthant_rejections = 0;
  std::int64_t halfspace_rejections = 0;
  /// Draws where the orthant test rejects and the halfspace test does not.
  std::int64_t implication_violations = 0;
  double orthant_power = 0.0;
  double halfspace_power = 0.0;
  double difference = 0.0;     // halfspace - orthant
  double difference_se = 0.0;  // from the paired differences
  bool flagged = false;        // difference < -3 SE
};

struct DominationReport {
  std::vector<DominationRow> rows;
  std::uint64_t seed = 0;
  std::int64_t replications = 0;
  std::int64_t total_violations = 0;
  bool any_flagged = false;
};

/// Paired comparison of each configured orthant LRT/UIT with its halfspace
/// counterpart at the common sup critical value. With no tests configured,
/// both pairs are run. Every theta must lie in the orthant.
DominationReport domination_experiment(const ExperimentConfig& cfg);

enum class Region {
  UIT_orthant_acceptance,
  UIT_halfspace_acceptance,
  LRT_orthant_acceptance,
};

std::string to_string(Region r);

/// How the two endpoints of a UIT midpoint test share their covariance.
enum class CovariancePairing {
  joint,   // independent S per endpoint; the midpoint averages (xbar, S)
  shared,  // one S per trial; only xbar varies
};

std::string to_string(CovariancePairing c);

struct ConvexityConfig {
  Region region = Region::UIT_orthant_acceptance;
  CovariancePairing pairing = CovariancePairing::joint;
  int p = 3;
  int n = 15;
  double alpha = 0.05;
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  /// LRT witness search: attempt cap and the covariance held fixed (defaults
  /// to diag(1, 2, ..., p)).
  std::int64_t max_attempts = 1'000'000;
  std::optional<Matrix> fixed_cov;
};

/// Two accepted samples whose midpoint is rejected.
struct ConvexityWitness {
  Vector mean_a;
  Matrix cov_a;
  Vector mean_b;
  Matrix cov_b;
  double statistic_a = 0.0;
  double statistic_b = 0.0;
  double statistic_mid = 0.0;
};

struct ConvexityReport {
  Region region = Region::UIT_orthant_acceptance;
  CovariancePairing pairing = CovariancePairing::joint;
  int p = 0;
  int n = 0;
  double critical_value = 0.0;
  std::int64_t trials = 0;      // midpoint tests performed
  std::int64_t violations = 0;  // midpoints outside the region
  std::optional<ConvexityWitness> witness;
};

/// UIT regions: `trials` midpoint tests between random accepted (xbar, S)
/// pairs, with xbar scaled towards the boundary; every violation is counted.
/// With joint pairing violations do occur: the conditional mean
/// xbar_a - S_aa' S_a'a'^{-1} xbar_a' is not linear in (xbar, S). For fixed S
/// the regions are convex.
/// LRT region: searches with S fixed for a pair of accepted points near the
/// boundary whose midpoint is rejected, stopping at the first success or
/// after max_attempts pairs.
ConvexityReport convexity_probe(const ConvexityConfig& cfg);

struct SimilarityConfig {
  int p = 3;
  int n = 20;
  TestSpec test;
  std::vector<Matrix> sigmas;
  double alpha = 0.05;
  std::int64_t replications = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Needed for weighted calibration; with `compound` set, sigma is also
  /// drawn from it afresh on each replicate.
  std::optional<PriorSpec> prior;
  bool compound = false;
  MonteCarloOptions weight_mc;
};

struct SimilarityRow {
  int sigma_id = 0;  // -1 for the compound row
  double critical_value = 0.0;
  std::int64_t rejections = 0;
  std::int64_t replications = 0;
  double rejection_rate = 0.0;
  double std_error = 0.0;
};

struct SimilarityReport {
  TestSpec test;
  double alpha = 0.0;
  std::vector<SimilarityRow> rows;
  std::optional<SimilarityRow> compound;
  std::optional<MixtureWeights> weights;
  /// Largest |r_i - r_j| / sqrt(se_i^2 + se_j^2) over the fixed-sigma rows.
  double max_pairwise_z = 0.0;
};

/// Null rejection rates across sigmas (theta = 0).
SimilarityReport similarity_probe(const SimilarityConfig& cfg);

}  // namespace conetest
