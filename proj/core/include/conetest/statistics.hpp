#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "conetest/cone.hpp"
#include "conetest/sample.hpp"

namespace conetest {

enum class Family {
  T2,
  LRT_orthant,
  UIT_orthant,
  LRT_halfspace,
  UIT_halfspace,
  FUIT,
};

std::string to_string(Family f);
/// Accepts the enumerator spelling, case-insensitively ("uit_orthant", "T2").
Family family_from_string(std::string_view s);

bool is_orthant_family(Family f) noexcept;
bool is_halfspace_family(Family f) noexcept;
bool is_lrt_family(Family f) noexcept;
bool is_uit_family(Family f) noexcept;

/// How the orthant and halfspace statistics are evaluated.
enum class Route {
  projection,      // metric projection engine (default)
  subset_formula,  // explicit sum over the active subset
  cross_check,     // both; throws SolverError if they disagree beyond 1e-9
};

/// Statistic of one test on one sample. All statistics use S_n with divisor
/// n - 1, so T2 = n xbar' S^{-1} xbar and the UIT statistic is the squared
/// projection norm of sqrt(n) xbar in the S_n metric. The LRT statistic is
/// U / (1 + R / (n - 1)), with R the squared residual norm; it equals
/// (n - 1) times the likelihood-ratio quantity in SSCP units.
struct TestOutcome {
  double statistic = 0.0;
  Family family = Family::T2;
  std::optional<SubsetPartition> active_subset;
  int n = 0;
  int p = 0;
  double projection_sq_norm = 0.0;  // U-type component
  double residual_sq_norm = 0.0;    // R-type component
};

TestOutcome hotelling_t2(const SampleSummary& s);
TestOutcome lrt_orthant(const SampleSummary& s, Route route = Route::projection);
TestOutcome uit_orthant(const SampleSummary& s, Route route = Route::projection);
TestOutcome lrt_halfspace(const SampleSummary& s,
                          Route route = Route::projection);
TestOutcome uit_halfspace(const SampleSummary& s,
                          Route route = Route::projection);

/// UIT / LRT statistics for an arbitrary cone via the projection engine.
TestOutcome cone_uit(const SampleSummary& s, const ConeSpec& cone);
TestOutcome cone_lrt(const SampleSummary& s, const ConeSpec& cone);

/// Dispatch on family; FUIT is rejected (use fuit()).
TestOutcome evaluate(Family family, const SampleSummary& s,
                     Route route = Route::projection);

/// Every statistic of one sample from a single factorization, for Monte
/// Carlo loops.
struct StatisticSet {
  double t2 = 0.0;
  double lrt_orthant = 0.0;
  double uit_orthant = 0.0;
  double lrt_halfspace = 0.0;
  double uit_halfspace = 0.0;
  double fuit_max_t = 0.0;
  int orthant_active_size = 0;

  double get(Family f) const;
};

StatisticSet compute_all(const SampleSummary& s);

/// Bonferroni combination of coordinatewise one-sided t tests.
struct FuitReport {
  Vector t_values;
  double alpha = 0.0;
  double alpha_star = 0.0;
  double threshold = 0.0;
  double max_t = 0.0;
  bool reject = false;
};

FuitReport fuit(const SampleSummary& s, double alpha);

/// (1 + L / (n - 1))^{(n - 1) / 2}: the ratio of the Haar-integrated
/// likelihood maximized over the orthant to its value at zero.
double integrated_lr_ratio(const SampleSummary& s);
double integrated_lr_log_ratio(const SampleSummary& s);

/// The same log ratio evaluated from its definition,
/// ((n - 1) / 2) [log(1 + T2 / (n - 1)) - log(1 + inf_theta Q(theta) / (n - 1))],
/// with the infimum of the quadratic form over the orthant.
double profile_log_ratio_direct(const SampleSummary& s);

/// n (b_a' xbar_{a:a'})^2 / (b_a' S_{aa:a'} b_a) on the active subset a;
/// zero when a is empty. Bounded above by U. Throws UndefinedDirectionError
/// when b vanishes on a.
double directional_component(const SampleSummary& s, const Vector& b);

/// The direction b with b_a = S_{aa:a'}^{-1} xbar_{a:a'} and zero elsewhere;
/// it attains U in directional_component.
Vector optimal_direction(const SampleSummary& s);

}  // namespace conetest
