#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "conetest/sample.hpp"

namespace conetest {

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator, so it plugs
/// into the <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream for replicate `index` of logical stream `stream`.
  /// Results of Monte Carlo loops keyed this way do not depend on how the
  /// indices are scheduled across threads.
  static Rng substream(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  double uniform();  // in [0, 1)
  double normal();
  double chi_squared(double df);

 private:
  std::uint64_t s_[4];
  std::normal_distribution<double> normal_;
};

Vector standard_normal_vector(Rng& rng, int dim);

/// Lower-triangular Bartlett factor A with A A' ~ Wishart(I, df).
Matrix bartlett_factor(Rng& rng, int dim, double df);

/// Wishart(scale, df) draw; df > dim - 1.
Matrix wishart(Rng& rng, const Matrix& scale, double df);

/// Sigma with Sigma^{-1} ~ Wishart(gamma^{-1}, df), so E Sigma = gamma / (df - p - 1).
Matrix inverse_wishart(Rng& rng, const Matrix& gamma, double df);

/// Correlation matrix obtained by normalizing a Wishart(I, df) draw.
Matrix random_correlation(Rng& rng, int dim, double df);

/// Sufficient statistics of n observations from N(theta, sigma), drawn from
/// their exact joint law: xbar ~ N(theta, sigma / n) independent of
/// (n - 1) S ~ Wishart(sigma, n - 1). `sigma_factor` is the lower Cholesky
/// factor of sigma.
SampleSummary draw_summary(Rng& rng, int n, const Vector& theta,
                           const Matrix& sigma_factor);

/// n x p matrix of observations from N(theta, sigma).
Matrix draw_dataset(Rng& rng, int n, const Vector& theta,
                    const Matrix& sigma_factor);

/// Lower Cholesky factor; throws MetricError if sigma is not positive definite.
Matrix cholesky_factor(const Matrix& sigma);

}  // namespace conetest
