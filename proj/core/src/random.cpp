#include "conetest/random.hpp"

#include <cmath>

#include "conetest/errors.hpp"

namespace conetest {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t index) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state = key ^ (stream * 0xd1b54a32d192ed03ULL);
  key = splitmix64(state);
  state = key ^ (index * 0x8cb92ba72f3d8dd7ULL);
  return Rng(splitmix64(state));
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::normal() { return normal_(*this); }

double Rng::chi_squared(double df) {
  std::gamma_distribution<double> gamma(0.5 * df, 2.0);
  return gamma(*this);
}

Vector standard_normal_vector(Rng& rng, int dim) {
  Vector z(dim);
  for (int i = 0; i < dim; ++i) z(i) = rng.normal();
  return z;
}

Matrix bartlett_factor(Rng& rng, int dim, double df) {
  if (!(df > dim - 1)) {
    throw DomainError("Wishart degrees of freedom must exceed dim - 1");
  }
  Matrix a = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(df - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  return a;
}

Matrix cholesky_factor(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw MetricError("covariance matrix is not positive definite");
  }
  return llt.matrixL();
}

Matrix wishart(Rng& rng, const Matrix& scale, double df) {
  const Matrix l = cholesky_factor(scale);
  const Matrix la = l * bartlett_factor(rng, static_cast<int>(scale.rows()), df);
  return la * la.transpose();
}

Matrix inverse_wishart(Rng& rng, const Matrix& gamma, double df) {
  const auto p = gamma.rows();
  const Matrix gamma_inv = gamma.llt().solve(Matrix::Identity(p, p));
  const Matrix precision = wishart(rng, 0.5 * (gamma_inv + gamma_inv.transpose()), df);
  const Matrix sigma = precision.llt().solve(Matrix::Identity(p, p));
  return 0.5 * (sigma + sigma.transpose());
}

Matrix random_correlation(Rng& rng, int dim, double df) {
  const Matrix a = bartlett_factor(rng, dim, df);
  const Matrix w = a * a.transpose();
  const Vector d = w.diagonal().cwiseSqrt().cwiseInverse();
  Matrix r = d.asDiagonal() * w * d.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

SampleSummary draw_summary(Rng& rng, int n, const Vector& theta,
                           const Matrix& sigma_factor) {
  const int p = static_cast<int>(theta.size());
  SampleSummary s;
  s.n = n;
  s.p = p;
  s.mean = theta + sigma_factor * standard_normal_vector(rng, p) /
                       std::sqrt(static_cast<double>(n));
  const Matrix la = sigma_factor * bartlett_factor(rng, p, n - 1.0);
  s.cov = (la * la.transpose()) / static_cast<double>(n - 1);
  return s;
}

Matrix draw_dataset(Rng& rng, int n, const Vector& theta,
                    const Matrix& sigma_factor) {
  const int p = static_cast<int>(theta.size());
  Matrix z(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  return (z * sigma_factor.transpose()).rowwise() + theta.transpose();
}

}  // namespace conetest
