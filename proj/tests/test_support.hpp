#pragma once

#include <limits>

#include <conetest/random.hpp>
#include <conetest/sample.hpp>

namespace conetest::testing {

inline Matrix random_spd(Rng& rng, int p) {
  Matrix a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.5 * Matrix::Identity(p, p);
}

inline SampleSummary random_summary(Rng& rng, int n, int p, double shift = 0.0) {
  Vector mean(p);
  for (int i = 0; i < p; ++i) mean(i) = rng.normal() + shift;
  return make_summary(n, mean, random_spd(rng, p));
}

inline Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

// Minimum of (x - t)' M^{-1} (x - t) over t >= 0, by trying every support.
inline double brute_force_orthant(const Vector& x, const Matrix& m, Vector* best_point = nullptr) {
  const int p = static_cast<int>(x.size());
  const Matrix h = m.inverse();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
    const SubsetPartition part(p, mask);
    const auto a = part.indices();
    Vector t = Vector::Zero(p);
    if (!a.empty()) {
      const auto c = part.complement();
      const Matrix h_aa = h(a, a);
      Vector rhs = h_aa * x(a);
      if (!c.empty()) rhs += h(a, c) * x(c);
      t(a) = h_aa.ldlt().solve(rhs).eval();
    }
    if ((t.array() < -1e-12).any()) continue;
    const Vector r = x - t;
    const double v = r.dot(h * r);
    if (v < best) {
      best = v;
      if (best_point) *best_point = t;
    }
  }
  return best;
}

}  // namespace conetest::testing
