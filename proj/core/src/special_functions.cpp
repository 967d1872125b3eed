#include "conetest/special_functions.hpp"

#include <cmath>
#include <limits>

#include "conetest/errors.hpp"

namespace conetest {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz); converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

void check_beta_args(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("incomplete beta requires a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("incomplete beta requires x in [0, 1]");
  }
}

// x^a (1 - x)^b / (a B(a, b)), computed in logs.
double beta_front(double a, double b, double x) {
  return std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b)) / a;
}

}  // namespace

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double regularized_incomplete_beta(double a, double b, double x) {
  check_beta_args(a, b, x);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return beta_front(a, b, x) * beta_continued_fraction(a, b, x);
  }
  return 1.0 - beta_front(b, a, 1.0 - x) * beta_continued_fraction(b, a, 1.0 - x);
}

double regularized_incomplete_beta_upper(double a, double b, double x) {
  check_beta_args(a, b, x);
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return 1.0 - beta_front(a, b, x) * beta_continued_fraction(a, b, x);
  }
  return beta_front(b, a, 1.0 - x) * beta_continued_fraction(b, a, 1.0 - x);
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("t distribution requires df > 0");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

double student_t_cdf(double t, double df) { return 1.0 - student_t_sf(t, df); }

double student_t_upper_quantile(double alpha, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("quantile level must lie in (0, 1)");
  }
  if (alpha == 0.5) return 0.0;
  if (alpha > 0.5) return -student_t_upper_quantile(1.0 - alpha, df);
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_sf(hi, df) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("t quantile bracket overflow");
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_sf(mid, df) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw DomainError("F requires d1, d2 > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return regularized_incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

}  // namespace conetest
