#pragma once

namespace conetest {

double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), by Lentz's continued fraction on
/// whichever of x, 1 - x converges faster. Throws DomainError for a, b <= 0
/// or x outside [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail 1 - I_x(a, b) without cancellation.
double regularized_incomplete_beta_upper(double a, double b, double x);

double student_t_cdf(double t, double df);
/// P{T_df >= t}.
double student_t_sf(double t, double df);

/// Upper-alpha point t with P{T_df >= t} = alpha, by bisection to 1e-10.
double student_t_upper_quantile(double alpha, double df);

/// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double x, double d1, double d2);

}  // namespace conetest
