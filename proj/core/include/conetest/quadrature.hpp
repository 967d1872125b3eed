#pragma once

#include <functional>

namespace conetest {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (7/15 point) integration of f over [a, b], always
/// splitting the interval with the largest error estimate. Throws
/// QuadratureError carrying the achieved error estimate when `abs_tol` is not
/// met within `max_subdivisions` intervals.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_subdivisions = 2000);

}  // namespace conetest
