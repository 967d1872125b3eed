#include "conetest/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "conetest/errors.hpp"
#include "conetest/nnqp.hpp"
#include "conetest/special_functions.hpp"

namespace conetest {

std::string to_string(Family f) {
  switch (f) {
    case Family::T2: return "T2";
    case Family::LRT_orthant: return "LRT_orthant";
    case Family::UIT_orthant: return "UIT_orthant";
    case Family::LRT_halfspace: return "LRT_halfspace";
    case Family::UIT_halfspace: return "UIT_halfspace";
    case Family::FUIT: return "FUIT";
  }
  return "unknown";
}

Family family_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (auto f : {Family::T2, Family::LRT_orthant, Family::UIT_orthant,
                 Family::LRT_halfspace, Family::UIT_halfspace, Family::FUIT}) {
    std::string name = to_string(f);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name == lower) return f;
  }
  throw InputError("unknown test family '" + std::string(s) + "'");
}

bool is_orthant_family(Family f) noexcept {
  return f == Family::LRT_orthant || f == Family::UIT_orthant;
}
bool is_halfspace_family(Family f) noexcept {
  return f == Family::LRT_halfspace || f == Family::UIT_halfspace;
}
bool is_lrt_family(Family f) noexcept {
  return f == Family::LRT_orthant || f == Family::LRT_halfspace;
}
bool is_uit_family(Family f) noexcept {
  return f == Family::UIT_orthant || f == Family::UIT_halfspace;
}

namespace {

void require_nonsingular(const SampleSummary& s) {
  if (s.n <= s.p) {
    throw InsufficientDataError("test statistics require n > p (n = " +
                                std::to_string(s.n) +
                                ", p = " + std::to_string(s.p) + ")");
  }
}

double lrt_from_parts(double u, double r, int n) {
  return u / (1.0 + r / static_cast<double>(n - 1));
}

bool agree(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Parts {
  double u = 0.0;
  double r = 0.0;
  SubsetPartition active;
};

Parts orthant_by_projection(const SampleSummary& s) {
  const auto proj = project(std::sqrt(static_cast<double>(s.n)) * s.mean,
                            s.cov, ConeSpec::orthant(s.p));
  return {proj.sq_norm_projection, proj.sq_norm_residual, *proj.active_subset};
}

Parts orthant_by_subsets(const SampleSummary& s) {
  const auto active = active_subset_orthant(s);
  const auto a = active.indices();
  const auto ac = active.complement();
  Parts out{0.0, 0.0, active};
  if (!a.empty()) {
    const auto block = conditional_block(s, active);
    out.u = s.n * block.mean_cond.dot(
                      block.cov_cond.llt().solve(block.mean_cond));
  }
  if (!ac.empty()) {
    const Vector xc = s.mean(ac);
    out.r = s.n * xc.dot(Matrix(s.cov(ac, ac)).llt().solve(xc));
  }
  return out;
}

Parts halfspace_by_projection(const SampleSummary& s) {
  const auto proj = project(std::sqrt(static_cast<double>(s.n)) * s.mean,
                            s.cov, ConeSpec::last_coordinate_halfspace(s.p));
  return {proj.sq_norm_projection, proj.sq_norm_residual, *proj.active_subset};
}

Parts halfspace_by_subsets(const SampleSummary& s) {
  const auto branch = active_branch_halfspace(s);
  if (branch.is_full()) {
    const double t2 = s.n * s.mean.dot(s.cov.llt().solve(s.mean));
    return {t2, 0.0, branch};
  }
  Parts out{0.0, 0.0, branch};
  if (s.p > 1) {
    const auto block = conditional_block(s, branch);
    out.u = s.n * block.mean_cond.dot(
                      block.cov_cond.llt().solve(block.mean_cond));
  }
  const double last = s.mean(s.p - 1);
  out.r = s.n * last * last / s.cov(s.p - 1, s.p - 1);
  return out;
}

template <class Projection, class Subsets>
Parts evaluate_parts(Route route, Projection by_projection, Subsets by_subsets) {
  switch (route) {
    case Route::projection: return by_projection();
    case Route::subset_formula: return by_subsets();
    case Route::cross_check: {
      const Parts a = by_projection();
      const Parts b = by_subsets();
      if (!agree(a.u, b.u) || !agree(a.r, b.r)) {
        throw SolverError(
            "projection and subset-formula statistics disagree", 0,
            std::max(std::abs(a.u - b.u), std::abs(a.r - b.r)));
      }
      return b;
    }
  }
  return by_projection();
}

TestOutcome make_outcome(Family f, const SampleSummary& s, const Parts& parts,
                         bool lrt) {
  TestOutcome out;
  out.family = f;
  out.n = s.n;
  out.p = s.p;
  out.projection_sq_norm = parts.u;
  out.residual_sq_norm = parts.r;
  out.statistic = lrt ? lrt_from_parts(parts.u, parts.r, s.n) : parts.u;
  out.active_subset = parts.active;
  return out;
}

}  // namespace

TestOutcome hotelling_t2(const SampleSummary& s) {
  require_nonsingular(s);
  const auto llt = detail::checked_llt(s.cov, SubsetPartition::full(s.p).mask());
  TestOutcome out;
  out.family = Family::T2;
  out.n = s.n;
  out.p = s.p;
  out.statistic = s.n * s.mean.dot(llt.solve(s.mean));
  out.projection_sq_norm = out.statistic;
  return out;
}

TestOutcome lrt_orthant(const SampleSummary& s, Route route) {
  require_nonsingular(s);
  const auto parts = evaluate_parts(
      route, [&] { return orthant_by_projection(s); },
      [&] { return orthant_by_subsets(s); });
  return make_outcome(Family::LRT_orthant, s, parts, true);
}

TestOutcome uit_orthant(const SampleSummary& s, Route route) {
  require_nonsingular(s);
  const auto parts = evaluate_parts(
      route, [&] { return orthant_by_projection(s); },
      [&] { return orthant_by_subsets(s); });
  return make_outcome(Family::UIT_orthant, s, parts, false);
}

TestOutcome lrt_halfspace(const SampleSummary& s, Route route) {
  require_nonsingular(s);
  const auto parts = evaluate_parts(
      route, [&] { return halfspace_by_projection(s); },
      [&] { return halfspace_by_subsets(s); });
  return make_outcome(Family::LRT_halfspace, s, parts, true);
}

TestOutcome uit_halfspace(const SampleSummary& s, Route route) {
  require_nonsingular(s);
  const auto parts = evaluate_parts(
      route, [&] { return halfspace_by_projection(s); },
      [&] { return halfspace_by_subsets(s); });
  return make_outcome(Family::UIT_halfspace, s, parts, false);
}

TestOutcome cone_uit(const SampleSummary& s, const ConeSpec& cone) {
  require_nonsingular(s);
  const auto proj =
      project(std::sqrt(static_cast<double>(s.n)) * s.mean, s.cov, cone);
  TestOutcome out;
  out.family = Family::UIT_orthant;
  out.n = s.n;
  out.p = s.p;
  out.projection_sq_norm = proj.sq_norm_projection;
  out.residual_sq_norm = proj.sq_norm_residual;
  out.statistic = proj.sq_norm_projection;
  out.active_subset = proj.active_subset;
  return out;
}

TestOutcome cone_lrt(const SampleSummary& s, const ConeSpec& cone) {
  auto out = cone_uit(s, cone);
  out.family = Family::LRT_orthant;
  out.statistic = lrt_from_parts(out.projection_sq_norm, out.residual_sq_norm, s.n);
  return out;
}

TestOutcome evaluate(Family family, const SampleSummary& s, Route route) {
  switch (family) {
    case Family::T2: return hotelling_t2(s);
    case Family::LRT_orthant: return lrt_orthant(s, route);
    case Family::UIT_orthant: return uit_orthant(s, route);
    case Family::LRT_halfspace: return lrt_halfspace(s, route);
    case Family::UIT_halfspace: return uit_halfspace(s, route);
    case Family::FUIT: break;
  }
  throw InputError("FUIT has no scalar outcome; use fuit()");
}

double StatisticSet::get(Family f) const {
  switch (f) {
    case Family::T2: return t2;
    case Family::LRT_orthant: return lrt_orthant;
    case Family::UIT_orthant: return uit_orthant;
    case Family::LRT_halfspace: return lrt_halfspace;
    case Family::UIT_halfspace: return uit_halfspace;
    case Family::FUIT: return fuit_max_t;
  }
  return 0.0;
}

StatisticSet compute_all(const SampleSummary& s) {
  require_nonsingular(s);
  const int p = s.p;
  const double n = s.n;
  const auto llt = detail::checked_llt(s.cov, SubsetPartition::full(p).mask());
  const Vector x = std::sqrt(n) * s.mean;
  const Vector sx = llt.solve(x);

  StatisticSet out;
  out.t2 = x.dot(sx);

  const Matrix precision = llt.solve(Matrix::Identity(p, p));
  const auto qp = solve_nonneg_qp(precision, -sx);
  const Vector& pi = qp.solution;
  const Vector resid = x - pi;
  const double u = std::max(0.0, pi.dot(precision * pi));
  const double r = std::max(0.0, resid.dot(precision * resid));
  out.uit_orthant = u;
  out.lrt_orthant = lrt_from_parts(u, r, s.n);
  out.orthant_active_size =
      static_cast<int>(std::count(qp.free.begin(), qp.free.end(), true));

  const double last = x(p - 1);
  const double r_half = last > 0.0 ? 0.0 : last * last / s.cov(p - 1, p - 1);
  const double u_half = std::max(0.0, out.t2 - r_half);
  out.uit_halfspace = u_half;
  out.lrt_halfspace = lrt_from_parts(u_half, r_half, s.n);

  double max_t = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < p; ++j) {
    max_t = std::max(max_t, x(j) / std::sqrt(s.cov(j, j)));
  }
  out.fuit_max_t = max_t;
  return out;
}

FuitReport fuit(const SampleSummary& s, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("alpha must lie in (0, 1)");
  }
  if (s.n < 2) throw InsufficientDataError("FUIT requires n >= 2");
  FuitReport out;
  out.alpha = alpha;
  out.alpha_star = alpha / s.p;
  out.t_values.resize(s.p);
  const double root_n = std::sqrt(static_cast<double>(s.n));
  for (int j = 0; j < s.p; ++j) {
    const double var = s.cov(j, j);
    if (!(var > 0.0)) {
      throw DegenerateVarianceError(
          "zero sample variance in coordinate " + std::to_string(j + 1), j);
    }
    out.t_values(j) = root_n * s.mean(j) / std::sqrt(var);
  }
  out.threshold = student_t_upper_quantile(out.alpha_star, s.n - 1.0);
  out.max_t = out.t_values.maxCoeff();
  out.reject = out.max_t >= out.threshold;
  return out;
}

double integrated_lr_log_ratio(const SampleSummary& s) {
  const double l = lrt_orthant(s).statistic;
  const double m = s.n - 1.0;
  return 0.5 * m * std::log1p(l / m);
}

double integrated_lr_ratio(const SampleSummary& s) {
  const double l = lrt_orthant(s).statistic;
  const double m = s.n - 1.0;
  return std::pow(1.0 + l / m, 0.5 * m);
}

double profile_log_ratio_direct(const SampleSummary& s) {
  require_nonsingular(s);
  const double m = s.n - 1.0;
  const Vector x = std::sqrt(static_cast<double>(s.n)) * s.mean;
  const double t2 = x.dot(s.cov.llt().solve(x));
  const auto proj = project(x, s.cov, ConeSpec::orthant(s.p));
  return 0.5 * m * (std::log1p(t2 / m) - std::log1p(proj.sq_norm_residual / m));
}

double directional_component(const SampleSummary& s, const Vector& b) {
  require_nonsingular(s);
  if (b.size() != s.p) throw InputError("direction has the wrong dimension");
  const auto active = active_subset_orthant(s);
  if (active.is_empty()) return 0.0;
  const auto a = active.indices();
  const Vector ba = b(a);
  if (ba.isZero(0.0)) {
    throw UndefinedDirectionError("direction vanishes on the active subset " +
                                  active.to_string());
  }
  const auto block = conditional_block(s, active);
  const double num = ba.dot(block.mean_cond);
  return s.n * num * num / ba.dot(block.cov_cond * ba);
}

Vector optimal_direction(const SampleSummary& s) {
  require_nonsingular(s);
  const auto active = active_subset_orthant(s);
  Vector b = Vector::Zero(s.p);
  if (active.is_empty()) return b;
  const auto block = conditional_block(s, active);
  const Vector ba = block.cov_cond.llt().solve(block.mean_cond);
  b(active.indices()) = ba;
  return b;
}

}  // namespace conetest
