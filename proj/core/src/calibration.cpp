#include "conetest/calibration.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>

#include "conetest/errors.hpp"
#include "conetest/nnqp.hpp"
#include "conetest/parallel.hpp"
#include "conetest/quadrature.hpp"
#include "conetest/random.hpp"
#include "conetest/special_functions.hpp"

namespace conetest {

namespace {

constexpr double kQuadratureTol = 1e-7;

void check_dims(int n, int p) {
  if (p < 1) throw InputError("dimension p must be at least 1");
  if (n <= p) {
    throw InsufficientDataError("calibration requires n > p (n = " +
                                std::to_string(n) + ", p = " +
                                std::to_string(p) + ")");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("alpha must lie in (0, 1)");
  }
}

// Null law of a statistic as a mixture over k = 0..p of chi2-ratio tails;
// `star` selects the convolved tail.
struct Mixture {
  std::vector<double> weights;
  bool star = false;
};

Mixture point_mass(int p, int k, bool star) {
  Mixture m{std::vector<double>(p + 1, 0.0), star};
  m.weights[k] = 1.0;
  return m;
}

Mixture halfspace_mixture(int p, bool star) {
  Mixture m{std::vector<double>(p + 1, 0.0), star};
  m.weights[p - 1] += 0.5;
  m.weights[p] += 0.5;
  return m;
}

double mixture_tail(const Mixture& m, double c, int n, int p) {
  if (c <= 0.0) return 1.0;
  const double u = c / (n - 1.0);
  double tail = 0.0;
  for (int k = 1; k <= p; ++k) {
    const double w = m.weights[k];
    if (w == 0.0) continue;
    tail += w * (m.star ? g_star_tail(n, k, p, u) : g_ratio_tail(k, n - p, u));
  }
  return std::clamp(tail, 0.0, 1.0);
}

// Tail just above zero: the k = 0 atom sits at zero.
double tail_limit_at_zero(const Mixture& m) {
  double total = 0.0;
  for (std::size_t k = 1; k < m.weights.size(); ++k) total += m.weights[k];
  return total;
}

double invert_tail(const Mixture& m, double alpha, int n, int p) {
  check_alpha(alpha);
  if (!(alpha < tail_limit_at_zero(m))) {
    throw CalibrationError("level " + std::to_string(alpha) +
                           " is not attainable: the null tail never exceeds " +
                           std::to_string(tail_limit_at_zero(m)));
  }
  double lo = 0.0;
  double hi = 1.0;
  while (mixture_tail(m, hi, n, p) >= alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw CalibrationError("critical value bracket diverged");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_tail(m, mid, n, p) >= alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Mixture weighted_mixture(Family family, const MixtureWeights& w) {
  if (!is_orthant_family(family)) {
    throw CalibrationError("weighted calibration applies to orthant families only");
  }
  return Mixture{w.weights, is_uit_family(family)};
}

Mixture sup_mixture(Family family, int p) {
  if (family == Family::T2) return point_mass(p, p, false);
  if (family == Family::FUIT) {
    throw CalibrationError("FUIT is calibrated by its Bonferroni threshold");
  }
  return halfspace_mixture(p, is_uit_family(family));
}

double log_det(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DomainError("matrix in the marginal density is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix to_correlation(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw MetricError("covariance must be a non-empty square matrix");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (!sigma.allFinite() || llt.info() != Eigen::Success) {
    throw MetricError("covariance is not positive definite");
  }
  const Vector d = sigma.diagonal().cwiseSqrt().cwiseInverse();
  Matrix r = d.asDiagonal() * sigma * d.asDiagonal();
  r.diagonal().setOnes();
  return 0.5 * (r + r.transpose());
}

MixtureWeights closed_form_weights(const Matrix& r) {
  const int p = static_cast<int>(r.rows());
  constexpr double pi = std::numbers::pi;
  MixtureWeights out;
  out.method = WeightMethod::closed_form;
  out.std_errors.assign(p + 1, 0.0);
  switch (p) {
    case 1:
      out.weights = {0.5, 0.5};
      break;
    case 2: {
      const double s = std::asin(r(0, 1)) / (2.0 * pi);
      out.weights = {0.25 - s, 0.5, 0.25 + s};
      break;
    }
    case 3: {
      const double sum_r =
          std::asin(r(0, 1)) + std::asin(r(0, 2)) + std::asin(r(1, 2));
      auto partial = [&](int i, int j, int k) {
        return (r(i, j) - r(i, k) * r(j, k)) /
               std::sqrt((1.0 - r(i, k) * r(i, k)) * (1.0 - r(j, k) * r(j, k)));
      };
      const double sum_partial = std::asin(partial(0, 1, 2)) +
                                 std::asin(partial(0, 2, 1)) +
                                 std::asin(partial(1, 2, 0));
      const double w3 = 0.125 + sum_r / (4.0 * pi);
      const double w0 = 0.125 - sum_partial / (4.0 * pi);
      out.weights = {w0, 0.5 - w3, 0.5 - w0, w3};
      break;
    }
    default:
      throw InputError("closed-form chi-bar weights exist only for p <= 3");
  }
  return out;
}

MixtureWeights finish_counts(const std::vector<std::int64_t>& counts,
                             const MonteCarloOptions& mc) {
  MixtureWeights out;
  out.method = WeightMethod::monte_carlo;
  out.mc_samples = mc.samples;
  out.seed = mc.seed;
  const double total = static_cast<double>(mc.samples);
  for (auto c : counts) {
    const double w = c / total;
    out.weights.push_back(w);
    out.std_errors.push_back(std::sqrt(w * (1.0 - w) / total));
  }
  return out;
}

template <class CountOne>
std::vector<std::int64_t> count_sizes(int p, const MonteCarloOptions& mc,
                                      CountOne&& one) {
  if (mc.samples < 1) throw InputError("Monte Carlo sample count must be positive");
  const int workers = resolve_workers(mc.workers);
  std::vector<std::vector<std::int64_t>> per_worker(
      workers, std::vector<std::int64_t>(p + 1, 0));
  parallel_for(mc.samples, workers,
               [&](std::int64_t begin, std::int64_t end, int worker) {
                 auto& counts = per_worker[worker];
                 for (std::int64_t i = begin; i < end; ++i) ++counts[one(i)];
               });
  std::vector<std::int64_t> counts(p + 1, 0);
  for (const auto& w : per_worker)
    for (int k = 0; k <= p; ++k) counts[k] += w[k];
  return counts;
}

constexpr std::uint64_t kChiBarStream = 0x43484942;
constexpr std::uint64_t kBayesStream = 0x42415945;

}  // namespace

double g_ratio_cdf(double a, double b, double u) {
  return 1.0 - g_ratio_tail(a, b, u);
}

double g_ratio_tail(double a, double b, double u) {
  if (!(a >= 0.0) || !(b > 0.0)) {
    throw DomainError("chi-square ratio needs a >= 0 and b > 0");
  }
  if (std::isnan(u)) throw DomainError("chi-square ratio argument is NaN");
  if (u <= 0.0) return 1.0;
  if (a == 0.0) return 0.0;
  if (std::isinf(u)) return 0.0;
  // chi2_a / chi2_b > u  <=>  chi2_b / (chi2_a + chi2_b) < 1 / (1 + u)
  return regularized_incomplete_beta(0.5 * b, 0.5 * a, 1.0 / (1.0 + u));
}

double g_star_tail(int n, int a, int p, double u) {
  if (n - p <= 0) throw DomainError("convolved tail requires n > p");
  if (a < 0 || a > p) throw DomainError("convolved tail requires 0 <= a <= p");
  if (u <= 0.0) return 1.0;
  if (a == 0) return 0.0;
  if (a == p) return g_ratio_tail(p, n - p, u);

  const double alpha = 0.5 * (p - a);
  const double beta = 0.5 * (n - p + a);
  const double norm = 1.0 / (alpha * std::exp(log_beta(alpha, beta)));
  auto integrand = [&](double v) {
    const double y = std::pow(v, 1.0 / alpha);
    const double one_minus = 1.0 - y;
    if (one_minus <= 0.0) return 0.0;
    return norm * std::pow(one_minus, beta - 1.0) *
           g_ratio_tail(a, n - p, u * one_minus);
  };
  const auto result = integrate_adaptive(integrand, 0.0, 1.0, kQuadratureTol);
  return std::clamp(result.value, 0.0, 1.0);
}

std::string to_string(Calibration c) {
  switch (c) {
    case Calibration::exact_halfspace: return "exact";
    case Calibration::sup_sigma: return "sup";
    case Calibration::weighted: return "weighted";
  }
  return "unknown";
}

Calibration calibration_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "exact" || lower == "exact_halfspace") return Calibration::exact_halfspace;
  if (lower == "sup" || lower == "sup_sigma") return Calibration::sup_sigma;
  if (lower == "bayes" || lower == "weighted" || lower == "bayes_weighted") {
    return Calibration::weighted;
  }
  throw InputError("unknown calibration '" + s + "'");
}

MixtureWeights chi_bar_weights(const Matrix& sigma, WeightMethod method,
                               const MonteCarloOptions& mc) {
  const Matrix r = to_correlation(sigma);
  const int p = static_cast<int>(r.rows());
  if (method == WeightMethod::closed_form) return closed_form_weights(r);

  const OrthantClassifier classifier(r);
  const Matrix l = cholesky_factor(r);
  const auto counts = count_sizes(p, mc, [&](std::int64_t i) {
    Rng rng = Rng::substream(mc.seed, kChiBarStream, static_cast<std::uint64_t>(i));
    const Vector z = l * standard_normal_vector(rng, p);
    return std::popcount(classifier.classify(z));
  });
  return finish_counts(counts, mc);
}

MixtureWeights chi_bar_weights(const Matrix& sigma, const MonteCarloOptions& mc) {
  return chi_bar_weights(
      sigma, sigma.rows() <= 3 ? WeightMethod::closed_form : WeightMethod::monte_carlo,
      mc);
}

PriorSpec PriorSpec::inverse_wishart(Matrix gamma, double m) {
  const auto p = gamma.rows();
  if (p < 1 || gamma.cols() != p || !gamma.allFinite()) {
    throw InputError("prior scale must be a finite square matrix");
  }
  if (!gamma.isApprox(gamma.transpose(), 1e-12)) {
    throw InputError("prior scale must be symmetric");
  }
  if (Eigen::LLT<Matrix>(gamma).info() != Eigen::Success) {
    throw InputError("prior scale must be positive definite");
  }
  if (!(m > p - 1.0)) {
    throw InputError("prior degrees of freedom must exceed p - 1");
  }
  PriorSpec out;
  out.kind = Kind::inverse_wishart;
  out.scale = std::move(gamma);
  out.df = m;
  return out;
}

PriorSpec PriorSpec::haar() { return PriorSpec{}; }

double null_tail(Family family, double c, int n, int p,
                 const MixtureWeights* weights) {
  check_dims(n, p);
  if (is_orthant_family(family)) {
    if (weights == nullptr) {
      throw CalibrationError("orthant null tails need mixture weights");
    }
    if (weights->dim() != p) {
      throw CalibrationError("mixture weights have the wrong dimension");
    }
    return mixture_tail(weighted_mixture(family, *weights), c, n, p);
  }
  return mixture_tail(sup_mixture(family, p), c, n, p);
}

double sup_null_tail(Family family, double c, int n, int p) {
  check_dims(n, p);
  return mixture_tail(sup_mixture(family, p), c, n, p);
}

CriticalValue sup_critical_value(Family family, double alpha, int n, int p) {
  check_dims(n, p);
  check_alpha(alpha);
  CriticalValue out{0.0, alpha, family, Calibration::sup_sigma};
  if (family == Family::FUIT) {
    out.value = student_t_upper_quantile(alpha / p, n - 1.0);
    return out;
  }
  out.value = invert_tail(sup_mixture(family, p), alpha, n, p);
  return out;
}

CriticalValue exact_critical_value(Family family, double alpha, int n, int p) {
  if (is_orthant_family(family) || family == Family::FUIT) {
    throw CalibrationError("exact calibration is available for T2 and the "
                           "halfspace families only");
  }
  auto out = sup_critical_value(family, alpha, n, p);
  out.calibration = Calibration::exact_halfspace;
  return out;
}

CriticalValue weighted_critical_value(Family family, double alpha, int n,
                                      const MixtureWeights& weights) {
  const int p = weights.dim();
  check_dims(n, p);
  CriticalValue out{0.0, alpha, family, Calibration::weighted};
  out.value = invert_tail(weighted_mixture(family, weights), alpha, n, p);
  return out;
}

MixtureWeights bayes_weights_b1(int n, int p, const PriorSpec& prior,
                                const MonteCarloOptions& mc) {
  check_dims(n, p);
  if (prior.kind != PriorSpec::Kind::inverse_wishart) {
    throw UnsupportedCalibrationError(
        "Bayes weights need a proper prior; the Haar weight has no sampling law");
  }
  if (prior.scale.rows() != p) {
    throw InputError("prior scale dimension does not match p");
  }
  const Vector zero = Vector::Zero(p);
  const double root_n = std::sqrt(static_cast<double>(n));
  const auto counts = count_sizes(p, mc, [&](std::int64_t i) {
    Rng rng = Rng::substream(mc.seed, kBayesStream, static_cast<std::uint64_t>(i));
    const Matrix sigma = inverse_wishart(rng, prior.scale, prior.df);
    const SampleSummary s = draw_summary(rng, n, zero, cholesky_factor(sigma));
    const Eigen::LLT<Matrix> llt(s.cov);
    const Matrix precision = llt.solve(Matrix::Identity(p, p));
    const auto qp = solve_nonneg_qp(precision, -(precision * (root_n * s.mean)));
    return static_cast<int>(std::count(qp.free.begin(), qp.free.end(), true));
  });
  return finish_counts(counts, mc);
}

CriticalValue bayes_critical_value(Family family, double alpha, int n,
                                   const MixtureWeights& b1) {
  return weighted_critical_value(family, alpha, n, b1);
}

double marginal_logdensity(const SampleSummary& s, const Vector& theta,
                           const PriorSpec& prior) {
  const int n = s.n;
  const int p = s.p;
  if (theta.size() != p) throw InputError("theta has the wrong dimension");
  const Vector d = s.mean - theta;
  const double log_det_s = log_det(s.cov);
  if (prior.kind == PriorSpec::Kind::inverse_wishart) {
    if (prior.scale.rows() != p) {
      throw InputError("prior scale dimension does not match p");
    }
    const double m = prior.df;
    const Matrix w = s.cov + n * d * d.transpose();
    return 0.5 * m * log_det(prior.scale) + 0.5 * (n - p - 2.0) * log_det_s -
           0.5 * (n + m - 1.0) * log_det(w + prior.scale);
  }
  const Matrix v = (n - 1.0) * s.cov + n * d * d.transpose();
  return 0.5 * (n - p - 2.0) * log_det_s - 0.5 * n * log_det(v);
}

double p_value(const TestOutcome& outcome, Calibration mode,
               const MixtureWeights* weights) {
  const Family f = outcome.family;
  const int n = outcome.n;
  const int p = outcome.p;
  check_dims(n, p);
  if (f == Family::FUIT) {
    if (mode == Calibration::weighted) {
      throw CalibrationError("FUIT has no weighted calibration");
    }
    return std::min(1.0, p * student_t_sf(outcome.statistic, n - 1.0));
  }
  if (!(outcome.statistic > 0.0)) return 1.0;
  switch (mode) {
    case Calibration::exact_halfspace:
      if (is_orthant_family(f)) {
        throw CalibrationError("exact calibration does not apply to orthant tests");
      }
      return sup_null_tail(f, outcome.statistic, n, p);
    case Calibration::sup_sigma:
      return sup_null_tail(f, outcome.statistic, n, p);
    case Calibration::weighted:
      if (!is_orthant_family(f)) {
        throw CalibrationError("weighted calibration applies to orthant tests only");
      }
      if (weights == nullptr) {
        throw CalibrationError("weighted calibration needs mixture weights");
      }
      return null_tail(f, outcome.statistic, n, p, weights);
  }
  return 1.0;
}

}  // namespace conetest
