#include "conetest/power_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conetest/cone.hpp"
#include "conetest/errors.hpp"
#include "conetest/parallel.hpp"
#include "conetest/random.hpp"

namespace conetest {

namespace {

constexpr std::uint64_t kSigmaStream = 0x5349474d;
constexpr std::uint64_t kConvexityStream = 0x434f4e56;
constexpr std::uint64_t kWitnessStream = 0x57495443;
constexpr std::uint64_t kCompoundStream = 0x434f4d50;
// Replicate streams are keyed by sigma id offset from the named streams.
constexpr std::uint64_t kReplicateStreamBase = 0x1000;

double rate_se(double rate, std::int64_t reps) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

bool rejects(const StatisticSet& stats, Family family, double critical) {
  return stats.get(family) >= critical;
}

// Lazily computed Bayes weights shared by all tests of one run.
class CriticalResolver {
 public:
  CriticalResolver(int n, int p, double alpha, std::optional<PriorSpec> prior,
                   MonteCarloOptions mc)
      : n_(n), p_(p), alpha_(alpha), prior_(std::move(prior)), mc_(mc) {}

  double operator()(const TestSpec& t, const Matrix& sigma) {
    switch (t.calibration) {
      case Calibration::exact_halfspace:
        return exact_critical_value(t.family, alpha_, n_, p_).value;
      case Calibration::sup_sigma:
        return sup_critical_value(t.family, alpha_, n_, p_).value;
      case Calibration::weighted:
        return weighted_critical_value(t.family, alpha_, n_, weights(sigma)).value;
    }
    return 0.0;
  }

  MixtureWeights weights(const Matrix& sigma) {
    if (prior_) {
      if (!b1_) b1_ = bayes_weights_b1(n_, p_, *prior_, mc_);
      return *b1_;
    }
    return chi_bar_weights(sigma, mc_);
  }

 private:
  int n_;
  int p_;
  double alpha_;
  std::optional<PriorSpec> prior_;
  MonteCarloOptions mc_;
  std::optional<MixtureWeights> b1_;
};

struct Draw {
  Vector shift;  // L z / sqrt(n)
  Matrix cov;
};

Draw draw_null(Rng& rng, int n, const Matrix& factor) {
  const int p = static_cast<int>(factor.rows());
  const SampleSummary s = draw_summary(rng, n, Vector::Zero(p), factor);
  return {s.mean, s.cov};
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
}

}  // namespace

SigmaSource SigmaSource::fixed(Matrix sigma) {
  SigmaSource s;
  s.kind = Kind::fixed;
  s.matrices = {std::move(sigma)};
  return s;
}

SigmaSource SigmaSource::random_correlation(std::uint64_t seed, int count,
                                            double df) {
  SigmaSource s;
  s.kind = Kind::random_correlation;
  s.seed = seed;
  s.count = count;
  s.df = df;
  return s;
}

SigmaSource SigmaSource::sequence(std::vector<Matrix> sigmas) {
  SigmaSource s;
  s.kind = Kind::sequence;
  s.matrices = std::move(sigmas);
  return s;
}

std::vector<Matrix> resolve_sigmas(const SigmaSource& source, int p) {
  std::vector<Matrix> out;
  switch (source.kind) {
    case SigmaSource::Kind::fixed:
    case SigmaSource::Kind::sequence:
      out = source.matrices;
      break;
    case SigmaSource::Kind::random_correlation: {
      if (source.count < 1) throw InputError("sigma count must be positive");
      const double df = source.df > 0.0 ? source.df : p + 1.0;
      for (int i = 0; i < source.count; ++i) {
        Rng rng = Rng::substream(source.seed, kSigmaStream, i);
        out.push_back(conetest::random_correlation(rng, p, df));
      }
      break;
    }
  }
  if (out.empty()) throw InputError("no covariance matrices configured");
  for (const auto& m : out) {
    if (m.rows() != p || m.cols() != p) {
      throw InputError("covariance matrix dimension does not match p");
    }
    cholesky_factor(m);
  }
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.p < 1) throw InputError("p must be at least 1");
  if (cfg.n <= cfg.p) throw InputError("n must exceed p");
  if (cfg.replications < 1) throw InputError("replications must be at least 1");
  check_alpha(cfg.alpha);
  if (cfg.theta_grid.empty()) throw InputError("theta grid is empty");
  const auto orthant = ConeSpec::orthant(cfg.p);
  const auto halfspace = ConeSpec::last_coordinate_halfspace(cfg.p);
  for (std::size_t i = 0; i < cfg.theta_grid.size(); ++i) {
    const Vector& theta = cfg.theta_grid[i];
    if (theta.size() != cfg.p) {
      throw InputError("theta " + std::to_string(i) + " has the wrong dimension");
    }
    for (const auto& t : cfg.tests) {
      const bool ok = is_orthant_family(t.family)     ? orthant.contains(theta)
                      : is_halfspace_family(t.family) ? halfspace.contains(theta)
                                                      : true;
      if (!ok) {
        throw InputError("theta " + std::to_string(i) +
                         " lies outside the alternative of " + to_string(t.family));
      }
    }
  }
}

PowerTable simulate_power(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.tests.empty()) throw InputError("no tests configured");
  const auto sigmas = resolve_sigmas(cfg.sigma_source, cfg.p);
  const int ns = static_cast<int>(sigmas.size());
  const int nt = static_cast<int>(cfg.theta_grid.size());
  const int nk = static_cast<int>(cfg.tests.size());

  std::vector<Matrix> factors;
  std::vector<double> critical(ns * nk);
  CriticalResolver resolve(cfg.n, cfg.p, cfg.alpha, cfg.prior, cfg.weight_mc);
  for (int j = 0; j < ns; ++j) {
    factors.push_back(cholesky_factor(sigmas[j]));
    for (int k = 0; k < nk; ++k) critical[j * nk + k] = resolve(cfg.tests[k], sigmas[j]);
  }

  const std::size_t cells = static_cast<std::size_t>(ns) * nt * nk;
  const int workers = resolve_workers(cfg.workers);
  std::vector<std::vector<std::int64_t>> per_worker(
      workers, std::vector<std::int64_t>(cells, 0));
  parallel_for(cfg.replications, workers,
               [&](std::int64_t begin, std::int64_t end, int w) {
                 auto& counts = per_worker[w];
                 for (std::int64_t r = begin; r < end; ++r) {
                   for (int j = 0; j < ns; ++j) {
                     Rng rng = Rng::substream(cfg.seed, kReplicateStreamBase + j, r);
                     const Draw d = draw_null(rng, cfg.n, factors[j]);
                     for (int t = 0; t < nt; ++t) {
                       SampleSummary s{cfg.n, cfg.p, cfg.theta_grid[t] + d.shift, d.cov};
                       const auto stats = compute_all(s);
                       for (int k = 0; k < nk; ++k) {
                         if (rejects(stats, cfg.tests[k].family, critical[j * nk + k])) {
                           ++counts[(static_cast<std::size_t>(j) * nt + t) * nk + k];
                         }
                       }
                     }
                   }
                 }
               });

  PowerTable table;
  table.seed = cfg.seed;
  table.replications = cfg.replications;
  for (int t = 0; t < nt; ++t) {
    for (int j = 0; j < ns; ++j) {
      for (int k = 0; k < nk; ++k) {
        const std::size_t cell = (static_cast<std::size_t>(j) * nt + t) * nk + k;
        std::int64_t hits = 0;
        for (const auto& w : per_worker) hits += w[cell];
        PowerRow row;
        row.theta_id = t;
        row.theta = cfg.theta_grid[t];
        row.sigma_id = j;
        row.test = cfg.tests[k];
        row.critical_value = critical[j * nk + k];
        row.rejections = hits;
        row.replications = cfg.replications;
        row.rejection_rate = static_cast<double>(hits) / cfg.replications;
        row.std_error = rate_se(row.rejection_rate, cfg.replications);
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

DominationReport domination_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto orthant = ConeSpec::orthant(cfg.p);
  for (const auto& theta : cfg.theta_grid) {
    if (!orthant.contains(theta)) {
      throw InputError("domination grid points must lie in the orthant");
    }
  }
  std::vector<std::pair<Family, Family>> pairs;
  for (const auto& t : cfg.tests) {
    if (t.family == Family::UIT_orthant) pairs.emplace_back(t.family, Family::UIT_halfspace);
    if (t.family == Family::LRT_orthant) pairs.emplace_back(t.family, Family::LRT_halfspace);
  }
  if (pairs.empty()) {
    pairs = {{Family::UIT_orthant, Family::UIT_halfspace},
             {Family::LRT_orthant, Family::LRT_halfspace}};
  }
  const int np = static_cast<int>(pairs.size());
  std::vector<double> critical;
  for (const auto& pr : pairs) {
    critical.push_back(sup_critical_value(pr.first, cfg.alpha, cfg.n, cfg.p).value);
  }

  const auto sigmas = resolve_sigmas(cfg.sigma_source, cfg.p);
  const int ns = static_cast<int>(sigmas.size());
  const int nt = static_cast<int>(cfg.theta_grid.size());
  std::vector<Matrix> factors;
  for (const auto& s : sigmas) factors.push_back(cholesky_factor(s));

  // Per cell: orthant rejections, halfspace rejections, orthant-only,
  // halfspace-only.
  constexpr int kFields = 4;
  const std::size_t cells = static_cast<std::size_t>(ns) * nt * np;
  const int workers = resolve_workers(cfg.workers);
  std::vector<std::vector<std::int64_t>> per_worker(
      workers, std::vector<std::int64_t>(cells * kFields, 0));
  parallel_for(cfg.replications, workers,
               [&](std::int64_t begin, std::int64_t end, int w) {
                 auto& counts = per_worker[w];
                 for (std::int64_t r = begin; r < end; ++r) {
                   for (int j = 0; j < ns; ++j) {
                     Rng rng = Rng::substream(cfg.seed, kReplicateStreamBase + j, r);
                     const Draw d = draw_null(rng, cfg.n, factors[j]);
                     for (int t = 0; t < nt; ++t) {
                       SampleSummary s{cfg.n, cfg.p, cfg.theta_grid[t] + d.shift, d.cov};
                       const auto stats = compute_all(s);
                       for (int k = 0; k < np; ++k) {
                         const bool o = rejects(stats, pairs[k].first, critical[k]);
                         const bool h = rejects(stats, pairs[k].second, critical[k]);
                         auto* c = &counts[((static_cast<std::size_t>(j) * nt + t) * np + k) * kFields];
                         c[0] += o;
                         c[1] += h;
                         c[2] += o && !h;
                         c[3] += h && !o;
                       }
                     }
                   }
                 }
               });

  DominationReport report;
  report.seed = cfg.seed;
  report.replications = cfg.replications;
  const double reps = static_cast<double>(cfg.replications);
  for (int t = 0; t < nt; ++t) {
    for (int j = 0; j < ns; ++j) {
      for (int k = 0; k < np; ++k) {
        const std::size_t base = ((static_cast<std::size_t>(j) * nt + t) * np + k) * kFields;
        std::int64_t c[kFields] = {0, 0, 0, 0};
        for (const auto& w : per_worker)
          for (int f = 0; f < kFields; ++f) c[f] += w[base + f];
        DominationRow row;
        row.theta_id = t;
        row.theta = cfg.theta_grid[t];
        row.sigma_id = j;
        row.orthant_family = pairs[k].first;
        row.halfspace_family = pairs[k].second;
        row.critical_value = critical[k];
        row.replications = cfg.replications;
        row.orthant_rejections = c[0];
        row.halfspace_rejections = c[1];
        row.implication_violations = c[2];
        row.orthant_power = c[0] / reps;
        row.halfspace_power = c[1] / reps;
        row.difference = row.halfspace_power - row.orthant_power;
        // Paired differences take values in {-1, 0, 1}; c[2] + c[3] are nonzero.
        const double second_moment = (c[2] + c[3]) / reps;
        const double var = cfg.replications > 1
                               ? (second_moment - row.difference * row.difference) *
                                     reps / (reps - 1.0)
                               : 0.0;
        row.difference_se = std::sqrt(std::max(0.0, var) / reps);
        row.flagged = row.difference < -3.0 * row.difference_se;
        report.total_violations += row.implication_violations;
        report.any_flagged = report.any_flagged || row.flagged;
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

std::string to_string(CovariancePairing c) {
  return c == CovariancePairing::joint ? "joint" : "shared";
}

std::string to_string(Region r) {
  switch (r) {
    case Region::UIT_orthant_acceptance: return "UIT_orthant_acceptance";
    case Region::UIT_halfspace_acceptance: return "UIT_halfspace_acceptance";
    case Region::LRT_orthant_acceptance: return "LRT_orthant_acceptance";
  }
  return "unknown";
}

namespace {

ConvexityReport uit_convexity(const ConvexityConfig& cfg, double critical) {
  const Family family = cfg.region == Region::UIT_orthant_acceptance
                            ? Family::UIT_orthant
                            : Family::UIT_halfspace;
  const int p = cfg.p;
  const int n = cfg.n;

  // A random accepted sample, pushed towards the boundary (U is homogeneous
  // of degree 2 in xbar).
  auto random_cov = [&](Rng& rng) {
    const Matrix r = conetest::random_correlation(rng, p, p + 1.0);
    return Matrix(wishart(rng, r, n - 1.0) / (n - 1.0));
  };
  auto member = [&](Rng& rng, const Matrix& cov) {
    SampleSummary s{n, p, standard_normal_vector(rng, p), cov};
    const double u = compute_all(s).get(family);
    const double frac = rng.uniform() < 0.5 ? 1.0 - 1e-3 * rng.uniform()
                                            : rng.uniform();
    if (u > 0.0) s.mean *= std::sqrt(frac * critical / u);
    return s;
  };

  const int workers = resolve_workers(cfg.workers);
  struct Local {
    std::int64_t violations = 0;
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    std::optional<ConvexityWitness> witness;
  };
  std::vector<Local> local(workers);
  parallel_for(cfg.trials, workers, [&](std::int64_t begin, std::int64_t end, int w) {
    for (std::int64_t i = begin; i < end; ++i) {
      Rng rng = Rng::substream(cfg.seed, kConvexityStream, i);
      const bool shared = cfg.pairing == CovariancePairing::shared;
      const Matrix cov_a = random_cov(rng);
      const SampleSummary a = member(rng, cov_a);
      const SampleSummary b = member(rng, shared ? cov_a : random_cov(rng));
      const SampleSummary mid{n, p, 0.5 * (a.mean + b.mean), 0.5 * (a.cov + b.cov)};
      const double sm = compute_all(mid).get(family);
      if (sm > critical * (1.0 + 1e-9)) {
        ++local[w].violations;
        if (i < local[w].first) {
          local[w].first = i;
          local[w].witness = ConvexityWitness{
              a.mean, a.cov, b.mean, b.cov, compute_all(a).get(family),
              compute_all(b).get(family), sm};
        }
      }
    }
  });

  ConvexityReport report;
  report.trials = cfg.trials;
  std::int64_t first = std::numeric_limits<std::int64_t>::max();
  for (auto& l : local) {
    report.violations += l.violations;
    if (l.witness && l.first < first) {
      first = l.first;
      report.witness = l.witness;
    }
  }
  return report;
}

ConvexityReport lrt_witness_search(const ConvexityConfig& cfg, double critical) {
  const int p = cfg.p;
  const int n = cfg.n;
  Matrix cov;
  if (cfg.fixed_cov) {
    cov = *cfg.fixed_cov;
    if (cov.rows() != p || cov.cols() != p) {
      throw InputError("fixed covariance dimension does not match p");
    }
  } else {
    cov = Vector::LinSpaced(p, 1.0, p).asDiagonal();
  }
  const auto orthant = ConeSpec::orthant(p);
  const double root_n = std::sqrt(static_cast<double>(n));

  // A point just inside the boundary along a random ray; L grows along rays
  // as r^2 U / (1 + r^2 R / (n - 1)).
  auto boundary_point = [&](Rng& rng) -> std::optional<Vector> {
    const Vector d = standard_normal_vector(rng, p);
    const auto proj = project(root_n * d, cov, orthant);
    const double denom =
        proj.sq_norm_projection - critical * proj.sq_norm_residual / (n - 1.0);
    if (!(denom > 0.0)) return std::nullopt;  // the ray never leaves the region
    return d * (std::sqrt(critical / denom) * (1.0 - 1e-6));
  };
  auto lrt = [&](const Vector& mean) {
    return compute_all(SampleSummary{n, p, mean, cov}).lrt_orthant;
  };

  ConvexityReport report;
  for (std::int64_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Rng rng = Rng::substream(cfg.seed, kWitnessStream, attempt);
    const auto a = boundary_point(rng);
    const auto b = boundary_point(rng);
    if (!a || !b) continue;
    ++report.trials;
    const Vector mid = 0.5 * (*a + *b);
    const double sm = lrt(mid);
    if (sm > critical * (1.0 + 1e-9)) {
      report.violations = 1;
      report.witness = ConvexityWitness{*a, cov, *b, cov, lrt(*a), lrt(*b), sm};
      break;
    }
  }
  return report;
}

}  // namespace

ConvexityReport convexity_probe(const ConvexityConfig& cfg) {
  if (cfg.p < 1 || cfg.n <= cfg.p) throw InputError("convexity probe needs n > p >= 1");
  if (cfg.trials < 0 || cfg.max_attempts < 0) {
    throw InputError("trial counts must be nonnegative");
  }
  const Family family = cfg.region == Region::LRT_orthant_acceptance
                            ? Family::LRT_orthant
                            : cfg.region == Region::UIT_orthant_acceptance
                                  ? Family::UIT_orthant
                                  : Family::UIT_halfspace;
  const double critical = sup_critical_value(family, cfg.alpha, cfg.n, cfg.p).value;
  ConvexityReport report = cfg.region == Region::LRT_orthant_acceptance
                               ? lrt_witness_search(cfg, critical)
                               : uit_convexity(cfg, critical);
  report.region = cfg.region;
  report.pairing = cfg.pairing;
  report.p = cfg.p;
  report.n = cfg.n;
  report.critical_value = critical;
  return report;
}

SimilarityReport similarity_probe(const SimilarityConfig& cfg) {
  if (cfg.p < 1 || cfg.n <= cfg.p) throw InputError("similarity probe needs n > p >= 1");
  if (cfg.replications < 1) throw InputError("replications must be at least 1");
  check_alpha(cfg.alpha);
  if (cfg.compound && !cfg.prior) {
    throw InputError("compound null rates need a prior");
  }
  if (cfg.test.calibration == Calibration::weighted && cfg.compound &&
      cfg.prior->kind != PriorSpec::Kind::inverse_wishart) {
    throw UnsupportedCalibrationError("compound sampling needs an inverse-Wishart prior");
  }

  SimilarityReport report;
  report.test = cfg.test;
  report.alpha = cfg.alpha;

  if (!cfg.sigmas.empty()) {
    ExperimentConfig ec;
    ec.p = cfg.p;
    ec.n = cfg.n;
    ec.sigma_source = SigmaSource::sequence(cfg.sigmas);
    ec.theta_grid = {Vector::Zero(cfg.p)};
    ec.alpha = cfg.alpha;
    ec.replications = cfg.replications;
    ec.seed = cfg.seed;
    ec.tests = {cfg.test};
    ec.prior = cfg.prior;
    ec.weight_mc = cfg.weight_mc;
    ec.workers = cfg.workers;
    const auto table = simulate_power(ec);
    for (const auto& row : table.rows) {
      report.rows.push_back(SimilarityRow{row.sigma_id, row.critical_value,
                                          row.rejections, row.replications,
                                          row.rejection_rate, row.std_error});
    }
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      for (std::size_t j = i + 1; j < report.rows.size(); ++j) {
        const auto& a = report.rows[i];
        const auto& b = report.rows[j];
        const double se = std::hypot(a.std_error, b.std_error);
        const double z = se > 0.0 ? std::abs(a.rejection_rate - b.rejection_rate) / se
                         : a.rejection_rate == b.rejection_rate
                             ? 0.0
                             : std::numeric_limits<double>::infinity();
        report.max_pairwise_z = std::max(report.max_pairwise_z, z);
      }
    }
  }

  if (cfg.compound) {
    const PriorSpec& prior = *cfg.prior;
    if (prior.kind != PriorSpec::Kind::inverse_wishart) {
      throw UnsupportedCalibrationError("compound sampling needs an inverse-Wishart prior");
    }
    CriticalResolver resolve(cfg.n, cfg.p, cfg.alpha, cfg.prior, cfg.weight_mc);
    const double critical = resolve(cfg.test, prior.scale);
    if (cfg.test.calibration == Calibration::weighted) report.weights = resolve.weights(prior.scale);
    const int workers = resolve_workers(cfg.workers);
    std::vector<std::int64_t> hits(workers, 0);
    parallel_for(cfg.replications, workers,
                 [&](std::int64_t begin, std::int64_t end, int w) {
                   for (std::int64_t r = begin; r < end; ++r) {
                     Rng rng = Rng::substream(cfg.seed, kCompoundStream, r);
                     const Matrix sigma = inverse_wishart(rng, prior.scale, prior.df);
                     const SampleSummary s = draw_summary(
                         rng, cfg.n, Vector::Zero(cfg.p), cholesky_factor(sigma));
                     if (rejects(compute_all(s), cfg.test.family, critical)) ++hits[w];
                   }
                 });
    SimilarityRow row;
    row.sigma_id = -1;
    row.critical_value = critical;
    for (auto h : hits) row.rejections += h;
    row.replications = cfg.replications;
    row.rejection_rate = static_cast<double>(row.rejections) / cfg.replications;
    row.std_error = rate_se(row.rejection_rate, cfg.replications);
    report.compound = row;
  } else if (cfg.test.calibration == Calibration::weighted && cfg.prior) {
    CriticalResolver resolve(cfg.n, cfg.p, cfg.alpha, cfg.prior, cfg.weight_mc);
    report.weights = resolve.weights(cfg.prior->scale);
  }
  return report;
}

}  // namespace conetest
