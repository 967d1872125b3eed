#include "cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <conetest/errors.hpp>
#include <conetest/parallel.hpp>
#include <conetest/power_lab.hpp>
#include <conetest/special_functions.hpp>

#include "cli/config.hpp"
#include "cli/csv.hpp"

namespace conetest::cli {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

enum class ConeKind { orthant, halfspace, polyhedral };

ConeKind parse_cone(const std::string& s) {
  const auto c = lower(s);
  if (c == "orthant") return ConeKind::orthant;
  if (c == "halfspace") return ConeKind::halfspace;
  if (c == "polyhedral") return ConeKind::polyhedral;
  throw UsageError("--cone must be orthant, halfspace or polyhedral, got '" + s + "'");
}

struct ResolvedChoice {
  ConeKind cone = ConeKind::orthant;
  Family family = Family::UIT_orthant;
};

Family short_family(const std::string& f, ConeKind cone) {
  const bool half = cone == ConeKind::halfspace;
  if (f == "t2") return Family::T2;
  if (f == "fuit") {
    if (half) throw UsageError("fuit combines coordinatewise tests; use the orthant");
    return Family::FUIT;
  }
  if (f == "lrt") return half ? Family::LRT_halfspace : Family::LRT_orthant;
  if (f == "uit") return half ? Family::UIT_halfspace : Family::UIT_orthant;
  throw UsageError("unknown --family '" + f + "'");
}

// For the polyhedral cone the family is resolved after reduction, so the
// orthant spelling stands in for "the cone's own family".
ResolvedChoice resolve_choice(const FamilyChoice& c) {
  ResolvedChoice out;
  const auto f = lower(c.family);
  if (f == "t2" || f == "lrt" || f == "uit" || f == "fuit") {
    out.cone = c.cone ? parse_cone(*c.cone) : ConeKind::orthant;
    out.family = short_family(f, out.cone);
    return out;
  }
  try {
    out.family = family_from_string(f);
  } catch (const InputError&) {
    throw UsageError("unknown --family '" + c.family + "'");
  }
  const ConeKind implied = is_halfspace_family(out.family) ? ConeKind::halfspace
                                                           : ConeKind::orthant;
  out.cone = implied;
  if (c.cone) {
    const ConeKind given = parse_cone(*c.cone);
    const bool neutral = out.family == Family::T2;
    if (given != implied && !neutral) {
      throw UsageError("--family " + c.family + " does not match --cone " + *c.cone);
    }
    out.cone = given;
  }
  return out;
}

std::string cone_name(ConeKind k) {
  switch (k) {
    case ConeKind::orthant: return "orthant";
    case ConeKind::halfspace: return "halfspace";
    case ConeKind::polyhedral: return "polyhedral";
  }
  return "";
}

Calibration parse_calibration(const std::string& s) {
  const auto c = lower(s);
  if (c == "sup") return Calibration::sup_sigma;
  if (c == "exact") return Calibration::exact_halfspace;
  if (c == "bayes") return Calibration::weighted;
  throw UsageError("--calibration must be sup, bayes or exact, got '" + s + "'");
}

std::string calibration_name(Calibration c) {
  switch (c) {
    case Calibration::sup_sigma: return "sup";
    case Calibration::exact_halfspace: return "exact";
    case Calibration::weighted: return "bayes";
  }
  return "";
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "--alpha must lie in (0, 1), got " << alpha;
    throw UsageError(msg.str());
  }
}

void check_calibration(Family f, Calibration c) {
  if (c == Calibration::weighted && !is_orthant_family(f)) {
    throw UsageError("bayes calibration applies to the orthant LRT and UIT only");
  }
  if (c == Calibration::exact_halfspace && (is_orthant_family(f) || f == Family::FUIT)) {
    throw UsageError("exact calibration applies to t2 and the halfspace families only");
  }
}

PriorSpec load_prior(const PriorOptions& o, int p, RunManifest& manifest, Json& echo) {
  Matrix scale = Matrix::Identity(p, p);
  if (!o.scale_path.empty()) {
    add_input(manifest, o.scale_path);
    scale = read_csv(o.scale_path).values;
    if (scale.rows() != p || scale.cols() != p) {
      throw InputError("--prior-scale must be " + std::to_string(p) + "x" +
                       std::to_string(p));
    }
  }
  const double df = o.df.value_or(p + 2.0);
  echo = Json{{"scale", to_json(scale)}, {"df", df}};
  return PriorSpec::inverse_wishart(scale, df);
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
  if (!seed) throw UsageError("bayes calibration needs --seed");
  return *seed;
}

void check_mc(std::int64_t samples) {
  if (samples < 1) throw UsageError("--mc-samples must be positive");
}

Json subset_json(const std::optional<SubsetPartition>& a) {
  if (!a) return nullptr;
  Json idx = Json::array();
  for (int i : a->indices()) idx.push_back(i + 1);
  return Json{{"label", a->to_string()}, {"indices", idx}};
}

// Rows of a (q-1) x q matrix spanning the orthogonal complement of b.
Matrix null_space_rows(const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullV);
  const Matrix& v = svd.matrixV();
  return v.rightCols(v.cols() - 1).transpose();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Json run_test(const TestOptions& opts) {
  check_alpha(opts.alpha);
  check_mc(opts.mc_samples);
  ResolvedChoice choice = resolve_choice(opts.choice);
  const Calibration calibration = parse_calibration(opts.calibration);
  if (choice.cone == ConeKind::polyhedral && opts.constraints_path.empty()) {
    throw UsageError("--cone polyhedral needs --constraints");
  }
  if (choice.cone != ConeKind::polyhedral && !opts.constraints_path.empty()) {
    throw UsageError("--constraints applies to --cone polyhedral only");
  }

  RunManifest manifest;
  manifest.command = "test";
  manifest.seed = opts.seed;
  add_input(manifest, opts.data_path);
  const CsvMatrix csv = read_csv(opts.data_path);
  Matrix data = csv.values;
  const int p_raw = static_cast<int>(data.cols());
  Json model{{"cone", cone_name(choice.cone)}, {"dimension", p_raw}};

  if (choice.cone == ConeKind::polyhedral) {
    add_input(manifest, opts.constraints_path);
    const Matrix b2 = read_csv(opts.constraints_path).values;
    Matrix b1 = Matrix::Identity(p_raw, p_raw);
    if (!opts.equalities_path.empty()) {
      add_input(manifest, opts.equalities_path);
      b1 = read_csv(opts.equalities_path).values;
    }
    if (b2.cols() != p_raw || b1.cols() != p_raw) {
      throw InputError("constraint matrices need " + std::to_string(p_raw) +
                       " columns to match the data");
    }
    ReducedModel reduced = [&] {
      try {
        return reduce_model(b1, b2, data);
      } catch (const ReductionError& e) {
        throw InputError(e.what());
      }
    }();
    const Matrix& b = std::get<Polyhedral>(reduced.cone.variant()).constraints;
    const int m = static_cast<int>(b.rows());
    const int q = static_cast<int>(b.cols());
    Matrix map;
    if (m == q) {
      map = b;
    } else if (m == 1) {
      map.resize(q, q);
      map.topRows(q - 1) = null_space_rows(b);
      map.bottomRows(1) = b;
      if (choice.family == Family::FUIT) {
        throw UsageError("fuit needs as many constraints as reduced coordinates");
      }
      if (choice.family == Family::LRT_orthant) choice.family = Family::LRT_halfspace;
      if (choice.family == Family::UIT_orthant) choice.family = Family::UIT_halfspace;
    } else {
      throw UnsupportedCalibrationError(
          "no null calibration for a cone with " + std::to_string(m) +
          " constraints in dimension " + std::to_string(q) +
          "; use 1 constraint or " + std::to_string(q));
    }
    data = reduced.data * map.transpose();
    model["constraints"] = to_json(b);
    model["reduced_dimension"] = q;
    model["transform"] = to_json(Matrix(map * reduced.transform));
  }

  check_calibration(choice.family, calibration);
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  if (n <= p) {
    throw InsufficientDataError("need more observations than coordinates (n = " +
                                std::to_string(n) + ", p = " + std::to_string(p) + ")");
  }
  const SampleSummary s = summarize(data);

  TestOutcome outcome;
  if (choice.family == Family::FUIT) {
    const FuitReport r = fuit(s, opts.alpha);
    outcome.statistic = r.max_t;
    outcome.family = Family::FUIT;
    outcome.n = n;
    outcome.p = p;
  } else {
    outcome = evaluate(choice.family, s);
  }

  Json config{{"family", to_string(choice.family)},
              {"cone", cone_name(choice.cone)},
              {"alpha", opts.alpha},
              {"calibration", calibration_name(calibration)}};
  Json weights_json;
  CriticalValue crit;
  double pv = 0.0;
  if (calibration == Calibration::weighted) {
    Json prior_echo;
    const PriorSpec prior = load_prior(opts.prior, p, manifest, prior_echo);
    const MonteCarloOptions mc{opts.mc_samples, require_seed(opts.seed),
                               resolve_workers(opts.workers)};
    const MixtureWeights w = bayes_weights_b1(n, p, prior, mc);
    crit = bayes_critical_value(choice.family, opts.alpha, n, w);
    pv = p_value(outcome, calibration, &w);
    config["prior"] = prior_echo;
    config["mc_samples"] = opts.mc_samples;
    weights_json = to_json(w);
  } else if (calibration == Calibration::exact_halfspace) {
    crit = exact_critical_value(choice.family, opts.alpha, n, p);
    pv = p_value(outcome, calibration);
  } else {
    crit = sup_critical_value(choice.family, opts.alpha, n, p);
    pv = p_value(outcome, calibration);
  }
  manifest.config = config;

  const bool reject = outcome.statistic >= crit.value && outcome.statistic > 0.0;
  Json report;
  report["manifest"] = manifest.to_json();
  report["data"] = Json{{"n", csv.values.rows()},
                        {"p", csv.values.cols()},
                        {"header", csv.header}};
  report["model"] = model;
  Json result;
  result["family"] = to_string(choice.family);
  result["statistic"] = outcome.statistic;
  result["active_subset"] = subset_json(outcome.active_subset);
  result["critical_value"] = crit.value;
  result["p_value"] = pv;
  result["decision"] = reject ? "reject" : "accept";
  report["result"] = result;
  if (!weights_json.is_null()) report["weights"] = weights_json;
  return report;
}

Json run_calibrate(const CalibrateOptions& opts) {
  if (opts.alphas.empty()) throw UsageError("--alpha needs at least one level");
  for (double a : opts.alphas) check_alpha(a);
  check_mc(opts.mc_samples);
  if (opts.p < 1) throw UsageError("-p must be at least 1");
  if (opts.n <= opts.p) throw UsageError("-n must exceed -p");
  const ResolvedChoice choice = resolve_choice(opts.choice);
  if (choice.cone == ConeKind::polyhedral) {
    throw UsageError("calibrate works on the orthant and halfspace; reduce first");
  }
  const Calibration calibration = parse_calibration(opts.calibration);
  check_calibration(choice.family, calibration);
  const int n = opts.n;
  const int p = opts.p;

  RunManifest manifest;
  manifest.command = "calibrate";
  manifest.seed = opts.seed;
  Json config{{"family", to_string(choice.family)},
              {"n", n},
              {"p", p},
              {"alphas", opts.alphas},
              {"calibration", calibration_name(calibration)}};

  std::optional<MixtureWeights> weights;
  if (calibration == Calibration::weighted) {
    Json prior_echo;
    const PriorSpec prior = load_prior(opts.prior, p, manifest, prior_echo);
    const MonteCarloOptions mc{opts.mc_samples, require_seed(opts.seed),
                               resolve_workers(opts.workers)};
    weights = bayes_weights_b1(n, p, prior, mc);
    config["prior"] = prior_echo;
    config["mc_samples"] = opts.mc_samples;
  }
  manifest.config = config;

  Json table = Json::array();
  for (double alpha : opts.alphas) {
    CriticalValue crit;
    double tail = 0.0;
    if (weights) {
      crit = bayes_critical_value(choice.family, alpha, n, *weights);
      tail = null_tail(choice.family, crit.value, n, p, &*weights);
    } else if (calibration == Calibration::exact_halfspace) {
      crit = exact_critical_value(choice.family, alpha, n, p);
      tail = null_tail(choice.family, crit.value, n, p);
    } else {
      crit = sup_critical_value(choice.family, alpha, n, p);
      tail = choice.family == Family::FUIT
                 ? std::min(1.0, p * student_t_sf(crit.value, n - 1.0))
                 : sup_null_tail(choice.family, crit.value, n, p);
    }
    table.push_back(Json{{"alpha", alpha},
                         {"critical_value", crit.value},
                         {"tail_at_critical", tail},
                         {"round_trip_error", std::abs(tail - alpha)}});
  }

  Json report;
  report["manifest"] = manifest.to_json();
  report["family"] = to_string(choice.family);
  report["calibration"] = calibration_name(calibration);
  report["critical_values"] = table;
  if (weights) report["weights"] = to_json(*weights);
  return report;
}

namespace {

Json test_json(const TestSpec& t) {
  return Json{{"family", to_string(t.family)}, {"calibration", to_string(t.calibration)}};
}

std::string csv_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::string join_vector(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += csv_number(v(i));
  }
  return s;
}

Json witness_json(const ConvexityWitness& w) {
  return Json{{"mean_a", to_json(w.mean_a)},       {"cov_a", to_json(w.cov_a)},
              {"mean_b", to_json(w.mean_b)},       {"cov_b", to_json(w.cov_b)},
              {"statistic_a", w.statistic_a},      {"statistic_b", w.statistic_b},
              {"statistic_mid", w.statistic_mid}};
}

Json similarity_row_json(const SimilarityRow& r) {
  return Json{{"sigma_id", r.sigma_id},         {"critical_value", r.critical_value},
              {"rejections", r.rejections},     {"replications", r.replications},
              {"rejection_rate", r.rejection_rate}, {"std_error", r.std_error}};
}

}  // namespace

SimulateResult run_simulate(const SimulateOptions& opts) {
  if (opts.config_path.empty()) throw UsageError("simulate needs --config");
  const std::string text = read_file(opts.config_path);
  Json raw;
  try {
    raw = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(opts.config_path + ": " + e.what());
  }
  SimulateConfig cfg = parse_simulate_config(raw);
  const int workers = resolve_workers(opts.workers);

  RunManifest manifest;
  manifest.command = "simulate";
  add_input(manifest, opts.config_path);
  manifest.seed = cfg.seed;
  manifest.config = cfg.resolved;

  SimulateResult out;
  Json& report = out.report;
  report["manifest"] = manifest.to_json();
  report["experiment"] = to_string(cfg.kind);
  std::ostringstream csv;
  std::ostringstream summary;

  switch (cfg.kind) {
    case ExperimentKind::power: {
      cfg.experiment.workers = workers;
      cfg.experiment.weight_mc.workers = workers;
      const PowerTable t = simulate_power(cfg.experiment);
      Json rows = Json::array();
      csv << "theta_id,theta,sigma_id,family,calibration,critical_value,rejections,"
             "replications,rejection_rate,std_error\n";
      for (const auto& r : t.rows) {
        rows.push_back(Json{{"theta_id", r.theta_id},
                            {"theta", to_json(r.theta)},
                            {"sigma_id", r.sigma_id},
                            {"test", test_json(r.test)},
                            {"critical_value", r.critical_value},
                            {"rejections", r.rejections},
                            {"replications", r.replications},
                            {"rejection_rate", r.rejection_rate},
                            {"std_error", r.std_error}});
        csv << r.theta_id << ',' << join_vector(r.theta) << ',' << r.sigma_id << ','
            << to_string(r.test.family) << ',' << to_string(r.test.calibration) << ','
            << csv_number(r.critical_value) << ',' << r.rejections << ','
            << r.replications << ',' << csv_number(r.rejection_rate) << ','
            << csv_number(r.std_error) << '\n';
      }
      report["rows"] = rows;
      summary << "power: " << t.rows.size() << " rows, " << t.replications
              << " replications each\n";
      break;
    }
    case ExperimentKind::domination: {
      cfg.experiment.workers = workers;
      cfg.experiment.weight_mc.workers = workers;
      const DominationReport d = domination_experiment(cfg.experiment);
      Json rows = Json::array();
      csv << "theta_id,theta,sigma_id,orthant_family,halfspace_family,critical_value,"
             "replications,orthant_rejections,halfspace_rejections,"
             "implication_violations,orthant_power,halfspace_power,difference,"
             "difference_se,flagged\n";
      for (const auto& r : d.rows) {
        rows.push_back(Json{{"theta_id", r.theta_id},
                            {"theta", to_json(r.theta)},
                            {"sigma_id", r.sigma_id},
                            {"orthant_family", to_string(r.orthant_family)},
                            {"halfspace_family", to_string(r.halfspace_family)},
                            {"critical_value", r.critical_value},
                            {"replications", r.replications},
                            {"orthant_rejections", r.orthant_rejections},
                            {"halfspace_rejections", r.halfspace_rejections},
                            {"implication_violations", r.implication_violations},
                            {"orthant_power", r.orthant_power},
                            {"halfspace_power", r.halfspace_power},
                            {"difference", r.difference},
                            {"difference_se", r.difference_se},
                            {"flagged", r.flagged}});
        csv << r.theta_id << ',' << join_vector(r.theta) << ',' << r.sigma_id << ','
            << to_string(r.orthant_family) << ',' << to_string(r.halfspace_family) << ','
            << csv_number(r.critical_value) << ',' << r.replications << ','
            << r.orthant_rejections << ',' << r.halfspace_rejections << ','
            << r.implication_violations << ',' << csv_number(r.orthant_power) << ','
            << csv_number(r.halfspace_power) << ',' << csv_number(r.difference) << ','
            << csv_number(r.difference_se) << ',' << (r.flagged ? "true" : "false")
            << '\n';
      }
      report["rows"] = rows;
      report["total_violations"] = d.total_violations;
      report["any_flagged"] = d.any_flagged;
      summary << "domination: " << d.rows.size() << " rows, " << d.total_violations
              << " implication violations, "
              << (d.any_flagged ? "some" : "no") << " power differences below -3 SE\n";
      break;
    }
    case ExperimentKind::convexity: {
      cfg.convexity.workers = workers;
      const ConvexityReport c = convexity_probe(cfg.convexity);
      report["region"] = to_string(c.region);
      report["pairing"] = to_string(c.pairing);
      report["p"] = c.p;
      report["n"] = c.n;
      report["critical_value"] = c.critical_value;
      report["trials"] = c.trials;
      report["violations"] = c.violations;
      report["witness"] = c.witness ? witness_json(*c.witness) : Json(nullptr);
      csv << "region,pairing,p,n,critical_value,trials,violations,witness\n"
          << to_string(c.region) << ',' << to_string(c.pairing) << ',' << c.p << ','
          << c.n << ',' << csv_number(c.critical_value) << ',' << c.trials << ','
          << c.violations << ',' << (c.witness ? "true" : "false") << '\n';
      summary << "convexity: " << to_string(c.region) << ", " << c.trials
              << " midpoint tests, " << c.violations << " violations"
              << (c.witness ? ", witness found" : "") << '\n';
      break;
    }
    case ExperimentKind::similarity: {
      cfg.similarity.workers = workers;
      cfg.similarity.weight_mc.workers = workers;
      const SimilarityReport s = similarity_probe(cfg.similarity);
      report["test"] = test_json(s.test);
      report["alpha"] = s.alpha;
      Json rows = Json::array();
      csv << "sigma_id,critical_value,rejections,replications,rejection_rate,std_error\n";
      auto emit = [&](const SimilarityRow& r) {
        csv << r.sigma_id << ',' << csv_number(r.critical_value) << ',' << r.rejections
            << ',' << r.replications << ',' << csv_number(r.rejection_rate) << ','
            << csv_number(r.std_error) << '\n';
      };
      for (const auto& r : s.rows) {
        rows.push_back(similarity_row_json(r));
        emit(r);
      }
      report["rows"] = rows;
      report["compound"] = s.compound ? similarity_row_json(*s.compound) : Json(nullptr);
      if (s.compound) emit(*s.compound);
      report["weights"] = s.weights ? to_json(*s.weights) : Json(nullptr);
      report["max_pairwise_z"] = s.max_pairwise_z;
      summary << "similarity: " << s.rows.size() << " sigmas, max pairwise z "
              << s.max_pairwise_z << '\n';
      break;
    }
  }
  out.csv = csv.str();
  out.summary = summary.str();
  return out;
}

}  // namespace conetest::cli
