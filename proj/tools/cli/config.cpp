#include "cli/config.hpp"

#include <set>

#include <conetest/errors.hpp>

namespace conetest::cli {

namespace {

std::string child(const std::string& path, const std::string& key) {
  return path + "." + key;
}
std::string child(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

void check_keys(const Json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(child(path, it.key()), "unknown field");
    }
  }
}

const Json* find(const Json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const Json& require(const Json& obj, const std::string& path, const std::string& key) {
  const Json* v = find(obj, key);
  if (!v) throw ConfigError(child(path, key), "required field is missing");
  return *v;
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_uint(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned()) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

Vector as_vector(const Json& v, const std::string& path, int dim) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError(path, "expected " + std::to_string(dim) + " entries");
  }
  Vector out(dim);
  for (int i = 0; i < dim; ++i) out(i) = as_number(v[i], child(path, i));
  return out;
}

Matrix as_matrix(const Json& v, const std::string& path, int dim) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of rows");
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError(path, "expected " + std::to_string(dim) + " rows");
  }
  Matrix out(dim, dim);
  for (int i = 0; i < dim; ++i) out.row(i) = as_vector(v[i], child(path, i), dim);
  return out;
}

template <class T, class F>
T with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

int positive_int(const Json& obj, const std::string& path, const std::string& key,
                 std::int64_t lo) {
  const auto v = as_int(require(obj, path, key), child(path, key));
  if (v < lo) {
    throw ConfigError(child(path, key), "must be at least " + std::to_string(lo));
  }
  return static_cast<int>(v);
}

SigmaSource read_sigma(const Json& v, const std::string& path, int p, Json& echo) {
  check_keys(v, path, {"kind", "matrix", "matrices", "seed", "count", "df"});
  const std::string kind = as_string(require(v, path, "kind"), child(path, "kind"));
  echo["kind"] = kind;
  if (kind == "fixed") {
    const Matrix m = as_matrix(require(v, path, "matrix"), child(path, "matrix"), p);
    echo["matrix"] = to_json(m);
    return SigmaSource::fixed(m);
  }
  if (kind == "sequence") {
    const Json& list = require(v, path, "matrices");
    const std::string lp = child(path, "matrices");
    if (!list.is_array() || list.empty()) {
      throw ConfigError(lp, "expected a non-empty array of matrices");
    }
    std::vector<Matrix> ms;
    echo["matrices"] = Json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      ms.push_back(as_matrix(list[i], child(lp, i), p));
      echo["matrices"].push_back(to_json(ms.back()));
    }
    return SigmaSource::sequence(std::move(ms));
  }
  if (kind == "random_correlation") {
    const auto seed = as_uint(require(v, path, "seed"), child(path, "seed"));
    const int count = positive_int(v, path, "count", 1);
    double df = 0.0;
    if (const Json* d = find(v, "df")) df = as_number(*d, child(path, "df"));
    echo["seed"] = seed;
    echo["count"] = count;
    echo["df"] = df;
    return SigmaSource::random_correlation(seed, count, df);
  }
  throw ConfigError(child(path, "kind"),
                    "expected \"fixed\", \"sequence\" or \"random_correlation\"");
}

TestSpec read_test(const Json& v, const std::string& path, Json& echo) {
  check_keys(v, path, {"family", "calibration"});
  const auto fam_path = child(path, "family");
  const std::string fam = as_string(require(v, path, "family"), fam_path);
  TestSpec t;
  t.family = with_path<Family>(fam_path, [&] { return family_from_string(fam); });
  std::string cal = "sup";
  if (const Json* c = find(v, "calibration")) cal = as_string(*c, child(path, "calibration"));
  t.calibration = with_path<Calibration>(child(path, "calibration"),
                                         [&] { return calibration_from_string(cal); });
  echo = Json{{"family", to_string(t.family)}, {"calibration", to_string(t.calibration)}};
  return t;
}

std::optional<PriorSpec> read_prior(const Json& root, int p, Json& echo) {
  const Json* v = find(root, "prior");
  if (!v) return std::nullopt;
  const std::string path = "$.prior";
  check_keys(*v, path, {"scale", "df"});
  Matrix scale = Matrix::Identity(p, p);
  if (const Json* s = find(*v, "scale")) scale = as_matrix(*s, child(path, "scale"), p);
  const double df = as_number(require(*v, path, "df"), child(path, "df"));
  echo = Json{{"scale", to_json(scale)}, {"df", df}};
  return with_path<PriorSpec>(path, [&] { return PriorSpec::inverse_wishart(scale, df); });
}

Region read_region(const std::string& s, const std::string& path) {
  for (auto r : {Region::UIT_orthant_acceptance, Region::UIT_halfspace_acceptance,
                 Region::LRT_orthant_acceptance}) {
    if (to_string(r) == s) return r;
  }
  throw ConfigError(path,
                    "expected UIT_orthant_acceptance, UIT_halfspace_acceptance "
                    "or LRT_orthant_acceptance");
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::power: return "power";
    case ExperimentKind::domination: return "domination";
    case ExperimentKind::convexity: return "convexity";
    case ExperimentKind::similarity: return "similarity";
  }
  return "unknown";
}

SimulateConfig parse_simulate_config(const Json& j) {
  const std::string root = "$";
  if (!j.is_object()) throw ConfigError(root, "expected an object");
  SimulateConfig cfg;
  Json& echo = cfg.resolved;

  const std::string kind =
      as_string(require(j, root, "experiment"), child(root, "experiment"));
  if (kind == "power") {
    cfg.kind = ExperimentKind::power;
  } else if (kind == "domination") {
    cfg.kind = ExperimentKind::domination;
  } else if (kind == "convexity") {
    cfg.kind = ExperimentKind::convexity;
  } else if (kind == "similarity") {
    cfg.kind = ExperimentKind::similarity;
  } else {
    throw ConfigError(child(root, "experiment"),
                      "expected power, domination, convexity or similarity");
  }
  echo["experiment"] = kind;

  std::set<std::string> allowed = {"experiment", "seed", "p", "n", "alpha"};
  switch (cfg.kind) {
    case ExperimentKind::power:
    case ExperimentKind::domination:
      allowed.insert({"replications", "sigma", "theta_grid", "tests", "prior", "mc_samples"});
      break;
    case ExperimentKind::similarity:
      allowed.insert({"replications", "sigma", "test", "prior", "mc_samples", "compound"});
      break;
    case ExperimentKind::convexity:
      allowed.insert({"region", "pairing", "trials", "max_attempts", "fixed_cov"});
      break;
  }
  check_keys(j, root, allowed);

  cfg.seed = as_uint(require(j, root, "seed"), child(root, "seed"));
  const int p = positive_int(j, root, "p", 1);
  const int n = positive_int(j, root, "n", p + 1);
  double alpha = 0.05;
  if (const Json* a = find(j, "alpha")) alpha = as_number(*a, child(root, "alpha"));
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(child(root, "alpha"), "must lie in (0, 1)");
  }
  echo["seed"] = cfg.seed;
  echo["p"] = p;
  echo["n"] = n;
  echo["alpha"] = alpha;

  if (cfg.kind == ExperimentKind::convexity) {
    auto& c = cfg.convexity;
    c.p = p;
    c.n = n;
    c.alpha = alpha;
    c.seed = cfg.seed;
    c.region = read_region(as_string(require(j, root, "region"), child(root, "region")),
                           child(root, "region"));
    if (const Json* v = find(j, "pairing")) {
      const std::string s = as_string(*v, child(root, "pairing"));
      if (s == "joint") {
        c.pairing = CovariancePairing::joint;
      } else if (s == "shared") {
        c.pairing = CovariancePairing::shared;
      } else {
        throw ConfigError(child(root, "pairing"), "expected \"joint\" or \"shared\"");
      }
    }
    if (find(j, "trials")) c.trials = positive_int(j, root, "trials", 0);
    if (find(j, "max_attempts")) c.max_attempts = positive_int(j, root, "max_attempts", 1);
    if (const Json* v = find(j, "fixed_cov")) {
      c.fixed_cov = as_matrix(*v, child(root, "fixed_cov"), p);
    }
    echo["region"] = to_string(c.region);
    echo["pairing"] = to_string(c.pairing);
    echo["trials"] = c.trials;
    echo["max_attempts"] = c.max_attempts;
    if (c.fixed_cov) echo["fixed_cov"] = to_json(*c.fixed_cov);
    return cfg;
  }

  std::int64_t replications = 1000;
  if (find(j, "replications")) replications = positive_int(j, root, "replications", 1);
  echo["replications"] = replications;

  SigmaSource sigma = SigmaSource::fixed(Matrix::Identity(p, p));
  Json sigma_echo{{"kind", "fixed"}, {"matrix", to_json(Matrix(Matrix::Identity(p, p)))}};
  if (const Json* v = find(j, "sigma")) {
    sigma_echo = Json::object();
    sigma = read_sigma(*v, child(root, "sigma"), p, sigma_echo);
  }
  echo["sigma"] = sigma_echo;
  // Catch non-p.d. matrices here so the error names the field.
  const auto sigmas = with_path<std::vector<Matrix>>(child(root, "sigma"),
                                                     [&] { return resolve_sigmas(sigma, p); });

  Json prior_echo;
  const auto prior = read_prior(j, p, prior_echo);
  if (prior) echo["prior"] = prior_echo;

  MonteCarloOptions mc;
  mc.samples = 100000;
  mc.seed = cfg.seed;
  if (find(j, "mc_samples")) mc.samples = positive_int(j, root, "mc_samples", 1);
  echo["mc_samples"] = mc.samples;

  if (cfg.kind == ExperimentKind::similarity) {
    auto& s = cfg.similarity;
    s.p = p;
    s.n = n;
    s.alpha = alpha;
    s.seed = cfg.seed;
    s.replications = replications;
    s.sigmas = sigmas;
    s.prior = prior;
    s.weight_mc = mc;
    Json test_echo;
    s.test = read_test(require(j, root, "test"), child(root, "test"), test_echo);
    echo["test"] = test_echo;
    if (const Json* v = find(j, "compound")) s.compound = as_bool(*v, child(root, "compound"));
    echo["compound"] = s.compound;
    if (s.compound && !prior) {
      throw ConfigError(child(root, "prior"), "compound sampling needs a prior");
    }
    if (s.test.calibration == Calibration::weighted && !prior && s.compound) {
      throw ConfigError(child(root, "prior"), "weighted calibration needs a prior");
    }
    return cfg;
  }

  auto& e = cfg.experiment;
  e.p = p;
  e.n = n;
  e.alpha = alpha;
  e.seed = cfg.seed;
  e.replications = replications;
  e.sigma_source = SigmaSource::sequence(sigmas);
  e.prior = prior;
  e.weight_mc = mc;

  echo["theta_grid"] = Json::array();
  if (const Json* grid = find(j, "theta_grid")) {
    const std::string gp = child(root, "theta_grid");
    if (!grid->is_array() || grid->empty()) {
      throw ConfigError(gp, "expected a non-empty array of vectors");
    }
    for (std::size_t i = 0; i < grid->size(); ++i) {
      e.theta_grid.push_back(as_vector((*grid)[i], child(gp, i), p));
    }
  } else {
    e.theta_grid.push_back(Vector::Zero(p));
  }
  for (const auto& t : e.theta_grid) echo["theta_grid"].push_back(to_json(t));

  echo["tests"] = Json::array();
  if (const Json* tests = find(j, "tests")) {
    const std::string tp = child(root, "tests");
    if (!tests->is_array()) throw ConfigError(tp, "expected an array of tests");
    for (std::size_t i = 0; i < tests->size(); ++i) {
      Json t_echo;
      e.tests.push_back(read_test((*tests)[i], child(tp, i), t_echo));
      echo["tests"].push_back(t_echo);
    }
  }
  if (cfg.kind == ExperimentKind::power && e.tests.empty()) {
    throw ConfigError(child(root, "tests"), "at least one test is required");
  }
  for (std::size_t i = 0; i < e.tests.size(); ++i) {
    if (e.tests[i].calibration == Calibration::weighted &&
        !is_orthant_family(e.tests[i].family)) {
      throw ConfigError(child(child(root, "tests"), i) + ".calibration",
                        "weighted calibration applies to orthant families only");
    }
  }
  with_path<int>(root, [&] {
    validate(e);
    return 0;
  });
  return cfg;
}

}  // namespace conetest::cli
