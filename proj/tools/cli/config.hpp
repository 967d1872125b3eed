#pragma once

#include <string>

#include <conetest/power_lab.hpp>

#include "cli/report.hpp"

namespace conetest::cli {

/// A simulate config that does not match the schema; the message starts with
/// the JSON path of the offending field, e.g. "$.sigma.matrix[1][0]".
class ConfigError : public UsageError {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : UsageError(path + ": " + what) {}
};

enum class ExperimentKind { power, domination, convexity, similarity };

std::string to_string(ExperimentKind k);

struct SimulateConfig {
  ExperimentKind kind = ExperimentKind::power;
  ExperimentConfig experiment;  // power, domination
  ConvexityConfig convexity;
  SimilarityConfig similarity;
  std::uint64_t seed = 0;
  Json resolved;  // the config with defaults filled in, for the manifest
};

/// Validates and resolves a simulate config. Schema (keys not listed are
/// rejected):
///
///   experiment    "power" | "domination" | "convexity" | "similarity"
///   seed          unsigned integer, required
///   p, n          integers, required
///   alpha         number, default 0.05
///   replications  integer >= 1, default 1000 (power, domination, similarity)
///   sigma         {"kind": "fixed", "matrix": [[..]]}
///                 {"kind": "random_correlation", "seed": s, "count": k, "df": d}
///                 {"kind": "sequence", "matrices": [[[..]], ..]}
///                 default: fixed identity
///   theta_grid    [[..], ..] (power, domination), default [0]
///   tests         [{"family": "UIT_orthant", "calibration": "sup"}, ..]
///                 (power, domination); one object "test" for similarity
///   prior         {"scale": [[..]] (default identity), "df": m}
///   mc_samples    integer, Monte Carlo size for weights, default 100000
///   compound      bool (similarity), default false
///   region, pairing, trials, max_attempts, fixed_cov   (convexity)
SimulateConfig parse_simulate_config(const Json& j);

}  // namespace conetest::cli
