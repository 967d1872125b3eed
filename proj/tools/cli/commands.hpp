#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cli/report.hpp"

namespace conetest::cli {

/// Family and cone as typed on the command line. Short families (t2, lrt,
/// uit, fuit) are combined with the cone; full names such as UIT_halfspace
/// must agree with an explicitly given cone.
struct FamilyChoice {
  std::string family = "uit";
  std::optional<std::string> cone;  // orthant | halfspace | polyhedral
};

struct PriorOptions {
  std::string scale_path;  // empty: identity
  std::optional<double> df;  // default p + 2
};

struct TestOptions {
  std::string data_path;
  FamilyChoice choice;
  std::string constraints_path;  // B for the polyhedral cone {B mu >= 0}
  std::string equalities_path;   // optional B1 for H0: B1 mu = 0
  double alpha = 0.05;
  std::string calibration = "sup";
  PriorOptions prior;
  std::int64_t mc_samples = 1'000'000;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct CalibrateOptions {
  FamilyChoice choice;
  std::vector<double> alphas = {0.01, 0.05, 0.10};
  int n = 0;
  int p = 0;
  std::string calibration = "sup";
  PriorOptions prior;
  std::int64_t mc_samples = 1'000'000;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct SimulateOptions {
  std::string config_path;
  std::string csv_path;  // optional CSV mirror of the result table
  int workers = 1;
};

/// Each command returns the full report, manifest included. Usage problems
/// raise UsageError; everything else propagates from the library.
Json run_test(const TestOptions& opts);
Json run_calibrate(const CalibrateOptions& opts);

struct SimulateResult {
  Json report;
  std::string csv;      // table mirror
  std::string summary;  // a few human-readable lines
};

SimulateResult run_simulate(const SimulateOptions& opts);

}  // namespace conetest::cli
