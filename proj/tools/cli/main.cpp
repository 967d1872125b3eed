#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"

using namespace conetest::cli;

namespace {

void add_family(CLI::App* cmd, FamilyChoice& c) {
  cmd->add_option("--family", c.family,
                  "t2 | lrt | uit | fuit, or a full name such as UIT_halfspace")
      ->capture_default_str();
  cmd->add_option("--cone", c.cone, "orthant | halfspace | polyhedral (default orthant)");
}

void add_calibration(CLI::App* cmd, std::string& calibration, PriorOptions& prior,
                     std::int64_t& mc_samples, std::optional<std::uint64_t>& seed,
                     int& workers) {
  cmd->add_option("--calibration", calibration, "sup | bayes | exact")
      ->envname("CONETEST_CALIBRATION")
      ->capture_default_str();
  cmd->add_option("--prior-scale", prior.scale_path,
                  "CSV with the inverse-Wishart scale (default identity)");
  cmd->add_option("--prior-df", prior.df, "inverse-Wishart degrees of freedom (default p + 2)");
  cmd->add_option("--mc-samples", mc_samples, "Monte Carlo size for Bayes weights")
      ->envname("CONETEST_MC_SAMPLES")
      ->capture_default_str();
  cmd->add_option("--seed", seed, "seed for Monte Carlo weights")->envname("CONETEST_SEED");
  cmd->add_option("--workers", workers, "worker threads, 0 = all cores")
      ->envname("CONETEST_WORKERS")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tests of a multivariate normal mean against cone alternatives"};
  app.set_version_flag("--version", std::string(CONETEST_VERSION));
  app.require_subcommand(1);

  std::string out_path = "-";

  TestOptions topt;
  auto* test = app.add_subcommand("test", "test H0: mu = 0 on a CSV sample");
  test->add_option("--data", topt.data_path, "CSV, one observation per row")->required();
  add_family(test, topt.choice);
  test->add_option("--constraints", topt.constraints_path,
                   "CSV with B for the cone {B mu >= 0}");
  test->add_option("--equalities", topt.equalities_path,
                   "CSV with B1 for H0: B1 mu = 0 (default identity)");
  test->add_option("--alpha", topt.alpha, "level")
      ->envname("CONETEST_ALPHA")
      ->capture_default_str();
  add_calibration(test, topt.calibration, topt.prior, topt.mc_samples, topt.seed,
                  topt.workers);
  test->add_option("--out", out_path, "report path, - for stdout")->capture_default_str();

  CalibrateOptions copt;
  auto* cal = app.add_subcommand("calibrate", "critical values for a family and (n, p)");
  add_family(cal, copt.choice);
  cal->add_option("--alpha", copt.alphas, "levels, comma separated")
      ->delimiter(',')
      ->envname("CONETEST_ALPHA")
      ->capture_default_str();
  cal->add_option("-n", copt.n, "sample size")->required();
  cal->add_option("-p", copt.p, "dimension")->required();
  add_calibration(cal, copt.calibration, copt.prior, copt.mc_samples, copt.seed,
                  copt.workers);
  cal->add_option("--out", out_path, "report path, - for stdout")->capture_default_str();

  SimulateOptions sopt;
  auto* sim = app.add_subcommand("simulate", "run a power-lab experiment from a JSON config");
  sim->add_option("--config", sopt.config_path, "experiment config (JSON)")->required();
  sim->add_option("--out", out_path, "report path, - for stdout")->capture_default_str();
  sim->add_option("--csv", sopt.csv_path, "also write the result table as CSV");
  sim->add_option("--workers", sopt.workers, "worker threads, 0 = all cores")
      ->envname("CONETEST_WORKERS")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*test) {
      write_output(render(run_test(topt)), out_path);
    } else if (*cal) {
      write_output(render(run_calibrate(copt)), out_path);
    } else {
      const SimulateResult r = run_simulate(sopt);
      write_output(render(r.report), out_path);
      if (!sopt.csv_path.empty()) write_output(r.csv, sopt.csv_path);
      (out_path == "-" ? std::cerr : std::cout) << r.summary;
    }
  } catch (const std::exception& e) {
    std::cerr << "conetest: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
