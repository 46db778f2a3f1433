#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluctavg/experiment.hpp"

namespace fluctavg {

struct IdentitySuiteConfig {
  std::vector<int> sizes = {20, 50, 200};
  int configs_per_size = 100;
  int max_minor = 4;  // |T| drawn uniformly from 0..max_minor
  double tolerance = 1e-9;
  std::vector<double> energies = {0.0, 0.5, -0.5};
  std::vector<double> etas = {0.05, 0.5, 5.0};
};

struct OutputConfig {
  std::string results = "out/results.jsonl";
  std::string summary = "out/summary.txt";
  std::string columns = "out/columns.csv";
};

// One config file drives every subcommand; unknown keys are rejected before
// any computation starts.
struct Config {
  // ensemble
  int dimension = 1;
  ProfileKind profile = ProfileKind::Step;
  double delta_prime = 0.3;
  double delta = 0.3;
  SymmetryClass symmetry = SymmetryClass::ComplexHermitian;
  EntryDistribution distribution = EntryDistribution::Gaussian;
  std::uint64_t base_seed = 1;

  // control
  PsiMode psi_mode = PsiMode::Empirical;
  double admissibility_c = 0.05;
  double psi_quantile = 0.9;
  ZGrid z_grid;

  std::vector<std::string> specs;

  // verifier
  std::vector<LadderPoint> ladder;
  int samples_per_point = 256;
  double quantile = 0.99;
  double epsilon = 0.1;
  int resample_count = 64;
  int bootstrap = 200;
  int exact_star_limit = 3;
  long subsample_tuples = 20000;
  bool run_p_product = true;
  int workers = 0;

  IdentitySuiteConfig identities;
  OutputConfig output;
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);
std::string default_config_text();

ExperimentPlan make_plan(const Config& config);
std::uint64_t config_hash(const Config& config);

}  // namespace fluctavg
