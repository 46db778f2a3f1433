#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fluctavg/control.hpp"
#include "fluctavg/evaluate.hpp"

namespace fluctavg {

struct LadderPoint {
  int side = 0;        // L
  int band_width = 0;  // W
};

struct ZGrid {
  std::vector<double> energies;
  std::vector<double> etas;
  double kappa = 0.1;  // bulk window |E| <= 2 - kappa
  double gamma = 0.1;  // domain floor eta >= M^{-1+gamma}
};

struct ExperimentPlan {
  int dimension = 1;
  ProfileKind profile = ProfileKind::Step;
  double delta_prime = 0.3;
  double delta = 0.3;
  SymmetryClass symmetry = SymmetryClass::ComplexHermitian;
  EntryDistribution distribution = EntryDistribution::Gaussian;

  std::vector<LadderPoint> ladder;
  ZGrid z_grid;
  std::vector<std::string> specs;  // monomial language blocks

  int samples_per_point = 256;
  double quantile = 0.99;
  double epsilon = 0.1;  // domination allowance N^epsilon
  int resample_count = 64;
  int bootstrap = 200;
  int exact_star_limit = 3;
  long subsample_tuples = 20000;
  bool run_p_product = true;

  PsiMode psi_mode = PsiMode::Empirical;
  double admissibility_c = 0.05;
  double psi_quantile = 0.9;

  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
};

struct DominationVerdict {
  bool pass = false;
  bool degenerate = false;  // all-zero samples: PASS with infinite margin
  double quantile_value = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  double threshold = 0;  // N^epsilon * bound
  double margin = 0;     // log(threshold / quantile)
};

// PASS iff the q-quantile of |values| is at most N^epsilon * bound, with a
// bootstrap confidence interval on the quantile.
DominationVerdict domination_test(const std::vector<double>& values, double bound,
                                  double epsilon, double q, int n,
                                  int bootstrap_rounds, std::uint64_t seed);

struct ScalingFit {
  double slope = 0;
  double std_error = 0;
  double slope_wrong = 0;
  double std_error_wrong = 0;
  bool inconclusive = false;   // predictor spread too small for any fit
  bool discriminated = false;  // wrong-exponent fit detectably worse
  double predictor_spread = 0;
  int points = 0;
};

// OLS of y against x with intercept; `x_wrong` is the same predictor with the
// secondary exponent off by one, fitted as a discriminator.
ScalingFit scaling_fit(const std::vector<double>& y, const std::vector<double>& x,
                       const std::vector<double>& x_wrong);

struct PointResult {
  int side = 0;
  int band_width = 0;
  double energy = 0;
  double eta = 0;
  std::string spec;        // canonical spec text
  std::string estimator;   // "X" or "P"
  int psi_exp = 0;
  int phi_exp = 0;
  double m_scale = 0;
  double rho_value = 0;
  double psi_ansatz_value = 0;
  double psi_empirical_value = 0;
  double phi_ansatz_value = 0;
  double psi_used = 0;
  double phi_used = 0;
  double bound = 0;         // psi^a phi^b with the selected psi mode
  double bound_ansatz = 0;  // same exponents priced with the ansatz parameters
  int samples = 0;
  bool exact_sum = true;
  double mean_std_error = 0;  // average Monte Carlo error of the estimator
  DominationVerdict verdict;
  bool psi_modes_disagree = false;  // ansatz vs empirical beyond 3x
};

struct SpecFit {
  std::string spec;
  std::string estimator;
  int psi_exp = 0;
  int phi_exp = 0;
  ScalingFit fit;
};

struct ExperimentResult {
  std::uint64_t plan_hash = 0;
  std::string tool_version;
  std::vector<PointResult> points;
  std::vector<SpecFit> fits;
  std::vector<std::string> skipped;  // grid points outside the spectral domain
  bool all_pass = true;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

std::uint64_t plan_hash(const ExperimentPlan& plan);

// Line-delimited structured records, a rendered table, and plot-ready columns.
std::string results_to_jsonl(const ExperimentResult& result);
std::string results_to_table(const ExperimentResult& result);
std::string results_to_csv(const ExperimentResult& result);
ExperimentResult results_from_jsonl(const std::string& text);

}  // namespace fluctavg
