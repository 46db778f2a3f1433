#include <doctest.h>

#include <cmath>

#include "fluctavg/experiment.hpp"

using namespace fluctavg;

TEST_CASE("domination verdicts") {
  std::vector<double> zeros(100, 0.0);
  const DominationVerdict degenerate = domination_test(zeros, 0.5, 0.1, 0.99, 64, 200, 1);
  CHECK(degenerate.pass);
  CHECK(degenerate.degenerate);
  CHECK(std::isinf(degenerate.margin));

  std::vector<double> small(128, 0.01);
  const DominationVerdict pass = domination_test(small, 0.5, 0.1, 0.99, 64, 200, 1);
  CHECK(pass.pass);
  CHECK(pass.margin > 0);
  CHECK(pass.ci_lo <= pass.quantile_value);
  CHECK(pass.quantile_value <= pass.ci_hi);

  // negative control: values sit above the threshold by construction
  std::vector<double> large(128, 10.0);
  const DominationVerdict fail = domination_test(large, 0.5, 0.1, 0.99, 64, 200, 1);
  CHECK(!fail.pass);
  CHECK(fail.margin < 0);

  CHECK_THROWS_AS(domination_test({1.0, 2.0}, 0.5, 0.1, 0.99, 64, 200, 1),
                  std::invalid_argument);
}

TEST_CASE("scaling fit on synthetic data") {
  // exact proportionality: slope one with zero error
  std::vector<double> x, y, x_wrong;
  for (int i = 0; i < 8; ++i) {
    const double psi = std::log(0.1 + 0.05 * i);
    const double phi = std::log(0.3 + 0.08 * i);
    x.push_back(2 * psi + phi);
    x_wrong.push_back(2 * psi);
    y.push_back(2 * psi + phi - 0.7);  // value = bound / e^0.7
  }
  const ScalingFit exact = scaling_fit(y, x, x_wrong);
  CHECK(exact.slope == doctest::Approx(1.0));
  CHECK(exact.std_error == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(!exact.inconclusive);
  CHECK(exact.discriminated);

  // values = bound / phi: the fit against the correct exponent deviates
  std::vector<double> y_off;
  for (int i = 0; i < 8; ++i) {
    const double phi = std::log(0.3 + 0.08 * i);
    y_off.push_back(x[i] - phi);
  }
  const ScalingFit off = scaling_fit(y_off, x, x_wrong);
  CHECK(std::abs(off.slope - 1.0) > 0.05);

  // flat predictor: inconclusive
  std::vector<double> flat(8, -1.0);
  const ScalingFit inconclusive = scaling_fit(y, flat, flat);
  CHECK(inconclusive.inconclusive);

  CHECK_THROWS_AS(scaling_fit({1.0}, {1.0}, {1.0}), std::invalid_argument);
}

namespace {

ExperimentPlan tiny_plan() {
  ExperimentPlan plan;
  plan.ladder = {{24, 4}, {32, 6}, {48, 8}};
  plan.z_grid.energies = {0.0};
  plan.z_grid.etas = {0.5};
  plan.z_grid.gamma = 0.1;
  plan.specs = {"sum a; ext mu; Q: -; w: 1/N; g(mu,a) g(a,mu)",
                "sum a; ext mu; Q: a; w: 1/N; g(mu,a) g*(a,mu)"};
  plan.samples_per_point = 64;
  plan.resample_count = 8;
  plan.bootstrap = 200;
  plan.psi_mode = PsiMode::Empirical;
  plan.seed = 42;
  plan.workers = 2;
  return plan;
}

}  // namespace

TEST_CASE("experiment runner is deterministic and serializable") {
  const ExperimentPlan plan = tiny_plan();
  const ExperimentResult first = run_experiment(plan);
  const ExperimentResult second = run_experiment(plan);
  const std::string a = results_to_jsonl(first);
  const std::string b = results_to_jsonl(second);
  CHECK(a == b);
  CHECK(first.points.size() > 0);

  // round trip through the line format
  const ExperimentResult parsed = results_from_jsonl(a);
  CHECK(results_to_jsonl(parsed) == a);
  CHECK(parsed.points.size() == first.points.size());
  CHECK(parsed.plan_hash == first.plan_hash);

  // tables render
  CHECK(results_to_table(first).find("PASS") != std::string::npos);
  CHECK(results_to_csv(first).find("L,W,E") != std::string::npos);
}

TEST_CASE("plan changes change the hash, seeds change the records") {
  ExperimentPlan plan = tiny_plan();
  const std::uint64_t h = plan_hash(plan);
  plan.seed = 43;
  CHECK(plan_hash(plan) != h);

  ExperimentPlan alt = tiny_plan();
  alt.seed = 43;
  const ExperimentResult one = run_experiment(tiny_plan());
  const ExperimentResult two = run_experiment(alt);
  bool any_differs = false;
  for (std::size_t i = 0; i < one.points.size(); ++i)
    if (one.points[i].verdict.quantile_value !=
        two.points[i].verdict.quantile_value)
      any_differs = true;
  CHECK(any_differs);
}

TEST_CASE("empty spec list yields an empty result without error") {
  ExperimentPlan plan = tiny_plan();
  plan.specs.clear();
  const ExperimentResult result = run_experiment(plan);
  CHECK(result.points.empty());
  CHECK(result.fits.empty());
  CHECK(result.all_pass);
}

TEST_CASE("plan validation") {
  ExperimentPlan plan = tiny_plan();
  plan.ladder = {{32, 8}, {24, 4}};
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);

  plan = tiny_plan();
  plan.z_grid.energies = {1.95};
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);

  plan = tiny_plan();
  plan.samples_per_point = 8;  // below the empirical-psi floor
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);
}

TEST_CASE("grid points below the domain floor are skipped and reported") {
  ExperimentPlan plan = tiny_plan();
  plan.z_grid.etas = {1e-4, 0.5};
  const ExperimentResult result = run_experiment(plan);
  CHECK(result.skipped.size() == plan.ladder.size());  // one skip per rung
  for (const PointResult& p : result.points) CHECK(p.eta == 0.5);
}
