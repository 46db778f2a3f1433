#include "fluctavg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "fluctavg/rng.hpp"
#include "fluctavg/version.hpp"

namespace fluctavg {

namespace {

using Json = nlohmann::ordered_json;

double quantile_of(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

DominationVerdict domination_test(const std::vector<double>& values, double bound,
                                  double epsilon, double q, int n,
                                  int bootstrap_rounds, std::uint64_t seed) {
  if (values.size() < 64)
    throw std::invalid_argument("domination test needs at least 64 values");
  DominationVerdict out;
  out.threshold = std::pow(static_cast<double>(n), epsilon) * bound;
  out.quantile_value = quantile_of(values, q);

  bool all_zero = true;
  for (double v : values)
    if (v != 0.0) all_zero = false;
  if (all_zero) {
    out.degenerate = true;
    out.pass = true;
    out.margin = std::numeric_limits<double>::infinity();
    return out;
  }

  SplitMix64 rng(seed);
  std::vector<double> boot(std::max(bootstrap_rounds, 200));
  std::vector<double> resample(values.size());
  for (double& b : boot) {
    for (double& r : resample) r = values[rng() % values.size()];
    b = quantile_of(resample, q);
  }
  std::sort(boot.begin(), boot.end());
  out.ci_lo = boot[static_cast<std::size_t>(0.025 * (boot.size() - 1))];
  out.ci_hi = boot[static_cast<std::size_t>(0.975 * (boot.size() - 1))];

  out.pass = out.quantile_value <= out.threshold;
  out.margin = std::log(out.threshold / out.quantile_value);
  return out;
}

ScalingFit scaling_fit(const std::vector<double>& y, const std::vector<double>& x,
                       const std::vector<double>& x_wrong) {
  if (y.size() < 3 || y.size() != x.size() || y.size() != x_wrong.size())
    throw std::invalid_argument("scaling fit needs >= 3 aligned points");
  const int n = static_cast<int>(y.size());

  const auto ols = [n, &y](const std::vector<double>& xs, double& slope,
                           double& stderr_out) {
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
      mx += xs[i];
      my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0) {
      slope = 0;
      stderr_out = std::numeric_limits<double>::infinity();
      return false;
    }
    slope = sxy / sxx;
    double sse = 0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - my - slope * (xs[i] - mx);
      sse += r * r;
    }
    stderr_out = n > 2 ? std::sqrt(sse / (n - 2) / sxx)
                       : std::numeric_limits<double>::infinity();
    return true;
  };

  ScalingFit out;
  out.points = n;
  double mx = 0;
  for (double v : x) mx += v;
  mx /= n;
  double spread = 0;
  for (double v : x) spread += (v - mx) * (v - mx);
  out.predictor_spread = std::sqrt(spread / n);
  if (out.predictor_spread < 0.05) {
    out.inconclusive = true;
    return out;
  }
  ols(x, out.slope, out.std_error);
  ols(x_wrong, out.slope_wrong, out.std_error_wrong);

  const double separation = std::abs(out.slope_wrong - 1.0) -
                            std::abs(out.slope - 1.0);
  out.discriminated =
      separation > std::max(2.0 * (out.std_error + out.std_error_wrong), 0.05);
  return out;
}

namespace {

// Deterministic external / fixed-index assignment: evenly spaced points of
// the torus, recorded in the result records.
std::vector<int> spread_indices(int count, int n) {
  std::vector<int> out(count);
  for (int k = 0; k < count; ++k)
    out[k] = static_cast<int>((static_cast<long>(k) + 1) * n / (count + 1));
  return out;
}

std::vector<int> p_product_assignment(const AveragingSpec& spec,
                                      const std::vector<int>& externals, int n) {
  std::vector<int> values(spec.graph.num_vertices(), 0);
  for (int v = spec.graph.num_summation; v < spec.graph.num_vertices(); ++v)
    values[v] = externals[v - spec.graph.num_summation];
  int cursor = externals.empty() ? n / 2 : externals[0];
  for (int v = 0; v < spec.graph.num_summation; ++v) {
    do {
      cursor = (cursor + 1) % n;
    } while (std::find(values.begin() + spec.graph.num_summation, values.end(),
                       cursor) != values.end() ||
             std::find(values.begin(), values.begin() + v, cursor) !=
                 values.begin() + v);
    values[v] = cursor;
  }
  return values;
}

struct ParsedSpec {
  AveragingSpec spec;
  std::string canonical;
  ExponentPrediction x_exponents;
  std::optional<ExponentPrediction> p_exponents;  // only when F is empty
};

}  // namespace

std::uint64_t plan_hash(const ExperimentPlan& plan) {
  Json j;
  j["dimension"] = plan.dimension;
  j["profile"] = to_string(plan.profile);
  j["delta_prime"] = plan.delta_prime;
  j["delta"] = plan.delta;
  j["symmetry"] = to_string(plan.symmetry);
  j["distribution"] = to_string(plan.distribution);
  Json ladder = Json::array();
  for (const LadderPoint& p : plan.ladder)
    ladder.push_back({{"L", p.side}, {"W", p.band_width}});
  j["ladder"] = ladder;
  j["energies"] = plan.z_grid.energies;
  j["etas"] = plan.z_grid.etas;
  j["kappa"] = plan.z_grid.kappa;
  j["gamma"] = plan.z_grid.gamma;
  j["specs"] = plan.specs;
  j["samples_per_point"] = plan.samples_per_point;
  j["quantile"] = plan.quantile;
  j["epsilon"] = plan.epsilon;
  j["resample_count"] = plan.resample_count;
  j["bootstrap"] = plan.bootstrap;
  j["exact_star_limit"] = plan.exact_star_limit;
  j["subsample_tuples"] = plan.subsample_tuples;
  j["run_p_product"] = plan.run_p_product;
  j["psi_mode"] = to_string(plan.psi_mode);
  j["admissibility_c"] = plan.admissibility_c;
  j["psi_quantile"] = plan.psi_quantile;
  j["seed"] = plan.seed;
  const std::string text = j.dump();

  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  if (plan.samples_per_point < 1)
    throw std::invalid_argument("samples_per_point must be positive");
  for (std::size_t i = 1; i < plan.ladder.size(); ++i)
    if (plan.ladder[i].band_width <= plan.ladder[i - 1].band_width)
      throw std::invalid_argument("ladder must be strictly increasing in W");
  for (double e : plan.z_grid.energies)
    if (std::abs(e) > 2.0 - plan.z_grid.kappa)
      throw std::invalid_argument("z grid leaves the bulk window |E| <= 2-kappa");
  if (plan.psi_mode == PsiMode::Empirical && plan.samples_per_point < 32)
    throw std::invalid_argument("empirical psi mode needs >= 32 samples per point");

  std::vector<ParsedSpec> specs;
  for (const std::string& text : plan.specs) {
    ParsedSpec parsed;
    parsed.spec = parse_monomial(text);
    parsed.canonical = print_monomial(parsed.spec);
    parsed.x_exponents = predicted_exponents(parsed.spec, AveragingMode::QAverage);
    if (parsed.spec.q_set.empty() && plan.run_p_product)
      parsed.p_exponents = predicted_exponents(parsed.spec, AveragingMode::PProduct);
    specs.push_back(std::move(parsed));
  }

  ExperimentResult result;
  result.plan_hash = plan_hash(plan);
  result.tool_version = kToolVersion;

  struct FitRow {
    std::vector<double> log_q, log_bound, log_bound_wrong;
  };
  std::vector<FitRow> fit_rows(specs.size() * 2);  // [spec][estimator X=0, P=1]

  for (std::size_t li = 0; li < plan.ladder.size(); ++li) {
    const LadderPoint& rung = plan.ladder[li];
    BandProfileSpec profile_spec;
    profile_spec.dimension = plan.dimension;
    profile_spec.side = rung.side;
    profile_spec.band_width = rung.band_width;
    profile_spec.profile = plan.profile;
    profile_spec.delta_prime = plan.delta_prime;
    profile_spec.delta = plan.delta;
    const VarianceMatrix s = build_variance_profile(profile_spec);
    const int n = s.dim();
    const double m_scale = s.inv_max_entry;

    std::vector<Complex> z_values;
    for (double e : plan.z_grid.energies)
      for (double eta : plan.z_grid.etas) {
        const double eta_floor = std::pow(m_scale, -1.0 + plan.z_grid.gamma);
        if (eta < eta_floor) {
          std::ostringstream skip;
          skip << "L=" << rung.side << " W=" << rung.band_width << " z=" << e
               << "+" << eta << "i below the domain floor eta >= M^(-1+gamma) = "
               << eta_floor;
          result.skipped.push_back(skip.str());
          continue;
        }
        z_values.emplace_back(e, eta);
      }
    if (z_values.empty()) continue;

    const int num_z = static_cast<int>(z_values.size());
    const int num_specs = static_cast<int>(specs.size());
    const int samples = plan.samples_per_point;

    // slot layout: [z][spec][sample]; estimator P shifted by num_specs
    std::vector<std::vector<std::vector<double>>> x_values(
        num_z, std::vector<std::vector<double>>(2 * num_specs,
                                                std::vector<double>(samples, 0)));
    std::vector<std::vector<std::vector<double>>> x_errors = x_values;
    std::vector<std::vector<double>> lambdas(num_z,
                                             std::vector<double>(samples, 0));

    StarSumConfig star_config;
    star_config.exact_limit = plan.exact_star_limit;
    star_config.subsample_tuples = plan.subsample_tuples;
    star_config.resample_count = plan.resample_count;

    std::atomic<int> next_sample{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    const auto run_samples = [&]() {
      while (true) {
        const int si = next_sample.fetch_add(1);
        if (si >= samples) return;
        const std::uint64_t sample_seed =
            entry_stream(plan.seed, 0x5a5a, li, static_cast<std::uint64_t>(si), 0);
        const MatrixSample sample =
            sample_matrix(s, plan.symmetry, plan.distribution, sample_seed);
        for (int zi = 0; zi < num_z; ++zi) {
          const ResolventTable table(sample, z_values[zi], {});
          lambdas[zi][si] = table.lambda();
          for (int ki = 0; ki < num_specs; ++ki) {
            const AveragingSpec& spec = specs[ki].spec;
            const std::vector<int> externals = spread_indices(
                spec.graph.num_external() +
                    static_cast<int>(spec.weight.fixed_names.size()),
                n);
            const std::vector<int> ext_values(
                externals.begin(), externals.begin() + spec.graph.num_external());
            const std::vector<int> fixed_values(
                externals.begin() + spec.graph.num_external(), externals.end());

            StarSumConfig cfg = star_config;
            cfg.subsample_seed = entry_stream(plan.seed, 0x57a7, li, si, ki);
            const EvaluationResult r =
                evaluate_X(sample, table, spec, ext_values, fixed_values, cfg);
            x_values[zi][ki][si] = std::abs(r.value);
            x_errors[zi][ki][si] = r.std_error;

            if (specs[ki].p_exponents) {
              const std::vector<int> assignment =
                  p_product_assignment(spec, ext_values, n);
              const PProductResult pr = evaluate_P_product(
                  sample, table, spec, assignment, fixed_values,
                  plan.resample_count);
              x_values[zi][num_specs + ki][si] = std::abs(pr.value);
              x_errors[zi][num_specs + ki][si] = pr.std_error;
            }
          }
        }
      }
    };

    const auto worker = [&]() {
      try {
        run_samples();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_sample.store(samples);  // drain remaining work
      }
    };
    const int worker_count =
        plan.workers > 0 ? plan.workers
                         : std::max(1u, std::thread::hardware_concurrency());
    {
      std::vector<std::thread> threads;
      for (int t = 0; t < worker_count; ++t) threads.emplace_back(worker);
      for (std::thread& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (int zi = 0; zi < num_z; ++zi) {
      const Complex z = z_values[zi];
      const double rho_value = rho(s, z);
      const double psi_a =
          psi_ansatz(m_scale, z.imag(), plan.admissibility_c);
      const double psi_e = psi_empirical(lambdas[zi], plan.psi_quantile, m_scale,
                                         plan.admissibility_c);
      const double psi_used = plan.psi_mode == PsiMode::Ansatz ? psi_a : psi_e;
      const double phi_used = phi(psi_used, rho_value, m_scale);
      const double phi_a = phi(psi_a, rho_value, m_scale);
      const bool disagree = psi_a > 3.0 * psi_e || psi_e > 3.0 * psi_a;

      for (int ki = 0; ki < num_specs; ++ki) {
        for (int estimator = 0; estimator < 2; ++estimator) {
          if (estimator == 1 && !specs[ki].p_exponents) continue;
          const ExponentPrediction& exps = estimator == 0
                                               ? specs[ki].x_exponents
                                               : *specs[ki].p_exponents;
          const double bound = std::pow(psi_used, exps.psi_exp) *
                               std::pow(phi_used, exps.phi_exp);
          const double bound_a =
              std::pow(psi_a, exps.psi_exp) * std::pow(phi_a, exps.phi_exp);
          const std::vector<double>& values =
              x_values[zi][estimator * num_specs + ki];

          PointResult point;
          point.side = rung.side;
          point.band_width = rung.band_width;
          point.energy = z.real();
          point.eta = z.imag();
          point.spec = specs[ki].canonical;
          point.estimator = estimator == 0 ? "X" : "P";
          point.psi_exp = exps.psi_exp;
          point.phi_exp = exps.phi_exp;
          point.m_scale = m_scale;
          point.rho_value = rho_value;
          point.psi_ansatz_value = psi_a;
          point.psi_empirical_value = psi_e;
          point.phi_ansatz_value = phi_a;
          point.psi_used = psi_used;
          point.phi_used = phi_used;
          point.bound = bound;
          point.bound_ansatz = bound_a;
          point.samples = samples;
          point.exact_sum =
              estimator == 1 ||
              specs[ki].spec.graph.num_summation <= plan.exact_star_limit;
          double err = 0;
          for (double e : x_errors[zi][estimator * num_specs + ki]) err += e;
          point.mean_std_error = err / samples;
          point.psi_modes_disagree = disagree;
          point.verdict = domination_test(
              values, bound, plan.epsilon, plan.quantile, n, plan.bootstrap,
              entry_stream(plan.seed, 0xb007, li, zi,
                           static_cast<std::uint64_t>(estimator * num_specs + ki)));
          result.all_pass &= point.verdict.pass;

          if (!point.verdict.degenerate) {
            // The regression always runs against the ansatz-priced bound: the
            // empirical quantile saturates its admissibility window at desk
            // scale, which flattens the predictor, while the ansatz tracks
            // the (M eta)^{-1/2} scale the slopes are meant to probe.
            FitRow& row = fit_rows[estimator * specs.size() + ki];
            row.log_q.push_back(std::log(point.verdict.quantile_value));
            row.log_bound.push_back(std::log(bound_a));
            const int wrong_phi = exps.phi_exp > 0 ? exps.phi_exp - 1
                                                   : exps.phi_exp + 1;
            row.log_bound_wrong.push_back(std::log(
                std::pow(psi_a, exps.psi_exp) * std::pow(phi_a, wrong_phi)));
          }
          result.points.push_back(std::move(point));
        }
      }
    }
  }

  for (std::size_t ki = 0; ki < specs.size(); ++ki) {
    for (int estimator = 0; estimator < 2; ++estimator) {
      if (estimator == 1 && !specs[ki].p_exponents) continue;
      const FitRow& row = fit_rows[estimator * specs.size() + ki];
      if (row.log_q.size() < 3) continue;
      SpecFit fit;
      fit.spec = specs[ki].canonical;
      fit.estimator = estimator == 0 ? "X" : "P";
      const ExponentPrediction& exps =
          estimator == 0 ? specs[ki].x_exponents : *specs[ki].p_exponents;
      fit.psi_exp = exps.psi_exp;
      fit.phi_exp = exps.phi_exp;
      fit.fit = scaling_fit(row.log_q, row.log_bound, row.log_bound_wrong);
      result.fits.push_back(std::move(fit));
    }
  }
  return result;
}

namespace {

Json point_to_json(const PointResult& p) {
  Json j;
  j["type"] = "point";
  j["L"] = p.side;
  j["W"] = p.band_width;
  j["E"] = p.energy;
  j["eta"] = p.eta;
  j["spec"] = p.spec;
  j["estimator"] = p.estimator;
  j["psi_exp"] = p.psi_exp;
  j["phi_exp"] = p.phi_exp;
  j["M"] = p.m_scale;
  j["rho"] = p.rho_value;
  j["psi_ansatz"] = p.psi_ansatz_value;
  j["psi_empirical"] = p.psi_empirical_value;
  j["phi_ansatz"] = p.phi_ansatz_value;
  j["psi"] = p.psi_used;
  j["phi"] = p.phi_used;
  j["bound"] = p.bound;
  j["bound_ansatz"] = p.bound_ansatz;
  j["samples"] = p.samples;
  j["exact_sum"] = p.exact_sum;
  j["mean_std_error"] = p.mean_std_error;
  j["quantile"] = p.verdict.quantile_value;
  j["ci_lo"] = p.verdict.ci_lo;
  j["ci_hi"] = p.verdict.ci_hi;
  j["threshold"] = p.verdict.threshold;
  j["margin"] = p.verdict.degenerate ? Json("inf") : Json(p.verdict.margin);
  j["degenerate"] = p.verdict.degenerate;
  j["pass"] = p.verdict.pass;
  j["psi_modes_disagree"] = p.psi_modes_disagree;
  return j;
}

}  // namespace

std::string results_to_jsonl(const ExperimentResult& result) {
  std::ostringstream out;
  Json meta;
  meta["type"] = "meta";
  meta["tool_version"] = result.tool_version;
  meta["plan_hash"] = result.plan_hash;
  meta["all_pass"] = result.all_pass;
  out << meta.dump() << '\n';
  for (const std::string& skip : result.skipped) {
    Json j;
    j["type"] = "skipped";
    j["reason"] = skip;
    out << j.dump() << '\n';
  }
  for (const PointResult& p : result.points) out << point_to_json(p).dump() << '\n';
  for (const SpecFit& f : result.fits) {
    Json j;
    j["type"] = "fit";
    j["spec"] = f.spec;
    j["estimator"] = f.estimator;
    j["psi_exp"] = f.psi_exp;
    j["phi_exp"] = f.phi_exp;
    j["points"] = f.fit.points;
    j["slope"] = f.fit.slope;
    j["std_error"] = f.fit.std_error;
    j["slope_wrong"] = f.fit.slope_wrong;
    j["std_error_wrong"] = f.fit.std_error_wrong;
    j["predictor_spread"] = f.fit.predictor_spread;
    j["inconclusive"] = f.fit.inconclusive;
    j["discriminated"] = f.fit.discriminated;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string results_to_table(const ExperimentResult& result) {
  std::ostringstream out;
  char line[512];
  out << "plan " << std::hex << result.plan_hash << std::dec << "  (fluctavg "
      << result.tool_version << ")\n\n";
  std::snprintf(line, sizeof(line), "%4s %4s %6s %5s %-3s %-12s %10s %10s %8s %s\n",
                "L", "W", "E", "eta", "est", "exponents", "quantile", "threshold",
                "margin", "verdict");
  out << line;
  for (const PointResult& p : result.points) {
    char exponents[32];
    std::snprintf(exponents, sizeof(exponents), "psi^%d phi^%d", p.psi_exp,
                  p.phi_exp);
    std::snprintf(line, sizeof(line),
                  "%4d %4d %6.2f %5.3f %-3s %-12s %10.3e %10.3e %8.3f %s%s\n",
                  p.side, p.band_width, p.energy, p.eta, p.estimator.c_str(),
                  exponents, p.verdict.quantile_value, p.verdict.threshold,
                  p.verdict.margin, p.verdict.pass ? "PASS" : "FAIL",
                  p.psi_modes_disagree ? " [psi modes disagree >3x]" : "");
    out << line;
  }
  out << '\n';
  for (const SpecFit& f : result.fits) {
    std::snprintf(line, sizeof(line),
                  "fit %-1s psi^%d phi^%d  slope %6.3f +- %.3f  off-by-one-phi "
                  "%.3f +- %.3f  %s\n",
                  f.estimator.c_str(), f.psi_exp, f.phi_exp, f.fit.slope,
                  f.fit.std_error, f.fit.slope_wrong, f.fit.std_error_wrong,
                  f.fit.inconclusive
                      ? "inconclusive (flat predictor)"
                      : (f.fit.discriminated ? "discriminated"
                                             : "insufficient resolution"));
    out << line;
    out << "    " << f.spec << '\n';
  }
  return out.str();
}

ExperimentResult results_from_jsonl(const std::string& text) {
  ExperimentResult result;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "meta") {
      result.tool_version = j.at("tool_version").get<std::string>();
      result.plan_hash = j.at("plan_hash").get<std::uint64_t>();
      result.all_pass = j.at("all_pass").get<bool>();
    } else if (type == "skipped") {
      result.skipped.push_back(j.at("reason").get<std::string>());
    } else if (type == "point") {
      PointResult p;
      p.side = j.at("L").get<int>();
      p.band_width = j.at("W").get<int>();
      p.energy = j.at("E").get<double>();
      p.eta = j.at("eta").get<double>();
      p.spec = j.at("spec").get<std::string>();
      p.estimator = j.at("estimator").get<std::string>();
      p.psi_exp = j.at("psi_exp").get<int>();
      p.phi_exp = j.at("phi_exp").get<int>();
      p.m_scale = j.at("M").get<double>();
      p.rho_value = j.at("rho").get<double>();
      p.psi_ansatz_value = j.at("psi_ansatz").get<double>();
      p.psi_empirical_value = j.at("psi_empirical").get<double>();
      p.phi_ansatz_value = j.at("phi_ansatz").get<double>();
      p.psi_used = j.at("psi").get<double>();
      p.phi_used = j.at("phi").get<double>();
      p.bound = j.at("bound").get<double>();
      p.bound_ansatz = j.at("bound_ansatz").get<double>();
      p.samples = j.at("samples").get<int>();
      p.exact_sum = j.at("exact_sum").get<bool>();
      p.mean_std_error = j.at("mean_std_error").get<double>();
      p.verdict.quantile_value = j.at("quantile").get<double>();
      p.verdict.ci_lo = j.at("ci_lo").get<double>();
      p.verdict.ci_hi = j.at("ci_hi").get<double>();
      p.verdict.threshold = j.at("threshold").get<double>();
      p.verdict.degenerate = j.at("degenerate").get<bool>();
      p.verdict.margin = p.verdict.degenerate
                             ? std::numeric_limits<double>::infinity()
                             : j.at("margin").get<double>();
      p.verdict.pass = j.at("pass").get<bool>();
      p.psi_modes_disagree = j.at("psi_modes_disagree").get<bool>();
      result.points.push_back(std::move(p));
    } else if (type == "fit") {
      SpecFit f;
      f.spec = j.at("spec").get<std::string>();
      f.estimator = j.at("estimator").get<std::string>();
      f.psi_exp = j.at("psi_exp").get<int>();
      f.phi_exp = j.at("phi_exp").get<int>();
      f.fit.points = j.at("points").get<int>();
      f.fit.slope = j.at("slope").get<double>();
      f.fit.std_error = j.at("std_error").get<double>();
      f.fit.slope_wrong = j.at("slope_wrong").get<double>();
      f.fit.std_error_wrong = j.at("std_error_wrong").get<double>();
      f.fit.predictor_spread = j.at("predictor_spread").get<double>();
      f.fit.inconclusive = j.at("inconclusive").get<bool>();
      f.fit.discriminated = j.at("discriminated").get<bool>();
      result.fits.push_back(std::move(f));
    } else {
      throw std::invalid_argument("unknown record type '" + type + "'");
    }
  }
  return result;
}

std::string results_to_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "L,W,E,eta,estimator,psi_exp,phi_exp,quantile,bound,threshold,margin,"
         "pass,spec\n";
  for (const PointResult& p : result.points) {
    char line[512];
    std::snprintf(line, sizeof(line), "%d,%d,%.6g,%.6g,%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%d,",
                  p.side, p.band_width, p.energy, p.eta, p.estimator.c_str(),
                  p.psi_exp, p.phi_exp, p.verdict.quantile_value, p.bound,
                  p.verdict.threshold, p.verdict.margin, p.verdict.pass ? 1 : 0);
    out << line << '"' << p.spec << '"' << '\n';
  }
  return out.str();
}

}  // namespace fluctavg
