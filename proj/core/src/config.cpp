#include "fluctavg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fluctavg {

namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument("config section '" + where + "' must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument("unknown config key '" + where + "." +
                                  item.key() + "'");
}

}  // namespace

Config parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& err) {
    throw std::invalid_argument(std::string("config parse error: ") + err.what());
  }
  reject_unknown(j, {"ensemble", "control", "specs", "verifier", "identities",
                     "output"},
                 "");

  Config config;
  if (j.contains("ensemble")) {
    const Json& e = j["ensemble"];
    reject_unknown(e,
                   {"dimension", "profile", "delta_prime", "delta", "symmetry",
                    "distribution", "base_seed"},
                   "ensemble");
    if (e.contains("dimension")) config.dimension = e["dimension"].get<int>();
    if (e.contains("profile"))
      config.profile = profile_kind_from_string(e["profile"].get<std::string>());
    if (e.contains("delta_prime")) config.delta_prime = e["delta_prime"].get<double>();
    if (e.contains("delta")) config.delta = e["delta"].get<double>();
    if (e.contains("symmetry"))
      config.symmetry = symmetry_from_string(e["symmetry"].get<std::string>());
    if (e.contains("distribution"))
      config.distribution =
          distribution_from_string(e["distribution"].get<std::string>());
    if (e.contains("base_seed")) config.base_seed = e["base_seed"].get<std::uint64_t>();
  }

  if (j.contains("control")) {
    const Json& c = j["control"];
    reject_unknown(c, {"psi_mode", "c", "quantile", "z_grid"}, "control");
    if (c.contains("psi_mode"))
      config.psi_mode = psi_mode_from_string(c["psi_mode"].get<std::string>());
    if (c.contains("c")) config.admissibility_c = c["c"].get<double>();
    if (c.contains("quantile")) config.psi_quantile = c["quantile"].get<double>();
    if (c.contains("z_grid")) {
      const Json& g = c["z_grid"];
      reject_unknown(g, {"E", "eta", "kappa", "gamma"}, "control.z_grid");
      if (g.contains("E")) config.z_grid.energies = g["E"].get<std::vector<double>>();
      if (g.contains("eta")) config.z_grid.etas = g["eta"].get<std::vector<double>>();
      if (g.contains("kappa")) config.z_grid.kappa = g["kappa"].get<double>();
      if (g.contains("gamma")) config.z_grid.gamma = g["gamma"].get<double>();
    }
  }

  if (j.contains("specs")) {
    if (!j["specs"].is_array())
      throw std::invalid_argument("config key 'specs' must be an array of spec blocks");
    config.specs = j["specs"].get<std::vector<std::string>>();
  }

  if (j.contains("verifier")) {
    const Json& v = j["verifier"];
    reject_unknown(v,
                   {"ladder", "samples_per_point", "quantile", "epsilon", "K",
                    "bootstrap", "exact_star_limit", "subsample_tuples",
                    "run_p_product", "workers"},
                   "verifier");
    if (v.contains("ladder")) {
      config.ladder.clear();
      for (const Json& rung : v["ladder"]) {
        if (!rung.is_array() || rung.size() != 2)
          throw std::invalid_argument("verifier.ladder entries must be [L, W]");
        config.ladder.push_back({rung[0].get<int>(), rung[1].get<int>()});
      }
    }
    if (v.contains("samples_per_point"))
      config.samples_per_point = v["samples_per_point"].get<int>();
    if (v.contains("quantile")) config.quantile = v["quantile"].get<double>();
    if (v.contains("epsilon")) config.epsilon = v["epsilon"].get<double>();
    if (v.contains("K")) config.resample_count = v["K"].get<int>();
    if (v.contains("bootstrap")) config.bootstrap = v["bootstrap"].get<int>();
    if (v.contains("exact_star_limit"))
      config.exact_star_limit = v["exact_star_limit"].get<int>();
    if (v.contains("subsample_tuples"))
      config.subsample_tuples = v["subsample_tuples"].get<long>();
    if (v.contains("run_p_product"))
      config.run_p_product = v["run_p_product"].get<bool>();
    if (v.contains("workers")) config.workers = v["workers"].get<int>();
  }

  if (j.contains("identities")) {
    const Json& i = j["identities"];
    reject_unknown(i,
                   {"sizes", "configs_per_size", "max_minor", "tolerance", "E",
                    "eta"},
                   "identities");
    if (i.contains("sizes")) config.identities.sizes = i["sizes"].get<std::vector<int>>();
    if (i.contains("configs_per_size"))
      config.identities.configs_per_size = i["configs_per_size"].get<int>();
    if (i.contains("max_minor")) config.identities.max_minor = i["max_minor"].get<int>();
    if (i.contains("tolerance")) config.identities.tolerance = i["tolerance"].get<double>();
    if (i.contains("E")) config.identities.energies = i["E"].get<std::vector<double>>();
    if (i.contains("eta")) config.identities.etas = i["eta"].get<std::vector<double>>();
  }

  if (j.contains("output")) {
    const Json& o = j["output"];
    reject_unknown(o, {"results", "summary", "columns"}, "output");
    if (o.contains("results")) config.output.results = o["results"].get<std::string>();
    if (o.contains("summary")) config.output.summary = o["summary"].get<std::string>();
    if (o.contains("columns")) config.output.columns = o["columns"].get<std::string>();
  }
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string default_config_text() {
  return R"json({
  "ensemble": {
    "dimension": 1,
    "profile": "step",
    "symmetry": "complex-hermitian",
    "distribution": "gaussian",
    "base_seed": 1
  },
  "control": {
    "psi_mode": "empirical",
    "c": 0.05,
    "quantile": 0.9,
    "z_grid": {"E": [-0.5, 0.0, 0.5], "eta": [0.02, 0.05, 0.1], "kappa": 0.1, "gamma": 0.1}
  },
  "specs": [
    "sum a; ext mu; Q: -; w: 1/N; g(mu,a) g(a,mu)",
    "sum a; ext mu; Q: -; w: 1/N; g(mu,a) g*(a,mu)",
    "sum a; ext mu; Q: a; w: 1/N; g(mu,a) g*(a,mu)"
  ],
  "verifier": {
    "ladder": [[64, 8], [128, 16], [256, 32], [512, 64]],
    "samples_per_point": 256,
    "quantile": 0.99,
    "epsilon": 0.1,
    "K": 64,
    "bootstrap": 200,
    "exact_star_limit": 3,
    "subsample_tuples": 20000,
    "run_p_product": true,
    "workers": 0
  },
  "identities": {
    "sizes": [20, 50, 200],
    "configs_per_size": 100,
    "max_minor": 4,
    "tolerance": 1e-9,
    "E": [0.0, 0.5, -0.5],
    "eta": [0.05, 0.5, 5.0]
  },
  "output": {
    "results": "out/results.jsonl",
    "summary": "out/summary.txt",
    "columns": "out/columns.csv"
  }
})json";
}

ExperimentPlan make_plan(const Config& config) {
  ExperimentPlan plan;
  plan.dimension = config.dimension;
  plan.profile = config.profile;
  plan.delta_prime = config.delta_prime;
  plan.delta = config.delta;
  plan.symmetry = config.symmetry;
  plan.distribution = config.distribution;
  plan.ladder = config.ladder;
  plan.z_grid = config.z_grid;
  plan.specs = config.specs;
  plan.samples_per_point = config.samples_per_point;
  plan.quantile = config.quantile;
  plan.epsilon = config.epsilon;
  plan.resample_count = config.resample_count;
  plan.bootstrap = config.bootstrap;
  plan.exact_star_limit = config.exact_star_limit;
  plan.subsample_tuples = config.subsample_tuples;
  plan.run_p_product = config.run_p_product;
  plan.psi_mode = config.psi_mode;
  plan.admissibility_c = config.admissibility_c;
  plan.psi_quantile = config.psi_quantile;
  plan.seed = config.base_seed;
  plan.workers = config.workers;
  return plan;
}

std::uint64_t config_hash(const Config& config) {
  return plan_hash(make_plan(config));
}

}  // namespace fluctavg
