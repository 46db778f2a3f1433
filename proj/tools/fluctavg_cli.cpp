#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fluctavg/classify.hpp"
#include "fluctavg/config.hpp"
#include "fluctavg/expansion.hpp"
#include "fluctavg/experiment.hpp"
#include "fluctavg/identity_suite.hpp"
#include "fluctavg/version.hpp"

namespace {

using namespace fluctavg;

Config load_effective_config(const std::string& config_path) {
  if (!config_path.empty()) return load_config(config_path);
  if (const char* env = std::getenv("FLUCTAVG_CONFIG"))
    if (*env) return load_config(env);
  return parse_config_text(default_config_text());
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string spec_from_options(const std::string& inline_text,
                              const std::string& file) {
  if (!inline_text.empty()) return inline_text;
  if (!file.empty()) return read_file(file);
  throw std::runtime_error("provide a spec block or --file");
}

int run_check_identities(const Config& config) {
  const IdentitySuiteReport report = run_identity_suite(
      config.identities, config.distribution, config.base_seed, config.workers);
  std::cout << identity_report_text(report);
  return report.pass ? 0 : 1;
}

int run_predict(const std::string& text) {
  const AveragingSpec spec = parse_monomial(text);
  const VertexClassification cls = classify(spec);
  std::cout << "spec: " << print_monomial(spec) << '\n';
  std::cout << "deg = " << spec.graph.degree() << ", |F| = " << spec.q_set.size()
            << ", charged = " << cls.num_charged()
            << ", chain vertices = " << cls.chain_count << '\n';
  for (int v = 0; v < spec.graph.num_summation; ++v) {
    const VertexInfo& info = cls.summation[v];
    std::cout << "  " << spec.graph.name(v) << ": nu=" << info.solid_legs
              << " nu*=" << info.dashed_legs << (info.charged ? " charged" : "")
              << (info.chain_vertex ? " chain" : "")
              << (spec.in_q_set(v) ? " Q" : "") << '\n';
  }

  const auto show = [&](const char* label, const ExponentPrediction& p) {
    std::cout << label << ": Psi^" << p.psi_exp;
    if (p.phi_exp != 0) std::cout << " Phi^" << p.phi_exp;
    std::cout << "   [simple: (Psi+M^-1/4)^" << p.simple_exp << "]\n";
  };
  show("Q-average bound", predicted_exponents(spec, AveragingMode::QAverage));
  if (spec.q_set.empty())
    show("P-product bound", predicted_exponents(spec, AveragingMode::PProduct));
  if (is_chain_graph(spec.graph) && is_chain_weight(spec))
    show("chain bound", predicted_exponents(spec, AveragingMode::Chain));
  return 0;
}

int run_expand(const std::string& text, int p, const std::string& symmetry,
               int stop_edges, long max_graphs, bool dump) {
  const AveragingSpec spec = parse_monomial(text);
  const SymmetryClass sym = symmetry_from_string(symmetry);
  const PipelineReport report =
      run_expansion_pipeline(spec, p, sym, stop_edges, max_graphs);

  std::cout << "spec: " << print_monomial(spec) << '\n';
  std::cout << "p = " << p << ", symmetry = " << symmetry << '\n';
  std::cout << "histories: " << report.histories << " complete, "
            << report.remainder_histories << " remainder\n";
  std::cout << "distinct graphs: " << report.distinct_graphs << " ("
            << report.surviving_graphs << " surviving)\n";
  std::cout << "minimal surviving edge count: " << report.min_surviving_edges
            << " (p(deg+|F|) = "
            << report.context.p * (report.context.degree + report.context.q_count)
            << ")\n";
  if (report.truncated) std::cout << "WARNING: enumeration truncated by caps\n";
  std::cout << "resolution stages: " << report.structure.theta_count
            << " resolved, " << report.structure.upsilon_count << " lumped\n";
  std::cout << "marked vertices across graphs: " << report.structure.marked_total
            << '\n';
  const auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
  std::cout << "assertions:\n";
  std::cout << "  marked-vertex leg imbalance : "
            << flag(report.structure.marked_imbalance_ok) << '\n';
  std::cout << "  edge lower bound            : "
            << flag(report.structure.edge_lower_bound_ok) << '\n';
  std::cout << "  edge conservation           : "
            << flag(report.structure.edge_conservation_ok) << '\n';
  std::cout << "  resolution case structure   : "
            << flag(report.structure.case_structure_ok) << '\n';
  std::cout << "  power-counting inequality   : "
            << flag(report.structure.exponents_ok) << '\n';
  for (const std::string& counterexample : report.structure.counterexamples)
    std::cout << "counterexample:\n" << counterexample << '\n';

  if (dump) {
    const ExpansionGraph power = power_graph(spec.graph, p);
    ExpansionLimits limits;
    limits.stop_edges =
        stop_edges > 0
            ? stop_edges
            : report.context.p * (report.context.degree + report.context.q_count);
    limits.max_graphs = max_graphs;
    const MaximalExpansionResult expanded =
        maximal_expansion(power, spec.q_set, limits);
    for (const ExpansionGraph* gamma : expanded.surviving())
      std::cout << dump_graph(*gamma, spec.graph);
  }
  return report.structure.all_ok() && !report.truncated ? 0 : 1;
}

int run_verify(const Config& config, bool allow_inconclusive) {
  const ExperimentPlan plan = make_plan(config);
  const ExperimentResult result = run_experiment(plan);

  write_file(config.output.results, results_to_jsonl(result));
  const std::string table = results_to_table(result);
  write_file(config.output.summary, table);
  write_file(config.output.columns, results_to_csv(result));
  std::cout << table;
  std::cout << "results: " << config.output.results << '\n';

  bool ok = result.all_pass;
  for (const SpecFit& fit : result.fits)
    if (fit.fit.inconclusive || !fit.fit.discriminated)
      if (!allow_inconclusive) ok = false;
  return ok ? 0 : 1;
}

int run_report(const std::string& results_path, const std::string& out_dir) {
  const ExperimentResult result = results_from_jsonl(read_file(results_path));
  const std::string table = results_to_table(result);
  std::cout << table;
  if (!out_dir.empty()) {
    write_file(out_dir + "/summary.txt", table);
    write_file(out_dir + "/columns.csv", results_to_csv(result));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluctuation-averaging toolkit for random band matrices"};
  app.set_version_flag("--version", std::string("fluctavg ") + kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int workers_override = -1;
  std::string out_dir;
  bool allow_inconclusive = false;
  app.add_option("--config", config_path,
                 "config file (default: $FLUCTAVG_CONFIG or built-in)");
  app.add_option("--seed", seed_override, "override the base seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--workers", workers_override, "worker threads (0 = hardware)");
  app.add_option("--out", out_dir, "output directory override");
  app.add_flag("--allow-inconclusive", allow_inconclusive,
               "exit 0 even when scaling fits are inconclusive");

  CLI::App* check = app.add_subcommand(
      "check-identities", "run the exact resolvent-identity suite");

  std::string predict_spec, predict_file;
  CLI::App* predict =
      app.add_subcommand("predict", "classify a monomial and print its bounds");
  predict->add_option("spec", predict_spec, "spec block");
  predict->add_option("--file", predict_file, "read the spec block from a file");

  std::string expand_spec, expand_file, expand_symmetry = "complex-hermitian";
  int expand_p = 2;
  int expand_stop = 0;
  long expand_max_graphs = 100000;
  bool expand_dump = false;
  CLI::App* expand = app.add_subcommand(
      "expand", "run the symbolic moment-expansion pipeline");
  expand->add_option("spec", expand_spec, "spec block");
  expand->add_option("--file", expand_file, "read the spec block from a file");
  expand->add_option("-p,--power", expand_p, "moment power (even)");
  expand->add_option("--symmetry", expand_symmetry,
                     "real-symmetric|complex-hermitian");
  expand->add_option("--stop-edges", expand_stop,
                     "edge cap (default p(deg+|F|))");
  expand->add_option("--max-graphs", expand_max_graphs, "distinct-graph cap");
  expand->add_flag("--dump", expand_dump, "dump surviving graphs");

  CLI::App* verify =
      app.add_subcommand("verify", "run the Monte Carlo scaling experiment");

  std::string report_results;
  CLI::App* report = app.add_subcommand("report", "re-render a results file");
  report->add_option("results", report_results, "results.jsonl path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (predict->parsed())
      return run_predict(spec_from_options(predict_spec, predict_file));
    if (expand->parsed())
      return run_expand(spec_from_options(expand_spec, expand_file), expand_p,
                        expand_symmetry, expand_stop, expand_max_graphs,
                        expand_dump);
    if (report->parsed()) return run_report(report_results, out_dir);

    Config config = load_effective_config(config_path);
    if (seed_set) config.base_seed = seed_override;
    if (workers_override >= 0) config.workers = workers_override;
    if (!out_dir.empty()) {
      config.output.results = out_dir + "/results.jsonl";
      config.output.summary = out_dir + "/summary.txt";
      config.output.columns = out_dir + "/columns.csv";
    }
    if (check->parsed()) return run_check_identities(config);
    if (verify->parsed()) return run_verify(config, allow_inconclusive);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
