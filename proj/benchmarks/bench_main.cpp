#include <benchmark/benchmark.h>

#include "fluctavg/control.hpp"
#include "fluctavg/evaluate.hpp"
#include "fluctavg/expansion.hpp"

using namespace fluctavg;

namespace {

const VarianceMatrix& profile_for(int side) {
  static std::map<int, VarianceMatrix> cache;
  auto it = cache.find(side);
  if (it == cache.end()) {
    BandProfileSpec spec;
    spec.side = side;
    spec.band_width = std::max(4, side / 8);
    it = cache.emplace(side, build_variance_profile(spec)).first;
  }
  return it->second;
}

}  // namespace

static void BM_ResolventSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const VarianceMatrix& s = profile_for(n);
  const MatrixSample sample =
      sample_matrix(s, SymmetryClass::ComplexHermitian, EntryDistribution::Gaussian, 1);
  for (auto _ : state) {
    const ResolventTable table(sample, Complex(0.5, 0.1), {});
    benchmark::DoNotOptimize(table.dense().data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_ResolventSolve)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_QAverageEvaluation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const VarianceMatrix& s = profile_for(n);
  const MatrixSample sample =
      sample_matrix(s, SymmetryClass::ComplexHermitian, EntryDistribution::Gaussian, 2);
  const ResolventTable table(sample, Complex(0.5, 0.1), {});
  const AveragingSpec spec =
      parse_monomial("sum a; ext mu; Q: a; w: 1/N; g(mu,a) g*(a,mu)");
  StarSumConfig config;
  config.resample_count = 16;
  for (auto _ : state) {
    const EvaluationResult r =
        evaluate_X(sample, table, spec, {n / 2}, {}, config);
    benchmark::DoNotOptimize(r.value);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_QAverageEvaluation)->RangeMultiplier(2)->Range(64, 256)->Complexity();

static void BM_RhoDenseInverse(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const VarianceMatrix& s = profile_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(rho(s, Complex(0.5, 0.1)));
  state.SetComplexityN(n);
}
BENCHMARK(BM_RhoDenseInverse)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_MaximalExpansion(benchmark::State& state) {
  const AveragingSpec spec =
      parse_monomial("sum a; ext mu; Q: a; w: 1/N; g(mu,a) g*(a,mu)");
  const ExpansionGraph power = power_graph(spec.graph, 2);
  ExpansionLimits limits;
  limits.stop_edges = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const MaximalExpansionResult result =
        maximal_expansion(power, spec.q_set, limits);
    benchmark::DoNotOptimize(result.graphs.size());
  }
}
BENCHMARK(BM_MaximalExpansion)->DenseRange(6, 9, 1);

BENCHMARK_MAIN();
