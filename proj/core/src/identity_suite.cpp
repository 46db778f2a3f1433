#include "fluctavg/identity_suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "fluctavg/rng.hpp"

namespace fluctavg {

namespace {

struct Draw {
  int size = 0;
  int band_width = 0;
  Complex z;
  SymmetryClass symmetry = SymmetryClass::ComplexHermitian;
  std::vector<int> minor_set;
  int i = 0, j = 0, k = 0;
};

Draw make_draw(const IdentitySuiteConfig& config, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Draw draw;
  draw.size = config.sizes[rng() % config.sizes.size()];
  const int w_floor =
      std::max(2, static_cast<int>(std::ceil(std::pow(draw.size, 0.3))));
  draw.band_width =
      w_floor + static_cast<int>(rng() % std::max(1, draw.size - w_floor));
  draw.z = Complex(config.energies[rng() % config.energies.size()],
                   config.etas[rng() % config.etas.size()]);
  draw.symmetry = (rng() & 1) ? SymmetryClass::ComplexHermitian
                              : SymmetryClass::RealSymmetric;

  const int minor_size = static_cast<int>(rng() % (config.max_minor + 1));
  std::vector<int> pool(draw.size);
  for (int v = 0; v < draw.size; ++v) pool[v] = v;
  for (int t = 0; t < minor_size + 3; ++t) {
    const int swap_with = t + static_cast<int>(rng() % (draw.size - t));
    std::swap(pool[t], pool[swap_with]);
  }
  draw.minor_set.assign(pool.begin(), pool.begin() + minor_size);
  draw.i = pool[minor_size];
  draw.j = pool[minor_size + 1];
  draw.k = pool[minor_size + 2];
  return draw;
}

}  // namespace

IdentitySuiteReport run_identity_suite(const IdentitySuiteConfig& config,
                                       EntryDistribution distribution,
                                       std::uint64_t seed, int workers) {
  IdentitySuiteReport report;
  report.tolerance = config.tolerance;
  const long total =
      static_cast<long>(config.configs_per_size) * config.sizes.size();

  std::mutex merge_mutex;
  std::atomic<long> next{0};
  const auto worker = [&]() {
    IdentitySuiteReport local;
    while (true) {
      const long index = next.fetch_add(1);
      if (index >= total) break;
      const Draw draw =
          make_draw(config, entry_stream(seed, 0x1de7, index, 0, 0));
      // Rademacher entries only exist in the real-symmetric class.
      const EntryDistribution dist =
          draw.symmetry == SymmetryClass::ComplexHermitian
              ? EntryDistribution::Gaussian
              : distribution;

      BandProfileSpec profile_spec;
      profile_spec.side = draw.size;
      profile_spec.band_width = draw.band_width;
      const VarianceMatrix s = build_variance_profile(profile_spec);
      const MatrixSample sample = sample_matrix(
          s, draw.symmetry, dist, entry_stream(seed, 0x5eed, index, 0, 0));

      const FamilyAResidual a = verify_family_A(sample, draw.z, draw.i, draw.j,
                                                draw.k, draw.minor_set);
      local.worst_family_a =
          std::max({local.worst_family_a, a.off_diagonal, a.diagonal});

      const FamilyBResidual b =
          verify_family_B(sample, draw.z, draw.i, draw.j, draw.minor_set);
      local.worst_family_b =
          std::max({local.worst_family_b, b.single_row, b.double_row});
      local.worst_zu = std::max(local.worst_zu, b.diagonal);

      local.worst_schur = std::max(
          local.worst_schur, verify_schur(sample, draw.z, draw.i, draw.minor_set));

      const ResolventTable table(sample, draw.z, draw.minor_set);
      local.worst_solve = std::max(local.worst_solve, table.solve_residual(sample));
      local.worst_eta_bound = std::max(
          local.worst_eta_bound, table.max_abs_entry() * draw.z.imag());
      ++local.configurations;
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    report.configurations += local.configurations;
    report.worst_family_a = std::max(report.worst_family_a, local.worst_family_a);
    report.worst_family_b = std::max(report.worst_family_b, local.worst_family_b);
    report.worst_schur = std::max(report.worst_schur, local.worst_schur);
    report.worst_zu = std::max(report.worst_zu, local.worst_zu);
    report.worst_solve = std::max(report.worst_solve, local.worst_solve);
    report.worst_eta_bound =
        std::max(report.worst_eta_bound, local.worst_eta_bound);
  };

  const int worker_count =
      workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> threads;
  for (int t = 0; t < worker_count; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  report.pass = report.worst_family_a <= config.tolerance &&
                report.worst_family_b <= config.tolerance &&
                report.worst_schur <= config.tolerance &&
                report.worst_zu <= config.tolerance &&
                report.worst_solve <= config.tolerance &&
                report.worst_eta_bound <= 1.0 + 1e-12;
  return report;
}

std::string identity_report_text(const IdentitySuiteReport& report) {
  std::ostringstream out;
  out << "identity suite: " << report.configurations << " configurations\n";
  out << "  family A worst residual : " << report.worst_family_a << '\n';
  out << "  family B worst residual : " << report.worst_family_b << '\n';
  out << "  Schur worst residual    : " << report.worst_schur << '\n';
  out << "  Z/U rebuild residual    : " << report.worst_zu << '\n';
  out << "  solve residual          : " << report.worst_solve << '\n';
  out << "  max eta*||G||_max       : " << report.worst_eta_bound << '\n';
  out << "  tolerance " << report.tolerance << " -> "
      << (report.pass ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace fluctavg
