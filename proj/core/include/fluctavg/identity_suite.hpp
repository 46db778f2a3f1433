#pragma once

#include "fluctavg/config.hpp"
#include "fluctavg/resolvent.hpp"

namespace fluctavg {

struct IdentitySuiteReport {
  long configurations = 0;
  double worst_family_a = 0;
  double worst_family_b = 0;
  double worst_schur = 0;
  double worst_zu = 0;      // 1/G_ii reconstructed from Z and U
  double worst_solve = 0;   // (H^{(T)} - z) G^{(T)} - I residual
  double worst_eta_bound = 0;  // max ||G||_max * eta over samples, must be <= 1
  double tolerance = 1e-9;
  bool pass = false;
};

// Random-configuration sweep of the exact resolvent identities over both
// symmetry classes; residuals above `tolerance` fail the suite.
IdentitySuiteReport run_identity_suite(const IdentitySuiteConfig& config,
                                       EntryDistribution distribution,
                                       std::uint64_t seed, int workers = 0);

std::string identity_report_text(const IdentitySuiteReport& report);

}  // namespace fluctavg
