#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluctavg {

enum class ProfileKind { Step, Triangular };

ProfileKind profile_kind_from_string(const std::string& name);
std::string to_string(ProfileKind kind);

// Torus band profile: dimension d, side L, band width W, and a bounded
// symmetric probability density f on R^d evaluated at lattice points
// [i - j]_L / W. The step profile is the uniform density on [-1, 1]^d and the
// triangular profile is prod_k max(1 - |x_k|, 0).
struct BandProfileSpec {
  int dimension = 1;
  int side = 0;        // L; the matrix dimension is N = L^d
  int band_width = 0;  // W
  ProfileKind profile = ProfileKind::Step;
  double delta_prime = 0.3;  // enforces L^{delta'} <= W <= L
  double delta = 0.3;        // enforces N^{delta} <= M <= N

  int matrix_dim() const;
  double density(const std::vector<double>& x) const;
  double sup_density() const;  // ||f||_inf, used when relating M to W^d
};

struct VarianceMatrix {
  Eigen::MatrixXd entries;    // S, N x N, rows sum to exactly 1
  double inv_max_entry = 0;   // M = 1 / max_ij s_ij
  double normalization = 0;   // Z_L = sum_j f([j]_L / W)
  BandProfileSpec spec;

  int dim() const { return static_cast<int>(entries.rows()); }
  double max_entry() const { return 1.0 / inv_max_entry; }

  // Indices with s_aj > 0, including a itself; evaluation code restricts
  // quadratic forms to this support.
  std::vector<int> row_support(int a) const;
};

// Canonical representative of k in [-L/2, L/2).
long canonical_rep(long k, long side);

// Builds S with s_ij = f([i-j]_L / W) / Z_L. Throws std::invalid_argument on
// degenerate input (zero profile row, W outside [L^{delta'}, L], M outside
// [N^delta, N]).
VarianceMatrix build_variance_profile(const BandProfileSpec& spec);

}  // namespace fluctavg
