#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "fluctavg/band_profile.hpp"

namespace fluctavg {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

enum class SymmetryClass { RealSymmetric, ComplexHermitian };
enum class EntryDistribution { Gaussian, Rademacher };

SymmetryClass symmetry_from_string(const std::string& name);
EntryDistribution distribution_from_string(const std::string& name);
std::string to_string(SymmetryClass c);
std::string to_string(EntryDistribution d);

// One Hermitian draw H with h_ij = s_ij^{1/2} zeta_ij. Entry (i, j), i <= j,
// of resampling round r is drawn from the stream (seed, round r, i, j), so
// redrawing a row is reproducible and leaves every other entry untouched.
struct MatrixSample {
  ComplexMatrix matrix;
  SymmetryClass symmetry = SymmetryClass::ComplexHermitian;
  EntryDistribution distribution = EntryDistribution::Gaussian;
  std::uint64_t seed = 0;
  const VarianceMatrix* profile = nullptr;  // not owned

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Normalized entry zeta_ij for (round, i, j) with i <= j; unit variance,
// mean zero. Diagonal draws are always real.
Complex draw_zeta(SymmetryClass symmetry, EntryDistribution dist,
                  std::uint64_t seed, std::uint64_t round, int i, int j);

MatrixSample sample_matrix(const VarianceMatrix& profile, SymmetryClass symmetry,
                           EntryDistribution dist, std::uint64_t seed);

// Copy of `sample` in which the rows/columns listed in `indices` are redrawn
// (Hermitian-consistently) from resampling round `round`; all other entries
// are bit-identical to the input.
MatrixSample resample_rows(const MatrixSample& sample,
                           const std::vector<int>& indices, std::uint64_t round);

// The fresh value h'_ij the resampling round `round` assigns to entry (i, j).
Complex resampled_entry(const MatrixSample& sample, std::uint64_t round, int i,
                        int j);

}  // namespace fluctavg
