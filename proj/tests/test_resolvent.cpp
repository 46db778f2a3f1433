#include <doctest.h>

#include <cmath>
#include <memory>

#include "fluctavg/resolvent.hpp"
#include "semicircle_oracle.hpp"
#include "fluctavg/rng.hpp"

using namespace fluctavg;

namespace {

MatrixSample band_sample(int side, int width, std::uint64_t seed,
                         SymmetryClass sym = SymmetryClass::ComplexHermitian) {
  static std::vector<std::unique_ptr<VarianceMatrix>> keep_alive;
  BandProfileSpec spec;
  spec.side = side;
  spec.band_width = width;
  keep_alive.push_back(
      std::make_unique<VarianceMatrix>(build_variance_profile(spec)));
  return sample_matrix(*keep_alive.back(), sym, EntryDistribution::Gaussian, seed);
}

}  // namespace

TEST_CASE("semicircle transform at z = 2i") {
  const Complex m = semicircle_m(Complex(0, 2));
  CHECK(std::abs(m - Complex(0, std::sqrt(2.0) - 1.0)) < 1e-14);
  CHECK_THROWS_AS(semicircle_m(Complex(1, -0.5)), std::invalid_argument);
  CHECK_THROWS_AS(semicircle_m(Complex(1, 0)), std::invalid_argument);
}

TEST_CASE("semicircle transform solves its quadratic and matches quadrature") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const double e = -1.9 + 3.8 * (rng() % 1000) / 999.0;
    const double eta = 0.02 + 9.98 * (rng() % 1000) / 999.0;
    const Complex z(e, eta);
    const Complex m = semicircle_m(z);
    CHECK(m.imag() > 0.0);
    CHECK(std::abs(m + 1.0 / m + z) <= 1e-12);
    CHECK(std::abs(m) <= 1.0 + 1e-12);
    CHECK(std::abs(m) >= 0.05);
    CHECK(std::abs(m - semicircle_stieltjes_quadrature(z, 400)) < 1e-8);
  }
}

TEST_CASE("m tends to i at the bulk center") {
  for (double eta : {1e-3, 1e-5, 1e-7})
    CHECK(std::abs(semicircle_m(Complex(0, eta)) - Complex(0, 1)) < 2 * eta);
}

TEST_CASE("scalar resolvent cases") {
  BandProfileSpec spec;
  spec.side = 1;
  spec.band_width = 1;
  const VarianceMatrix s = build_variance_profile(spec);
  MatrixSample sample = sample_matrix(s, SymmetryClass::ComplexHermitian,
                                      EntryDistribution::Gaussian, 1);
  sample.matrix(0, 0) = Complex(0, 0);
  const ResolventTable table(sample, Complex(0, 1), {});
  CHECK(std::abs(table.g(0, 0) - Complex(0, 1)) < 1e-15);  // 1/(0 - i) = i
}

TEST_CASE("removing all but one index reduces to the scalar inverse") {
  const MatrixSample sample = band_sample(12, 4, 21);
  std::vector<int> minor_set;
  for (int v = 0; v < 12; ++v)
    if (v != 5) minor_set.push_back(v);
  const ResolventTable table(sample, Complex(0.3, 0.7), minor_set);
  const Complex expected = 1.0 / (sample.matrix(5, 5) - Complex(0.3, 0.7));
  CHECK(std::abs(table.g(5, 5) - expected) < 1e-14);
  CHECK_THROWS_AS(table.g(0, 5), std::out_of_range);
}

TEST_CASE("dense solve residual stays at solver precision") {
  const MatrixSample sample = band_sample(50, 8, 33);
  const ResolventTable table(sample, Complex(0.5, 0.05), {2, 17});
  CHECK(table.solve_residual(sample) <= 1e-9);
  CHECK(table.max_abs_entry() <= 1.0 / 0.05 + 1e-9);
}

TEST_CASE("family A identities hold to 1e-9") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const MatrixSample sample = band_sample(20, 5, seed);
    const Complex z(0.4, 0.1);
    SUBCASE("") {}
    const FamilyAResidual plain = verify_family_A(sample, z, 2, 9, 14, {});
    CHECK(plain.off_diagonal <= 1e-9);
    CHECK(plain.diagonal <= 1e-9);

    // i = j with an adjacent k, and a fat minor set
    const FamilyAResidual diag = verify_family_A(sample, z, 4, 4, 5, {0, 1});
    CHECK(diag.off_diagonal <= 1e-9);
    CHECK(diag.diagonal <= 1e-9);

    std::vector<int> all_but_three;
    for (int v = 0; v < 20; ++v)
      if (v != 2 && v != 9 && v != 14) all_but_three.push_back(v);
    const FamilyAResidual tight =
        verify_family_A(sample, z, 2, 9, 14, all_but_three);
    CHECK(tight.off_diagonal <= 1e-9);
    CHECK(tight.diagonal <= 1e-9);

    CHECK_THROWS_AS(verify_family_A(sample, z, 2, 9, 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(verify_family_A(sample, z, 2, 9, 14, {2}), std::invalid_argument);
  }
}

TEST_CASE("family B identities hold to 1e-9") {
  for (std::uint64_t seed : {4ULL, 5ULL}) {
    const MatrixSample sample = band_sample(20, 6, seed, SymmetryClass::RealSymmetric);
    const Complex z(-0.5, 0.2);
    const FamilyBResidual plain = verify_family_B(sample, z, 3, 11, {});
    CHECK(plain.single_row <= 1e-9);
    CHECK(plain.double_row <= 1e-9);
    CHECK(plain.diagonal <= 1e-9);

    const FamilyBResidual minors = verify_family_B(sample, z, 3, 11, {0, 7, 15});
    CHECK(minors.single_row <= 1e-9);
    CHECK(minors.double_row <= 1e-9);
    CHECK(minors.diagonal <= 1e-9);

    CHECK_THROWS_AS(verify_family_B(sample, z, 3, 3, {}), std::invalid_argument);
  }
}

TEST_CASE("Schur complement formula holds") {
  const MatrixSample sample = band_sample(30, 8, 6);
  CHECK(verify_schur(sample, Complex(0.1, 0.3), 4, {1, 9}) <= 1e-9);
  CHECK(verify_schur(sample, Complex(0, 5), 4, {}) <= 1e-11);  // well-conditioned

  // 2x2 closed form: 1/G_11 = h_11 - z - |h_12|^2 / (h_22 - z)
  const MatrixSample tiny = band_sample(2, 2, 8);
  const Complex z(0.2, 0.4);
  const ResolventTable table(tiny, z, {});
  const Complex expected = tiny.matrix(0, 0) - z -
                           std::norm(tiny.matrix(0, 1)) / (tiny.matrix(1, 1) - z);
  CHECK(std::abs(1.0 / table.g(0, 0) - expected) < 1e-12);
}

TEST_CASE("Z and U take their closed forms on the zero matrix") {
  MatrixSample sample = band_sample(10, 3, 9);
  sample.matrix.setZero();
  const Complex z(0, 1);
  const ZUPair zu = compute_Z_U(sample, z, 2, {}, {2});
  // The quadratic form vanishes, so Z is minus its conditional expectation:
  // Z = -sum_k s_ik G^{(i)}_kk = sum_k s_ik / z.
  Complex row_mass(0, 0);
  for (int k = 0; k < 10; ++k)
    if (k != 2) row_mass += sample.profile->entries(2, k);
  CHECK(std::abs(zu.z_term - row_mass / z) < 1e-14);
  // U = sum_k s_ik / (0 - z) - m over the minor rows
  const Complex expected = row_mass / (-z) - semicircle_m(z);
  CHECK(std::abs(zu.u_term - expected) < 1e-14);
}

TEST_CASE("iterated family-A downdates reproduce the minor resolvent") {
  const MatrixSample sample = band_sample(24, 6, 13);
  const Complex z(0.5, 0.2);
  const ResolventTable full(sample, z, {});
  const std::vector<int> minor_set = {3, 10, 17};
  const ResolventTable direct(sample, z, minor_set);

  // peel off the minor indices one at a time on the full-size table
  ComplexMatrix current = full.dense();
  std::vector<bool> removed(24, false);
  for (int t : minor_set) {
    const Complex pivot = current(t, t);
    const Eigen::VectorXcd col = current.col(t);
    const Eigen::RowVectorXcd row = current.row(t);
    current.noalias() -= (col / pivot) * row;
    removed[t] = true;
  }
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      if (!removed[i] && !removed[j])
        CHECK(std::abs(current(i, j) - direct.g(i, j)) <= 1e-8);
}

TEST_CASE("minor deviations track the full-resolvent deviation bound") {
  // Lambda^{(T)} <= Lambda + 10 Lambda^2 / min |G_kk| when Lambda < 0.1
  BandProfileSpec spec;
  spec.side = 256;
  spec.band_width = 64;
  const VarianceMatrix s = build_variance_profile(spec);
  const MatrixSample sample =
      sample_matrix(s, SymmetryClass::ComplexHermitian, EntryDistribution::Gaussian, 17);
  const Complex z(0.2, 2.0);
  const ResolventTable full(sample, z, {});
  const double lambda = full.lambda();
  REQUIRE(lambda < 0.1);
  double min_diag = 1e9;
  for (int k = 0; k < 256; ++k)
    min_diag = std::min(min_diag, std::abs(full.g(k, k)));
  const ResolventTable minor(sample, z, {5, 77, 130, 201});
  CHECK(minor.lambda() <= lambda + 10.0 * lambda * lambda / min_diag);
}
