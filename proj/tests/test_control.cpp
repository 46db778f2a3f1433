#include <doctest.h>

#include <cmath>

#include "fluctavg/control.hpp"

using namespace fluctavg;

namespace {

VarianceMatrix flat_profile(int n) {
  BandProfileSpec spec;
  spec.side = n;
  spec.band_width = n;
  return build_variance_profile(spec);
}

VarianceMatrix band_profile(int side, int width) {
  BandProfileSpec spec;
  spec.side = side;
  spec.band_width = width;
  return build_variance_profile(spec);
}

}  // namespace

TEST_CASE("rho of the flat profile matches the rank-one closed form") {
  // S = ones/N: (1 - m^2 S)^{-1} = I + c S with c = m^2 / (1 - m^2), so the
  // max absolute row sum is |1 + c/N| + (N-1)|c|/N.
  const int n = 24;
  const VarianceMatrix s = flat_profile(n);
  for (Complex z : {Complex(0, 2), Complex(0.5, 0.1), Complex(-1.2, 0.7)}) {
    const Complex m2 = semicircle_m(z) * semicircle_m(z);
    const Complex c = m2 / (1.0 - m2);
    const double expected =
        std::abs(1.0 + c / double(n)) + (n - 1) * std::abs(c) / n;
    CHECK(rho(s, z) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("the inverse acts as the scalar 1/(1 - m^2) on constants") {
  const VarianceMatrix s = band_profile(64, 8);
  for (Complex z : {Complex(0.5, 0.05), Complex(0, 0.1)}) {
    const Complex m2 = semicircle_m(z) * semicircle_m(z);
    ComplexMatrix a = (-m2) * s.entries;
    a.diagonal().array() += 1.0;
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(s.dim());
    const Eigen::VectorXcd image = a.partialPivLu().solve(ones);
    const Eigen::VectorXcd expected = ones / (1.0 - m2);
    CHECK((image - expected).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("exact control-parameter inequality chain") {
  const VarianceMatrix s = band_profile(64, 8);
  for (Complex z : {Complex(0.5, 0.05), Complex(-0.5, 0.1), Complex(0, 0.02)}) {
    const Complex m = semicircle_m(z);
    const double lower = 1.0 / std::abs(1.0 - m * m);
    const double r = rho(s, z);
    CHECK(0.5 <= lower + 1e-12);
    CHECK(lower <= r + 1e-12);
    for (double psi : {0.05, 0.2, 0.45}) {
      const double f = phi(psi, r, s.inv_max_entry);
      CHECK(psi <= 2.0 * f + 1e-12);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("phi clamp branches") {
  const double m_scale = 256.0;
  // psi = M^{-1/4} minimizes psi + M^{-1/2}/psi, giving 2 rho M^{-1/4}
  CHECK(phi(std::pow(m_scale, -0.25), 0.3, m_scale) ==
        doctest::Approx(0.6 * std::pow(m_scale, -0.25)));
  // at the admissibility floor psi = M^{-1/2} the second term is exactly 1
  CHECK(phi(std::pow(m_scale, -0.5), 0.3, m_scale) ==
        doctest::Approx(0.3 * (std::pow(m_scale, -0.5) + 1.0)));
  CHECK(phi(0.5, 50.0, m_scale) == 1.0);  // rho (psi + ...) >= 1 clamps
  // monotone nondecreasing in rho
  double previous = 0.0;
  for (double r = 0.1; r < 30.0; r *= 1.7) {
    const double value = phi(0.1, r, m_scale);
    CHECK(value >= previous);
    previous = value;
  }
}

TEST_CASE("psi ansatz clamps to the admissible window") {
  const double m_scale = 256.0;
  // eta = 1/M: sqrt(1/(M eta)) = 1 clamps to M^{-c}
  CHECK(psi_ansatz(m_scale, 1.0 / m_scale, 0.25) ==
        doctest::Approx(std::pow(m_scale, -0.25)));
  // eta = M^{-1/2}, c = 1/4: psi = M^{-1/4} exactly
  CHECK(psi_ansatz(m_scale, std::pow(m_scale, -0.5), 0.25) ==
        doctest::Approx(std::pow(m_scale, -0.25)));
  // large eta clamps from below at M^{-1/2}
  CHECK(psi_ansatz(m_scale, 9.0, 0.25) == doctest::Approx(std::pow(m_scale, -0.5)));
}

TEST_CASE("empirical psi is a clamped quantile") {
  std::vector<double> lambdas;
  for (int k = 0; k < 100; ++k) lambdas.push_back(0.001 * (k + 1));
  const double m_scale = 100.0;
  const double psi = psi_empirical(lambdas, 0.9, m_scale, 0.25);
  CHECK(psi == doctest::Approx(std::max(0.0901, std::pow(m_scale, -0.5))));
  CHECK_THROWS_AS(psi_empirical({0.1, 0.2}, 0.9, m_scale, 0.25),
                  std::invalid_argument);
}

TEST_CASE("spectral gap of simple profiles") {
  VarianceMatrix identity_like = flat_profile(8);
  identity_like.entries = Eigen::MatrixXd::Identity(8, 8);
  CHECK(spectral_gap(identity_like) == doctest::Approx(2.0));

  const VarianceMatrix flat = flat_profile(16);
  CHECK(spectral_gap(flat) == doctest::Approx(1.0));

  const VarianceMatrix band = band_profile(128, 8);
  CHECK(spectral_gap(band) > 0.0);
}

TEST_CASE("band rho bound formula") {
  CHECK(rho_band_bound(100, 1.0, Complex(0, 1)) ==
        doctest::Approx(std::log(100.0)));
  CHECK(rho_band_bound(50, 0.25, Complex(0, 0.1)) ==
        doctest::Approx(std::log(50.0) / 0.01));
  CHECK_THROWS_AS(rho_band_bound(10, -1.0, Complex(0, 1)), std::invalid_argument);
}

TEST_CASE("Neumann partial sums agree with the dense inverse") {
  const VarianceMatrix s = band_profile(64, 8);
  for (Complex z : {Complex(0.5, 0.1), Complex(0, 0.05)}) {
    const double exact = rho(s, z);
    const NeumannCheck check = rho_neumann(s, z, 400);
    REQUIRE(check.contraction < 1.0);
    CHECK(std::abs(exact - check.partial_norm) <= check.tail_bound + 1e-12);
  }
}

TEST_CASE("make_control wires the pieces together") {
  const VarianceMatrix s = band_profile(64, 8);
  const Complex z(0.5, 0.1);
  const ControlParams ansatz = make_control(s, z, PsiMode::Ansatz, 0.25, 0.9);
  CHECK(ansatz.psi == doctest::Approx(psi_ansatz(s.inv_max_entry, 0.1, 0.25)));
  CHECK(ansatz.phi == doctest::Approx(phi(ansatz.psi, ansatz.rho, s.inv_max_entry)));

  std::vector<double> lambdas(64, 0.3);  // inside the admissible window
  const ControlParams empirical =
      make_control(s, z, PsiMode::Empirical, 0.25, 0.9, lambdas);
  CHECK(empirical.psi == doctest::Approx(0.3));
  CHECK(empirical.psi_source == PsiMode::Empirical);
}
