#include "fluctavg/sampler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fluctavg/rng.hpp"

namespace fluctavg {

SymmetryClass symmetry_from_string(const std::string& name) {
  if (name == "real-symmetric") return SymmetryClass::RealSymmetric;
  if (name == "complex-hermitian") return SymmetryClass::ComplexHermitian;
  throw std::invalid_argument("unknown symmetry class '" + name +
                              "' (expected real-symmetric|complex-hermitian)");
}

EntryDistribution distribution_from_string(const std::string& name) {
  if (name == "gaussian") return EntryDistribution::Gaussian;
  if (name == "rademacher") return EntryDistribution::Rademacher;
  throw std::invalid_argument("unknown distribution '" + name +
                              "' (expected gaussian|rademacher)");
}

std::string to_string(SymmetryClass c) {
  return c == SymmetryClass::RealSymmetric ? "real-symmetric"
                                           : "complex-hermitian";
}

std::string to_string(EntryDistribution d) {
  return d == EntryDistribution::Gaussian ? "gaussian" : "rademacher";
}

Complex draw_zeta(SymmetryClass symmetry, EntryDistribution dist,
                  std::uint64_t seed, std::uint64_t round, int i, int j) {
  SplitMix64 rng(entry_stream(seed, round, 0,
                              static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(j)));
  switch (dist) {
    case EntryDistribution::Gaussian: {
      std::normal_distribution<double> normal;
      if (symmetry == SymmetryClass::ComplexHermitian && i != j) {
        // Independent real and imaginary parts of equal variance, so the
        // second moment E zeta^2 vanishes.
        const double re = normal(rng);
        const double im = normal(rng);
        return Complex(re, im) / std::sqrt(2.0);
      }
      return Complex(normal(rng), 0.0);
    }
    case EntryDistribution::Rademacher: {
      if (symmetry != SymmetryClass::RealSymmetric)
        throw std::invalid_argument(
            "rademacher entries are only supported in the real-symmetric class");
      return Complex((rng() & 1ULL) ? 1.0 : -1.0, 0.0);
    }
  }
  throw std::invalid_argument("unsupported distribution tag");
}

MatrixSample sample_matrix(const VarianceMatrix& profile, SymmetryClass symmetry,
                           EntryDistribution dist, std::uint64_t seed) {
  const int n = profile.dim();
  MatrixSample out;
  out.symmetry = symmetry;
  out.distribution = dist;
  out.seed = seed;
  out.profile = &profile;
  out.matrix.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double s = profile.entries(i, j);
      const Complex h =
          s > 0.0 ? std::sqrt(s) * draw_zeta(symmetry, dist, seed, 0, i, j)
                  : Complex(0.0, 0.0);
      out.matrix(i, j) = h;
      out.matrix(j, i) = std::conj(h);
    }
  }
  return out;
}

Complex resampled_entry(const MatrixSample& sample, std::uint64_t round, int i,
                        int j) {
  if (i > j) return std::conj(resampled_entry(sample, round, j, i));
  const double s = sample.profile->entries(i, j);
  if (s <= 0.0) return Complex(0.0, 0.0);
  return std::sqrt(s) *
         draw_zeta(sample.symmetry, sample.distribution, sample.seed, round, i, j);
}

MatrixSample resample_rows(const MatrixSample& sample,
                           const std::vector<int>& indices, std::uint64_t round) {
  const int n = sample.dim();
  for (int a : indices)
    if (a < 0 || a >= n) throw std::out_of_range("resample index out of range");
  MatrixSample out = sample;
  for (int a : indices) {
    for (int j = 0; j < n; ++j) {
      const Complex h = resampled_entry(sample, round, a, j);
      out.matrix(a, j) = h;
      out.matrix(j, a) = std::conj(h);
    }
  }
  return out;
}

}  // namespace fluctavg
