#include "fluctavg/band_profile.hpp"

#include <cmath>

namespace fluctavg {

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "step") return ProfileKind::Step;
  if (name == "triangular") return ProfileKind::Triangular;
  throw std::invalid_argument("unknown profile '" + name +
                              "' (expected step|triangular)");
}

std::string to_string(ProfileKind kind) {
  return kind == ProfileKind::Step ? "step" : "triangular";
}

int BandProfileSpec::matrix_dim() const {
  long n = 1;
  for (int k = 0; k < dimension; ++k) n *= side;
  return static_cast<int>(n);
}

double BandProfileSpec::density(const std::vector<double>& x) const {
  double v = 1.0;
  switch (profile) {
    case ProfileKind::Step:
      for (double xi : x) v *= (std::abs(xi) <= 1.0) ? 0.5 : 0.0;
      return v;
    case ProfileKind::Triangular:
      for (double xi : x) v *= std::max(1.0 - std::abs(xi), 0.0);
      return v;
  }
  return 0.0;
}

double BandProfileSpec::sup_density() const {
  switch (profile) {
    case ProfileKind::Step:
      return std::pow(0.5, dimension);
    case ProfileKind::Triangular:
      return 1.0;
  }
  return 0.0;
}

long canonical_rep(long k, long side) {
  long r = k % side;
  if (r < -side / 2) r += side;
  if (r >= side - side / 2) r -= side;
  return r;
}

namespace {

// Lattice point index <-> coordinates on the torus [0, L)^d, row-major.
std::vector<long> unflatten(long idx, int d, long side) {
  std::vector<long> coord(d);
  for (int k = d - 1; k >= 0; --k) {
    coord[k] = idx % side;
    idx /= side;
  }
  return coord;
}

}  // namespace

VarianceMatrix build_variance_profile(const BandProfileSpec& spec) {
  if (spec.dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (spec.side < 1) throw std::invalid_argument("torus side L must be >= 1");
  if (spec.band_width < 1) throw std::invalid_argument("band width W must be >= 1");
  if (spec.band_width > spec.side)
    throw std::invalid_argument("band width W exceeds torus side L");
  const double w_floor = std::pow(static_cast<double>(spec.side), spec.delta_prime);
  if (static_cast<double>(spec.band_width) < w_floor)
    throw std::invalid_argument("band width W = " + std::to_string(spec.band_width) +
                                " below L^{delta'} = " + std::to_string(w_floor));

  const int n = spec.matrix_dim();
  const long side = spec.side;
  const int d = spec.dimension;

  // Translation invariance: s_ij depends only on [i-j]_L, so one pass over
  // difference vectors fixes the whole row and Z_L makes every row sum to
  // exactly the same value.
  std::vector<double> kernel(n);
  std::vector<double> arg(d);
  double z_l = 0.0;
  for (long idx = 0; idx < n; ++idx) {
    const std::vector<long> coord = unflatten(idx, d, side);
    for (int k = 0; k < d; ++k)
      arg[k] = static_cast<double>(canonical_rep(coord[k], side)) / spec.band_width;
    kernel[idx] = spec.density(arg);
    z_l += kernel[idx];
  }
  if (z_l <= 0.0)
    throw std::invalid_argument("profile vanishes on the whole lattice");

  VarianceMatrix out;
  out.spec = spec;
  out.normalization = z_l;
  out.entries.resize(n, n);
  double max_entry = 0.0;
  for (long i = 0; i < n; ++i) {
    const std::vector<long> ci = unflatten(i, d, side);
    for (long j = 0; j < n; ++j) {
      const std::vector<long> cj = unflatten(j, d, side);
      long diff_idx = 0;
      for (int k = 0; k < d; ++k) {
        long dk = ci[k] - cj[k];
        dk %= side;
        if (dk < 0) dk += side;
        diff_idx = diff_idx * side + dk;
      }
      const double s = kernel[diff_idx] / z_l;
      out.entries(i, j) = s;
      max_entry = std::max(max_entry, s);
    }
  }
  out.inv_max_entry = 1.0 / max_entry;

  const double m = out.inv_max_entry;
  const double m_floor = std::pow(static_cast<double>(n), spec.delta);
  if (m < m_floor || m > static_cast<double>(n) + 1e-9)
    throw std::invalid_argument(
        "M = " + std::to_string(m) + " outside [N^delta, N] = [" +
        std::to_string(m_floor) + ", " + std::to_string(n) + "]");
  return out;
}

std::vector<int> VarianceMatrix::row_support(int a) const {
  std::vector<int> support;
  for (int j = 0; j < dim(); ++j)
    if (entries(a, j) > 0.0 || j == a) support.push_back(j);
  return support;
}

}  // namespace fluctavg
