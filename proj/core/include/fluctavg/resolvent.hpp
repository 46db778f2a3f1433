#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "fluctavg/sampler.hpp"

namespace fluctavg {

// Spectral parameter z = E + i eta with the domain bounds it must satisfy.
struct SpectralPoint {
  Complex z;
  double gamma = 0.1;  // eta >= M^{-1+gamma}
  double kappa = 0.1;  // bulk cutoff |E| <= 2 - kappa

  double energy() const { return z.real(); }
  double eta() const { return z.imag(); }
  bool in_domain(double m_scale) const;  // m_scale = M of the ensemble
  bool in_bulk() const { return std::abs(energy()) <= 2.0 - kappa; }
};

// Stieltjes transform of the semicircle law: the root of m^2 + z m + 1 = 0
// with Im m > 0. Rejects Im z <= 0.
Complex semicircle_m(Complex z);

// Dense resolvent of the minor H^{(T)}: rows/columns in T removed. Entries are
// addressed by original indices; accessing a removed index is an error.
class ResolventTable {
 public:
  ResolventTable(const MatrixSample& sample, Complex z, std::vector<int> minor_set);

  Complex g(int i, int j) const;
  // Entry of the centered resolvent: G_ij - delta_ij m.
  Complex centered(int i, int j) const;
  bool contains(int i) const { return position_[i] >= 0; }

  Complex z() const { return z_; }
  Complex m() const { return m_; }
  const std::vector<int>& minor_set() const { return minor_set_; }
  const std::vector<int>& retained() const { return retained_; }
  int full_dim() const { return static_cast<int>(position_.size()); }

  // max_{i,j not in T} |G_ij - delta_ij m|
  double lambda() const;
  double max_abs_entry() const;
  // max-norm residual of (H^{(T)} - z) G - I over the retained block.
  double solve_residual(const MatrixSample& sample) const;

  const ComplexMatrix& dense() const { return inverse_; }
  int position(int i) const { return position_[i]; }

 private:
  Complex z_;
  Complex m_;
  std::vector<int> minor_set_;
  std::vector<int> retained_;
  std::vector<int> position_;  // original index -> row of inverse_, -1 if removed
  ComplexMatrix inverse_;
};

ResolventTable resolvent(const MatrixSample& sample, Complex z,
                         const std::vector<int>& minor_set = {});

// Relative residual helper: |lhs - rhs| / max(1, scale).
double relative_residual(Complex lhs, Complex rhs, double scale);

struct FamilyAResidual {
  double off_diagonal;  // G_ij = G^{(Tk)}_ij + G_ik G_kj / G_kk
  double diagonal;      // 1/G_ii = 1/G^{(Tk)}_ii - G_ik G_ki/(G_ii G^{(Tk)}_ii G_kk)
};

struct FamilyBResidual {
  double single_row;  // both one-sided expansions of G_ij, worse of the two
  double double_row;  // the doubly expanded identity for G_ij
  double diagonal;    // 1/G_ii = 1/m - (-h_ii + Z_i + U_i)
};

FamilyAResidual verify_family_A(const MatrixSample& sample, Complex z, int i,
                                int j, int k, const std::vector<int>& minor_set);

FamilyBResidual verify_family_B(const MatrixSample& sample, Complex z, int i,
                                int j, const std::vector<int>& minor_set);

double verify_schur(const MatrixSample& sample, Complex z, int i,
                    const std::vector<int>& minor_set);

struct ZUPair {
  Complex z_term;  // Z_i^{(T)}: fluctuating part of the Schur quadratic form
  Complex u_term;  // U_i^{(S)} = sum_k s_ik G^{(S)}_kk - m
};

// Z uses the minor set T (plus i), U the minor set S. The conditional
// expectation of the quadratic form is the s-weighted diagonal trace, so Z is
// computed exactly.
ZUPair compute_Z_U(const MatrixSample& sample, Complex z, int i,
                   const std::vector<int>& minor_T, const std::vector<int>& minor_S);

}  // namespace fluctavg
