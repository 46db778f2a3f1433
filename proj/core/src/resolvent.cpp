#include "fluctavg/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fluctavg {

bool SpectralPoint::in_domain(double m_scale) const {
  const double lo = std::pow(m_scale, -1.0 + gamma);
  return energy() >= -10.0 && energy() <= 10.0 && eta() >= lo && eta() <= 10.0;
}

Complex semicircle_m(Complex z) {
  if (z.imag() <= 0.0)
    throw std::invalid_argument("semicircle_m requires Im z > 0");
  const Complex root = std::sqrt(z * z - 4.0);
  const Complex m1 = (-z + root) / 2.0;
  const Complex m2 = (-z - root) / 2.0;
  return m1.imag() > 0.0 ? m1 : m2;
}

ResolventTable::ResolventTable(const MatrixSample& sample, Complex z,
                               std::vector<int> minor_set)
    : z_(z), m_(semicircle_m(z)), minor_set_(std::move(minor_set)) {
  const int n = sample.dim();
  std::sort(minor_set_.begin(), minor_set_.end());
  minor_set_.erase(std::unique(minor_set_.begin(), minor_set_.end()),
                   minor_set_.end());
  for (int t : minor_set_)
    if (t < 0 || t >= n) throw std::out_of_range("minor index out of range");

  position_.assign(n, -1);
  retained_.reserve(n - minor_set_.size());
  {
    std::size_t cursor = 0;
    for (int i = 0; i < n; ++i) {
      if (cursor < minor_set_.size() && minor_set_[cursor] == i) {
        ++cursor;
        continue;
      }
      position_[i] = static_cast<int>(retained_.size());
      retained_.push_back(i);
    }
  }

  const int r = static_cast<int>(retained_.size());
  ComplexMatrix shifted(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      shifted(a, b) = sample.matrix(retained_[a], retained_[b]) -
                      (a == b ? z : Complex(0, 0));
  Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
  inverse_ = lu.inverse();
  if (!inverse_.allFinite())
    throw std::runtime_error("resolvent solve produced non-finite entries");
}

Complex ResolventTable::g(int i, int j) const {
  const int a = position_[i];
  const int b = position_[j];
  if (a < 0 || b < 0)
    throw std::out_of_range("resolvent entry requested inside the minor set");
  return inverse_(a, b);
}

Complex ResolventTable::centered(int i, int j) const {
  return g(i, j) - (i == j ? m_ : Complex(0, 0));
}

double ResolventTable::lambda() const {
  double worst = 0.0;
  const int r = static_cast<int>(retained_.size());
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      worst = std::max(worst,
                       std::abs(inverse_(a, b) - (a == b ? m_ : Complex(0, 0))));
  return worst;
}

double ResolventTable::max_abs_entry() const {
  return inverse_.cwiseAbs().maxCoeff();
}

double ResolventTable::solve_residual(const MatrixSample& sample) const {
  const int r = static_cast<int>(retained_.size());
  ComplexMatrix shifted(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      shifted(a, b) = sample.matrix(retained_[a], retained_[b]) -
                      (a == b ? z_ : Complex(0, 0));
  const ComplexMatrix residual =
      shifted * inverse_ - ComplexMatrix::Identity(r, r);
  return residual.cwiseAbs().maxCoeff();
}

ResolventTable resolvent(const MatrixSample& sample, Complex z,
                         const std::vector<int>& minor_set) {
  return ResolventTable(sample, z, minor_set);
}

double relative_residual(Complex lhs, Complex rhs, double scale) {
  return std::abs(lhs - rhs) / std::max(1.0, scale);
}

namespace {

std::vector<int> with(const std::vector<int>& set, int extra) {
  std::vector<int> out = set;
  out.push_back(extra);
  return out;
}

void check_not_in(const std::vector<int>& minor_set, std::initializer_list<int> idx) {
  for (int i : idx)
    if (std::find(minor_set.begin(), minor_set.end(), i) != minor_set.end())
      throw std::invalid_argument("index clashes with the minor set");
}

}  // namespace

FamilyAResidual verify_family_A(const MatrixSample& sample, Complex z, int i,
                                int j, int k, const std::vector<int>& minor_set) {
  if (k == i || k == j) throw std::invalid_argument("k must differ from i and j");
  check_not_in(minor_set, {i, j, k});
  const ResolventTable base(sample, z, minor_set);
  const ResolventTable dropped(sample, z, with(minor_set, k));

  FamilyAResidual out;
  {
    const Complex lhs = base.g(i, j);
    const Complex rhs = dropped.g(i, j) + base.g(i, k) * base.g(k, j) / base.g(k, k);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    out.off_diagonal = relative_residual(lhs, rhs, scale);
  }
  {
    const Complex lhs = 1.0 / base.g(i, i);
    const Complex rhs = 1.0 / dropped.g(i, i) -
                        base.g(i, k) * base.g(k, i) /
                            (base.g(i, i) * dropped.g(i, i) * base.g(k, k));
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    out.diagonal = relative_residual(lhs, rhs, scale);
  }
  return out;
}

FamilyBResidual verify_family_B(const MatrixSample& sample, Complex z, int i,
                                int j, const std::vector<int>& minor_set) {
  if (i == j) throw std::invalid_argument("family B requires i != j");
  check_not_in(minor_set, {i, j});
  const ResolventTable base(sample, z, minor_set);
  const ResolventTable minor_i(sample, z, with(minor_set, i));
  const ResolventTable minor_j(sample, z, with(minor_set, j));
  const ResolventTable minor_ij(sample, z, with(with(minor_set, i), j));

  FamilyBResidual out;
  const Complex lhs = base.g(i, j);

  {
    Complex row_i(0, 0);
    for (int k : minor_i.retained()) row_i += sample.matrix(i, k) * minor_i.g(k, j);
    row_i *= -base.g(i, i);
    Complex row_j(0, 0);
    for (int k : minor_j.retained()) row_j += minor_j.g(i, k) * sample.matrix(k, j);
    row_j *= -base.g(j, j);
    const double scale_i = std::max(std::abs(lhs), std::abs(row_i));
    const double scale_j = std::max(std::abs(lhs), std::abs(row_j));
    out.single_row = std::max(relative_residual(lhs, row_i, scale_i),
                              relative_residual(lhs, row_j, scale_j));
  }
  {
    Complex quad(0, 0);
    for (int k : minor_ij.retained())
      for (int l : minor_ij.retained())
        quad += sample.matrix(i, k) * minor_ij.g(k, l) * sample.matrix(l, j);
    const Complex rhs =
        base.g(i, i) * minor_i.g(j, j) * (-sample.matrix(i, j) + quad);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    out.double_row = relative_residual(lhs, rhs, scale);
  }
  {
    const ZUPair zu = compute_Z_U(sample, z, i, minor_set, with(minor_set, i));
    const Complex lhs_diag = 1.0 / base.g(i, i);
    const Complex rhs_diag =
        1.0 / base.m() - (-sample.matrix(i, i) + zu.z_term + zu.u_term);
    const double scale = std::max(std::abs(lhs_diag), std::abs(rhs_diag));
    out.diagonal = relative_residual(lhs_diag, rhs_diag, scale);
  }
  return out;
}

double verify_schur(const MatrixSample& sample, Complex z, int i,
                    const std::vector<int>& minor_set) {
  check_not_in(minor_set, {i});
  const ResolventTable base(sample, z, minor_set);
  const ResolventTable minor_i(sample, z, with(minor_set, i));
  Complex quad(0, 0);
  for (int k : minor_i.retained())
    for (int l : minor_i.retained())
      quad += sample.matrix(i, k) * minor_i.g(k, l) * sample.matrix(l, i);
  const Complex lhs = 1.0 / base.g(i, i);
  const Complex rhs = sample.matrix(i, i) - z - quad;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return relative_residual(lhs, rhs, scale);
}

ZUPair compute_Z_U(const MatrixSample& sample, Complex z, int i,
                   const std::vector<int>& minor_T,
                   const std::vector<int>& minor_S) {
  check_not_in(minor_T, {i});
  const ResolventTable minor_ti(sample, z, with(minor_T, i));
  ZUPair out;
  Complex quad(0, 0);
  Complex trace(0, 0);
  for (int k : minor_ti.retained()) {
    for (int l : minor_ti.retained())
      quad += sample.matrix(i, k) * minor_ti.g(k, l) * sample.matrix(l, i);
    trace += sample.profile->entries(i, k) * minor_ti.g(k, k);
  }
  out.z_term = quad - trace;

  const ResolventTable minor_s(sample, z, minor_S);
  Complex weighted(0, 0);
  for (int k : minor_s.retained())
    weighted += sample.profile->entries(i, k) * minor_s.g(k, k);
  out.u_term = weighted - minor_s.m();
  return out;
}

}  // namespace fluctavg
