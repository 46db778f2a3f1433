#include "fluctavg/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fluctavg {

PsiMode psi_mode_from_string(const std::string& name) {
  if (name == "ansatz") return PsiMode::Ansatz;
  if (name == "empirical") return PsiMode::Empirical;
  if (name == "user") return PsiMode::User;
  throw std::invalid_argument("unknown psi mode '" + name +
                              "' (expected ansatz|empirical|user)");
}

std::string to_string(PsiMode mode) {
  switch (mode) {
    case PsiMode::Ansatz: return "ansatz";
    case PsiMode::Empirical: return "empirical";
    case PsiMode::User: return "user";
  }
  return "?";
}

namespace {

Eigen::VectorXd profile_eigenvalues(const VarianceMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.entries,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolve of the variance profile failed");
  return solver.eigenvalues();
}

}  // namespace

double rho(const VarianceMatrix& s, Complex z) {
  const Complex m = semicircle_m(z);
  const Complex m2 = m * m;
  const int n = s.dim();

  // S is real symmetric, so the singular values of 1 - m^2 S are
  // |1 - m^2 lambda_i| over the spectrum of S.
  const Eigen::VectorXd eigs = profile_eigenvalues(s);
  double sigma_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    sigma_min = std::min(sigma_min, std::abs(1.0 - m2 * eigs[i]));
  if (sigma_min < 1e-12)
    throw std::domain_error("1 - m^2 S is numerically singular (sigma_min = " +
                            std::to_string(sigma_min) + ")");

  ComplexMatrix a = (-m2) * s.entries;
  a.diagonal().array() += 1.0;
  const ComplexMatrix inv = Eigen::PartialPivLU<ComplexMatrix>(a).inverse();
  return inv.cwiseAbs().rowwise().sum().maxCoeff();
}

double phi(double psi, double rho_value, double m_scale) {
  if (psi <= 0.0) throw std::invalid_argument("psi must be positive");
  return std::min(rho_value * (psi + 1.0 / (std::sqrt(m_scale) * psi)), 1.0);
}

double spectral_gap(const VarianceMatrix& s) {
  const Eigen::VectorXd eigs = profile_eigenvalues(s);
  const double delta_minus = 1.0 + eigs.minCoeff();
  if (delta_minus <= 0.0)
    throw std::domain_error("variance profile has no lower spectral gap");
  return delta_minus;
}

double rho_band_bound(int n, double delta_minus, Complex m) {
  if (delta_minus <= 0.0 || m.imag() <= 0.0)
    throw std::invalid_argument("rho_band_bound needs delta_- > 0 and Im m > 0");
  return std::log(static_cast<double>(n)) /
         std::min(delta_minus, m.imag() * m.imag());
}

double clamp_admissible(double psi, double m_scale, double c) {
  const double lo = std::pow(m_scale, -0.5);
  const double hi = std::pow(m_scale, -c);
  return std::clamp(psi, lo, hi);
}

double psi_ansatz(double m_scale, double eta, double c) {
  return clamp_admissible(std::sqrt(1.0 / (m_scale * eta)), m_scale, c);
}

double psi_empirical(const std::vector<double>& lambda_samples, double quantile,
                     double m_scale, double c) {
  if (lambda_samples.size() < 32)
    throw std::invalid_argument("empirical psi needs at least 32 samples");
  std::vector<double> sorted = lambda_samples;
  std::sort(sorted.begin(), sorted.end());
  const double pos = quantile * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  const double q = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  return clamp_admissible(q, m_scale, c);
}

ControlParams make_control(const VarianceMatrix& s, Complex z, PsiMode mode,
                           double c, double quantile,
                           const std::vector<double>& lambda_samples,
                           double user_psi) {
  ControlParams out;
  out.m_scale = s.inv_max_entry;
  out.z = z;
  out.m = semicircle_m(z);
  out.rho = rho(s, z);
  out.psi_source = mode;
  switch (mode) {
    case PsiMode::Ansatz:
      out.psi = psi_ansatz(out.m_scale, z.imag(), c);
      break;
    case PsiMode::Empirical:
      out.psi = psi_empirical(lambda_samples, quantile, out.m_scale, c);
      break;
    case PsiMode::User:
      out.psi = clamp_admissible(user_psi, out.m_scale, c);
      break;
  }
  out.phi = phi(out.psi, out.rho, out.m_scale);
  return out;
}

NeumannCheck rho_neumann(const VarianceMatrix& s, Complex z, int terms) {
  const Complex m = semicircle_m(z);
  const Complex m2 = m * m;
  const int n = s.dim();

  // (1 - m^2 S)^{-1} = (1/2) sum_n ((1 + m^2 S)/2)^n; the iterate contracts
  // in l2 with rate max_i |1 + m^2 lambda_i| / 2.
  const Eigen::VectorXd eigs = profile_eigenvalues(s);
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    q = std::max(q, 0.5 * std::abs(1.0 + m2 * eigs[i]));

  ComplexMatrix half = 0.5 * m2 * s.entries;
  half.diagonal().array() += 0.5;
  ComplexMatrix power = ComplexMatrix::Identity(n, n);
  ComplexMatrix partial = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < terms; ++k) {
    partial += power;
    power = power * half;
  }
  partial *= 0.5;

  NeumannCheck out;
  out.partial_norm = partial.cwiseAbs().rowwise().sum().maxCoeff();
  out.contraction = q;
  out.tail_bound = q < 1.0
                       ? 0.5 * std::sqrt(static_cast<double>(n)) *
                             std::pow(q, terms) / (1.0 - q)
                       : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace fluctavg
