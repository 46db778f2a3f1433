#pragma once

#include <string>
#include <vector>

#include "fluctavg/band_profile.hpp"
#include "fluctavg/resolvent.hpp"

namespace fluctavg {

enum class PsiMode { Ansatz, Empirical, User };

PsiMode psi_mode_from_string(const std::string& name);
std::string to_string(PsiMode mode);

struct ControlParams {
  double m_scale = 0;  // M of the ensemble
  Complex z;
  Complex m;
  double rho = 0;
  double psi = 0;
  double phi = 0;
  PsiMode psi_source = PsiMode::Ansatz;
};

// ||(1 - m^2 S)^{-1}||_{inf -> inf}, computed from the dense inverse. Throws
// std::domain_error carrying the smallest singular value when 1 - m^2 S is
// numerically singular.
double rho(const VarianceMatrix& s, Complex z);

// phi = min{rho (psi + M^{-1/2} / psi), 1}
double phi(double psi, double rho_value, double m_scale);

// delta_- = 1 + lambda_min(S); throws std::domain_error when <= 0.
double spectral_gap(const VarianceMatrix& s);

// log N / min{delta_-, (Im m)^2}; the verifier fits the constant in front.
double rho_band_bound(int n, double delta_minus, Complex m);

// Admissibility clamp [M^{-1/2}, M^{-c}].
double clamp_admissible(double psi, double m_scale, double c);

double psi_ansatz(double m_scale, double eta, double c);
// q-quantile of sampled Lambda values, clamped to the admissible window.
double psi_empirical(const std::vector<double>& lambda_samples, double quantile,
                     double m_scale, double c);

ControlParams make_control(const VarianceMatrix& s, Complex z, PsiMode mode,
                           double c, double quantile,
                           const std::vector<double>& lambda_samples = {},
                           double user_psi = 0.0);

// Partial sums of the Neumann series (1/2) sum_n ((1 + m^2 S)/2)^n together
// with the l2-contraction tail bound; used as a property check against the
// dense-inverse rho.
struct NeumannCheck {
  double partial_norm;  // ||partial sum||_{inf -> inf}
  double tail_bound;    // sqrt(N) q^{n0} / (1 - q), q from the l2 bound
  double contraction;   // q = max_i |1 + m^2 lambda_i| / 2
};
NeumannCheck rho_neumann(const VarianceMatrix& s, Complex z, int terms);

}  // namespace fluctavg
