#pragma once

#include "fluctavg/monomial.hpp"

namespace fluctavg {

struct VertexInfo {
  int solid_legs = 0;   // nu_i: legs of colour 1, a loop counts twice
  int dashed_legs = 0;  // nu_i^*
  bool charged = false;
  bool chain_vertex = false;
};

struct VertexClassification {
  std::vector<VertexInfo> summation;  // one per summation vertex
  std::vector<int> charged_set;
  int chain_count = 0;  // c(Delta)

  int num_charged() const { return static_cast<int>(charged_set.size()); }
};

VertexClassification classify(const AveragingSpec& spec);

// Chain shape tests: every summation vertex is a chain vertex and the
// external vertices have the right degrees (open: two externals of degree
// one; closed: at most one external of degree two).
bool is_chain_graph(const AdmissibleGraph& graph);
// Chain weight: product of s(b_i, a_i) with each summation index appearing in
// exactly one factor, partnered by a non-summation index; no dummies, no 1/N.
bool is_chain_weight(const AveragingSpec& spec);

struct ExponentPrediction {
  int psi_exp = 0;
  int phi_exp = 0;
  int simple_exp = 0;  // power of (Psi + M^{-1/4})
};

// Exponents of the predicted stochastic bound Psi^psi Phi^phi per mode:
//   Q-average: (deg + |F|, |V_c|)
//   chain:     (deg + |F|, c - |F|), requires a chain graph and chain weight
//   P-product: (deg, |V_c|), requires F = {} and is evaluated at fixed indices
ExponentPrediction predicted_exponents(const AveragingSpec& spec);
ExponentPrediction predicted_exponents(const AveragingSpec& spec,
                                       AveragingMode mode);

}  // namespace fluctavg
