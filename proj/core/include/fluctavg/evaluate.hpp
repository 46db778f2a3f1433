#pragma once

#include <cstdint>
#include <vector>

#include "fluctavg/classify.hpp"
#include "fluctavg/monomial.hpp"
#include "fluctavg/resolvent.hpp"

namespace fluctavg {

// Value of the encoded monomial at a full vertex assignment: product over
// edges of G_xy - delta_xy m (solid), its conjugate transpose (dashed), or
// 1/G_aa - 1/m (ginv). Requires distinct summation values avoiding the
// external values.
Complex evaluate_monomial(const ResolventTable& table, const AveragingSpec& spec,
                          const std::vector<int>& vertex_values);

// Resolvent entries of a copy of `sample` whose rows `rows` were redrawn,
// evaluated on a small index set without re-solving the full system. The
// minor resolvent with `rows` removed is unchanged by the redraw, so the
// resampled entries follow from a block inversion through that minor; the
// quadratic forms run over the variance-profile support of the redrawn rows.
class ResampledResolvent {
 public:
  ResampledResolvent(const MatrixSample& sample, const ResolventTable& full,
                     std::vector<int> rows, std::vector<int> needed);

  // Draws the redrawn rows for all rounds at once; the dominant quadratic
  // forms against the fixed minor block then run as one matrix product.
  void prepare_rounds(const std::vector<std::uint64_t>& rounds);
  void select_round(std::size_t index);
  void set_round(std::uint64_t round);

  // Valid for i, j in needed ∪ rows after a round is selected.
  Complex g(int i, int j) const;
  Complex centered(int i, int j) const;
  Complex m() const { return m_; }

 private:
  int local(int full_index) const;

  const MatrixSample* sample_;
  Complex z_;
  Complex m_;
  std::vector<int> rows_;     // S, sorted
  std::vector<int> indices_;  // P = (supports ∪ needed) \ S, sorted
  std::vector<std::vector<int>> row_support_;  // per row: support slots in P
  std::vector<int> needed_local_;              // slots of needed \ S in P
  ComplexMatrix minor_block_;                  // G^{(S)} on P x P
  std::vector<int> position_;                  // full index -> P slot or -1
  std::vector<int> row_position_;              // full index -> S slot or -1

  // Batched per-round state: for each row s, the redrawn entries over its
  // support (B_s, |supp_s| x R) and V_s = G^{(S)} conj(B_s) (|P| x R).
  std::vector<ComplexMatrix> redrawn_rows_;
  std::vector<ComplexMatrix> minor_image_;
  std::vector<ComplexMatrix> diag_entries_;  // h'(s, t) per round, |S|^2 x R
  // Selected-round views
  ComplexMatrix schur_inv_;      // |S| x |S|
  ComplexMatrix row_transfer_;   // T_{s, y} at needed slots, |S| x |P|-sparse
  ComplexMatrix col_transfer_;   // V_s at all P slots for the selected round
};

struct StarSumConfig {
  int exact_limit = 3;            // exact star enumeration for |V_s| <= limit
  long subsample_tuples = 20000;  // tuples drawn past the exact limit
  int resample_count = 64;        // K, redraws per partial-expectation estimate
  std::uint64_t subsample_seed = 1;
};

struct EvaluationResult {
  Complex value{0, 0};
  double std_error = 0;  // Monte Carlo error of the Q estimators
  bool exact_sum = true;
  long tuples = 0;
};

// X = sum*_a w(a) [prod_{i in F} Q_{a_i}] Z_a. The star sum is exact up to
// config.exact_limit summation vertices; Q factors are expanded into signed
// partial expectations, each estimated by averaging over K joint redraws of
// the affected rows.
EvaluationResult evaluate_X(const MatrixSample& sample,
                            const ResolventTable& table,
                            const AveragingSpec& spec,
                            const std::vector<int>& external_values,
                            const std::vector<int>& fixed_values,
                            const StarSumConfig& config);

struct PProductResult {
  Complex value{0, 0};
  double std_error = 0;
};

// prod_a P_a Z_a at a fixed assignment: average of Z over K joint redraws of
// all summation rows (rounds round_base+1 .. round_base+K).
PProductResult evaluate_P_product(const MatrixSample& sample,
                                  const ResolventTable& table,
                                  const AveragingSpec& spec,
                                  const std::vector<int>& vertex_values,
                                  const std::vector<int>& fixed_values, int K,
                                  int round_base = 0);

}  // namespace fluctavg
