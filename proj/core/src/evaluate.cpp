#include "fluctavg/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

#include "fluctavg/rng.hpp"

namespace fluctavg {

namespace {

void check_star_constraint(const AveragingSpec& spec,
                           const std::vector<int>& values) {
  const AdmissibleGraph& g = spec.graph;
  for (int v = 0; v < g.num_summation; ++v) {
    for (int u = v + 1; u < g.num_summation; ++u)
      if (values[v] == values[u])
        throw std::invalid_argument("summation values must be distinct");
    for (int e = g.num_summation; e < g.num_vertices(); ++e)
      if (values[v] == values[e])
        throw std::invalid_argument(
            "summation values must avoid external values");
  }
}

template <typename Table>
Complex monomial_value(const Table& table, const AveragingSpec& spec,
                       const std::vector<int>& values) {
  Complex prod(1.0, 0.0);
  for (const MonomialEdge& e : spec.graph.edges) {
    const int x = values[e.source];
    const int y = values[e.target];
    if (e.inverse_diagonal) {
      prod *= 1.0 / table.g(x, x) - 1.0 / table.m();
    } else if (e.colour == EdgeColour::Solid) {
      prod *= table.centered(x, y);
    } else {
      // (G^*)_xy - delta m^* = conj(G_yx - delta m)
      prod *= std::conj(table.centered(y, x));
    }
  }
  return prod;
}

}  // namespace

Complex evaluate_monomial(const ResolventTable& table, const AveragingSpec& spec,
                          const std::vector<int>& vertex_values) {
  if (static_cast<int>(vertex_values.size()) != spec.graph.num_vertices())
    throw std::invalid_argument("assignment size mismatch");
  check_star_constraint(spec, vertex_values);
  return monomial_value(table, spec, vertex_values);
}

ResampledResolvent::ResampledResolvent(const MatrixSample& sample,
                                       const ResolventTable& full,
                                       std::vector<int> rows,
                                       std::vector<int> needed)
    : sample_(&sample), z_(full.z()), m_(full.m()) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  rows_ = rows;
  if (rows_.empty()) throw std::invalid_argument("no rows to resample");

  const int n = sample.dim();
  row_position_.assign(n, -1);
  for (std::size_t s = 0; s < rows_.size(); ++s) row_position_[rows_[s]] = (int)s;

  std::set<int> index_set(needed.begin(), needed.end());
  for (int s : rows_)
    for (int k : sample.profile->row_support(s)) index_set.insert(k);
  for (int s : rows_) index_set.erase(s);
  indices_.assign(index_set.begin(), index_set.end());

  position_.assign(n, -1);
  for (std::size_t p = 0; p < indices_.size(); ++p) position_[indices_[p]] = (int)p;

  needed_local_.clear();
  for (int k : needed)
    if (position_[k] >= 0) needed_local_.push_back(position_[k]);
  std::sort(needed_local_.begin(), needed_local_.end());
  needed_local_.erase(std::unique(needed_local_.begin(), needed_local_.end()),
                      needed_local_.end());

  row_support_.resize(rows_.size());
  for (std::size_t s = 0; s < rows_.size(); ++s)
    for (int k : sample.profile->row_support(rows_[s]))
      if (position_[k] >= 0) row_support_[s].push_back(position_[k]);

  // G^{(S)} on P x P by successive rank-one downdates of the full resolvent.
  const int np = static_cast<int>(indices_.size());
  const int ns = static_cast<int>(rows_.size());
  std::vector<int> combined = indices_;
  combined.insert(combined.end(), rows_.begin(), rows_.end());
  const int nc = np + ns;
  ComplexMatrix block(nc, nc);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) block(a, b) = full.g(combined[a], combined[b]);
  for (int s = 0; s < ns; ++s) {
    const int slot = np + s;
    const Complex pivot = block(slot, slot);
    const Eigen::VectorXcd col = block.col(slot);
    const Eigen::RowVectorXcd row = block.row(slot);
    block.noalias() -= (col / pivot) * row;
    block.row(slot).setZero();
    block.col(slot).setZero();
  }
  minor_block_ = block.topLeftCorner(np, np);
}

void ResampledResolvent::prepare_rounds(const std::vector<std::uint64_t>& rounds) {
  const int ns = static_cast<int>(rows_.size());
  const int nr = static_cast<int>(rounds.size());

  redrawn_rows_.assign(ns, {});
  minor_image_.assign(ns, {});
  diag_entries_.assign(1, ComplexMatrix(ns * ns, nr));
  for (int s = 0; s < ns; ++s) {
    const int supp = static_cast<int>(row_support_[s].size());
    redrawn_rows_[s].resize(supp, nr);
    for (int r = 0; r < nr; ++r)
      for (int k = 0; k < supp; ++k)
        redrawn_rows_[s](k, r) = resampled_entry(
            *sample_, rounds[r], rows_[s], indices_[row_support_[s][k]]);
    // V_s = G^{(S)} restricted to the support columns, times conj(B_s):
    // one product covers the Schur quadratic forms and the column transfers
    // of every round.
    ComplexMatrix gs_cols(minor_block_.rows(), supp);
    for (int k = 0; k < supp; ++k)
      gs_cols.col(k) = minor_block_.col(row_support_[s][k]);
    minor_image_[s].noalias() = gs_cols * redrawn_rows_[s].conjugate();
  }
  for (int r = 0; r < nr; ++r)
    for (int s = 0; s < ns; ++s)
      for (int t = 0; t < ns; ++t)
        diag_entries_[0](s * ns + t, r) =
            resampled_entry(*sample_, rounds[r], rows_[s], rows_[t]);
}

void ResampledResolvent::select_round(std::size_t index) {
  const int ns = static_cast<int>(rows_.size());
  const int np = static_cast<int>(indices_.size());
  const int r = static_cast<int>(index);

  col_transfer_.resize(np, ns);
  for (int s = 0; s < ns; ++s) col_transfer_.col(s) = minor_image_[s].col(r);

  // Row transfers T_{s,y} = sum_k B_s[k] G^{(S)}_{k,y} only at needed slots.
  row_transfer_.resize(ns, np);
  row_transfer_.setZero();
  for (int s = 0; s < ns; ++s) {
    const int supp = static_cast<int>(row_support_[s].size());
    for (int y : needed_local_) {
      Complex total(0, 0);
      for (int k = 0; k < supp; ++k)
        total += redrawn_rows_[s](k, r) * minor_block_(row_support_[s][k], y);
      row_transfer_(s, y) = total;
    }
  }

  ComplexMatrix schur(ns, ns);
  for (int s = 0; s < ns; ++s) {
    for (int t = 0; t < ns; ++t) {
      Complex quad(0, 0);
      const int supp = static_cast<int>(row_support_[s].size());
      for (int k = 0; k < supp; ++k)
        quad += redrawn_rows_[s](k, r) * minor_image_[t](row_support_[s][k], r);
      schur(s, t) = diag_entries_[0](s * ns + t, r) - quad -
                    (s == t ? z_ : Complex(0, 0));
    }
  }
  if (ns == 1) {
    schur_inv_.resize(1, 1);
    schur_inv_(0, 0) = 1.0 / schur(0, 0);
  } else {
    schur_inv_ = schur.inverse();
  }
}

void ResampledResolvent::set_round(std::uint64_t round) {
  prepare_rounds({round});
  select_round(0);
}

int ResampledResolvent::local(int full_index) const {
  const int p = position_[full_index];
  if (p < 0) throw std::out_of_range("index not tracked by ResampledResolvent");
  return p;
}

Complex ResampledResolvent::g(int i, int j) const {
  const int si = row_position_[i];
  const int sj = row_position_[j];
  if (si >= 0 && sj >= 0) return schur_inv_(si, sj);
  if (si >= 0) {
    const int pj = local(j);
    Complex out(0, 0);
    for (int t = 0; t < static_cast<int>(rows_.size()); ++t)
      out -= schur_inv_(si, t) * row_transfer_(t, pj);
    return out;
  }
  if (sj >= 0) {
    const int pi = local(i);
    Complex out(0, 0);
    for (int t = 0; t < static_cast<int>(rows_.size()); ++t)
      out -= col_transfer_(pi, t) * schur_inv_(t, sj);
    return out;
  }
  const int pi = local(i);
  const int pj = local(j);
  Complex out = minor_block_(pi, pj);
  for (int s = 0; s < static_cast<int>(rows_.size()); ++s)
    for (int t = 0; t < static_cast<int>(rows_.size()); ++t)
      out += col_transfer_(pi, s) * schur_inv_(s, t) * row_transfer_(t, pj);
  return out;
}

Complex ResampledResolvent::centered(int i, int j) const {
  return g(i, j) - (i == j ? m_ : Complex(0, 0));
}

namespace {

// Enumerates distinct summation assignments avoiding the external values and
// calls visit(values). Exact when the tuple space is enumerable; otherwise a
// uniform subsample with rescaling handled by the caller.
class StarSum {
 public:
  StarSum(const AveragingSpec& spec, int n,
          const std::vector<int>& external_values)
      : spec_(spec), n_(n) {
    values_.resize(spec.graph.num_vertices());
    for (int v = spec.graph.num_summation; v < spec.graph.num_vertices(); ++v)
      values_[v] = external_values[v - spec.graph.num_summation];
    forbidden_.assign(n, false);
    for (int v : external_values) forbidden_[v] = true;
  }

  long tuple_count() const {
    long distinct_ext = 0;
    for (int v = 0; v < n_; ++v)
      if (forbidden_[v]) ++distinct_ext;
    long count = 1;
    long pool = n_ - distinct_ext;
    for (int v = 0; v < spec_.graph.num_summation; ++v) count *= pool--;
    return count;
  }

  void enumerate(const std::function<void(const std::vector<int>&)>& visit) {
    recurse(0, visit);
  }

  void sample(long draws, std::uint64_t seed,
              const std::function<void(const std::vector<int>&)>& visit) {
    SplitMix64 rng(seed);
    const int ns = spec_.graph.num_summation;
    for (long d = 0; d < draws; ++d) {
      for (int v = 0; v < ns; ++v) {
        while (true) {
          const int candidate = static_cast<int>(rng() % n_);
          if (forbidden_[candidate]) continue;
          bool clash = false;
          for (int u = 0; u < v; ++u)
            if (values_[u] == candidate) clash = true;
          if (clash) continue;
          values_[v] = candidate;
          break;
        }
      }
      visit(values_);
    }
  }

 private:
  void recurse(int v, const std::function<void(const std::vector<int>&)>& visit) {
    if (v == spec_.graph.num_summation) {
      visit(values_);
      return;
    }
    for (int candidate = 0; candidate < n_; ++candidate) {
      if (forbidden_[candidate]) continue;
      bool clash = false;
      for (int u = 0; u < v; ++u)
        if (values_[u] == candidate) clash = true;
      if (clash) continue;
      values_[v] = candidate;
      recurse(v + 1, visit);
    }
  }

  const AveragingSpec& spec_;
  int n_;
  std::vector<int> values_;
  std::vector<bool> forbidden_;
};

}  // namespace

EvaluationResult evaluate_X(const MatrixSample& sample,
                            const ResolventTable& table,
                            const AveragingSpec& spec,
                            const std::vector<int>& external_values,
                            const std::vector<int>& fixed_values,
                            const StarSumConfig& config) {
  if (static_cast<int>(external_values.size()) != spec.graph.num_external())
    throw std::invalid_argument("external assignment size mismatch");
  if (!spec.q_set.empty() && config.resample_count < 2)
    throw std::invalid_argument("Q estimation needs at least 2 redraws");

  const int n = sample.dim();
  WeightEvaluator weight(spec.weight, spec.graph, *sample.profile);
  StarSum star(spec, n, external_values);

  const int nf = static_cast<int>(spec.q_set.size());
  const int k_rounds = config.resample_count;

  EvaluationResult out;
  double variance = 0.0;

  const auto visit = [&](const std::vector<int>& values) {
    ++out.tuples;
    const double w = weight.value(values, fixed_values);
    if (w == 0.0) return;

    // prod_{i in F} (1 - P_i) expanded over subsets of F; the empty subset is
    // the plain monomial, every other subset a joint-redraw average. Redraw
    // rounds are shared across subsets, so the signed per-round combination
    // gives an honest variance estimate.
    const Complex plain = monomial_value(table, spec, values);
    if (nf == 0) {
      out.value += w * plain;
      return;
    }

    std::vector<ResampledResolvent> estimators;
    std::vector<double> signs;
    estimators.reserve((1u << nf) - 1);
    std::vector<std::uint64_t> rounds(k_rounds);
    for (int r = 0; r < k_rounds; ++r) rounds[r] = static_cast<std::uint64_t>(r + 1);
    for (unsigned mask = 1; mask < (1u << nf); ++mask) {
      std::vector<int> rows;
      for (int b = 0; b < nf; ++b)
        if (mask & (1u << b)) rows.push_back(values[spec.q_set[b]]);
      estimators.emplace_back(sample, table, rows, values);
      estimators.back().prepare_rounds(rounds);
      signs.push_back(__builtin_popcount(mask) % 2 == 1 ? -1.0 : 1.0);
    }

    Complex mean(0, 0);
    double sq = 0.0;
    for (int r = 0; r < k_rounds; ++r) {
      Complex signed_sum(0, 0);
      for (std::size_t t = 0; t < estimators.size(); ++t) {
        estimators[t].select_round(r);
        signed_sum += signs[t] * monomial_value(estimators[t], spec, values);
      }
      mean += signed_sum;
      sq += std::norm(signed_sum);
    }
    mean /= static_cast<double>(k_rounds);
    const double var_round =
        std::max(0.0, sq / k_rounds - std::norm(mean)) / std::max(1, k_rounds - 1);

    out.value += w * (plain + mean);
    variance += w * w * var_round;
  };

  if (spec.graph.num_summation <= config.exact_limit) {
    out.exact_sum = true;
    star.enumerate(visit);
  } else {
    out.exact_sum = false;
    const long total = star.tuple_count();
    const long draws = std::max<long>(1, config.subsample_tuples);
    star.sample(draws, config.subsample_seed, visit);
    const double scale = static_cast<double>(total) / static_cast<double>(draws);
    out.value *= scale;
    variance *= scale * scale;
  }
  out.std_error = std::sqrt(variance);
  return out;
}

PProductResult evaluate_P_product(const MatrixSample& sample,
                                  const ResolventTable& table,
                                  const AveragingSpec& spec,
                                  const std::vector<int>& vertex_values,
                                  const std::vector<int>& fixed_values, int K,
                                  int round_base) {
  (void)fixed_values;
  if (spec.mode != AveragingMode::PProduct && !spec.q_set.empty())
    throw std::invalid_argument("partial-expectation mode requires an empty Q set");
  if (K < 2) throw std::invalid_argument("K must be at least 2");
  check_star_constraint(spec, vertex_values);

  std::vector<int> rows(vertex_values.begin(),
                        vertex_values.begin() + spec.graph.num_summation);
  ResampledResolvent estimator(sample, table, rows, vertex_values);
  std::vector<std::uint64_t> rounds(K);
  for (int r = 0; r < K; ++r)
    rounds[r] = static_cast<std::uint64_t>(round_base + r + 1);
  estimator.prepare_rounds(rounds);
  Complex mean(0, 0);
  double sq = 0.0;
  for (int r = 0; r < K; ++r) {
    estimator.select_round(r);
    const Complex v = monomial_value(estimator, spec, vertex_values);
    mean += v;
    sq += std::norm(v);
  }
  mean /= static_cast<double>(K);
  const double var = std::max(0.0, sq / K - std::norm(mean)) / (K - 1);
  return {mean, std::sqrt(var)};
}

}  // namespace fluctavg
