#pragma once

#include <string>
#include <vector>

#include "fluctavg/sampler.hpp"

namespace fluctavg {

enum class EdgeColour { Solid, Dashed };  // g -> entries of G, g* -> entries of G*

// Directed edge of an admissible graph. `inverse_diagonal` marks the ginv
// atom, a loop read as 1/G_aa - 1/m instead of G_aa - m.
struct MonomialEdge {
  int source = 0;
  int target = 0;
  EdgeColour colour = EdgeColour::Solid;
  bool inverse_diagonal = false;

  bool is_loop() const { return source == target; }
};

// Directed edge-coloured multigraph with summation and external vertices.
// Vertices [0, num_summation) are summation vertices, the rest external.
struct AdmissibleGraph {
  std::vector<std::string> vertex_names;
  int num_summation = 0;
  std::vector<MonomialEdge> edges;

  int num_vertices() const { return static_cast<int>(vertex_names.size()); }
  int num_external() const { return num_vertices() - num_summation; }
  bool is_summation(int v) const { return v < num_summation; }
  int degree() const { return static_cast<int>(edges.size()); }
  int vertex_degree(int v) const;  // legs; a loop counts twice
  const std::string& name(int v) const { return vertex_names[v]; }
  int find_vertex(const std::string& name) const;  // -1 if absent
};

struct WeightRef {
  enum class Kind { Summation, External, Dummy, Fixed } kind;
  int index = 0;  // vertex id, dummy slot, or fixed-name slot
};

struct WeightFactor {
  enum class Kind { OneOverN, SEntry } kind = Kind::OneOverN;
  WeightRef x, y;  // only meaningful for SEntry
};

// Product of 1/N and s(.,.) factors; `dummies` are internally summed over the
// full index range. `fixed_names` are indices that appear only in the weight
// and must be assigned a value before evaluation.
struct WeightSpec {
  std::vector<std::string> dummies;
  std::vector<std::string> fixed_names;
  std::vector<WeightFactor> factors;
};

enum class AveragingMode { QAverage, PProduct, Chain };

struct AveragingSpec {
  AdmissibleGraph graph;
  std::vector<int> q_set;  // F, ascending vertex ids
  WeightSpec weight;
  AveragingMode mode = AveragingMode::QAverage;

  bool in_q_set(int v) const;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& message, std::size_t position);
  std::size_t position;
};

// Parses one spec block of the monomial language:
//   spec    := "sum" idlist ";" "ext" idlist ";" "Q:" ("-" | idlist) ";"
//              "w:" weight ";" term+
//   term    := ("g" | "g*" | "ginv") "(" id "," id ")"
//   weight  := factor ("*" factor)* | "sum" id ":" weight
//   factor  := "1/N" | "s(" id "," id ")"
AveragingSpec parse_monomial(const std::string& text);

// Canonical form; parse(print(spec)) reproduces the spec exactly.
std::string print_monomial(const AveragingSpec& spec);

// Weight value for a full assignment of summation/external/fixed indices.
// Dummy indices are summed over 1..N internally (unrestricted).
class WeightEvaluator {
 public:
  WeightEvaluator(const WeightSpec& weight, const AdmissibleGraph& graph,
                  const VarianceMatrix& s);

  // `vertex_values` has one entry per graph vertex, `fixed_values` one per
  // weight.fixed_names slot.
  double value(const std::vector<int>& vertex_values,
               const std::vector<int>& fixed_values) const;

 private:
  double factor_product(const std::vector<int>& bound) const;
  const WeightSpec& weight_;
  const VarianceMatrix& s_;
  int num_vertices_;
};

// Exhaustive check of the defining partial-sum inequality
//   max_{a_I} sum_{a_J : P(a_J) = P} w(a_I, a_J) <= M^{|P| - |V_s|}
// over every split V_s = I ⊔ J and every partition P of J. Feasible for
// |V_s| <= 3 and small N; used by property tests.
bool weight_partition_inequality_holds(const AveragingSpec& spec,
                                       const VarianceMatrix& s,
                                       const std::vector<int>& external_values,
                                       const std::vector<int>& fixed_values,
                                       double slack = 1e-9);

}  // namespace fluctavg
