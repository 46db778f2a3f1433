#include "fluctavg/classify.hpp"

#include <cstdlib>
#include <stdexcept>

namespace fluctavg {

VertexClassification classify(const AveragingSpec& spec) {
  const AdmissibleGraph& graph = spec.graph;
  VertexClassification out;
  out.summation.resize(graph.num_summation);

  for (const MonomialEdge& e : graph.edges) {
    // ginv loops count like solid legs; the bound is unchanged when a
    // diagonal entry is read as 1/G_aa - 1/m.
    const bool solid = e.colour == EdgeColour::Solid;
    for (int endpoint : {e.source, e.target}) {
      if (!graph.is_summation(endpoint)) continue;
      VertexInfo& info = out.summation[endpoint];
      (solid ? info.solid_legs : info.dashed_legs) += 1;
    }
  }

  for (int v = 0; v < graph.num_summation; ++v) {
    VertexInfo& info = out.summation[v];
    const int diff = std::abs(info.solid_legs - info.dashed_legs);
    info.charged = spec.in_q_set(v) ? diff != 2 : diff != 0;
    if (info.charged) out.charged_set.push_back(v);

    bool self_adjacent = false;
    int legs = 0;
    EdgeColour colours[2] = {EdgeColour::Solid, EdgeColour::Solid};
    for (const MonomialEdge& e : graph.edges) {
      if (e.source == v && e.target == v) self_adjacent = true;
      for (int endpoint : {e.source, e.target}) {
        if (endpoint != v) continue;
        if (legs < 2) colours[legs] = e.colour;
        ++legs;
      }
    }
    info.chain_vertex = !self_adjacent && legs == 2 && colours[0] == colours[1];
    if (info.chain_vertex) ++out.chain_count;
  }
  return out;
}

bool is_chain_graph(const AdmissibleGraph& graph) {
  const VertexClassification cls = classify(AveragingSpec{graph, {}, {}, {}});
  for (int v = 0; v < graph.num_summation; ++v)
    if (!cls.summation[v].chain_vertex) return false;

  std::vector<int> external_degrees;
  for (int v = graph.num_summation; v < graph.num_vertices(); ++v)
    external_degrees.push_back(graph.vertex_degree(v));

  if (external_degrees.size() == 2)
    return external_degrees[0] == 1 && external_degrees[1] == 1;  // open
  if (external_degrees.size() <= 1)
    return external_degrees.empty() || external_degrees[0] == 2;  // closed
  return false;
}

bool is_chain_weight(const AveragingSpec& spec) {
  const WeightSpec& w = spec.weight;
  if (!w.dummies.empty()) return false;
  std::vector<int> hits(spec.graph.num_summation, 0);
  for (const WeightFactor& f : w.factors) {
    if (f.kind != WeightFactor::Kind::SEntry) return false;
    const bool x_sum = f.x.kind == WeightRef::Kind::Summation;
    const bool y_sum = f.y.kind == WeightRef::Kind::Summation;
    if (x_sum == y_sum) return false;  // exactly one summation index per factor
    ++hits[x_sum ? f.x.index : f.y.index];
  }
  for (int h : hits)
    if (h != 1) return false;
  return true;
}

ExponentPrediction predicted_exponents(const AveragingSpec& spec) {
  return predicted_exponents(spec, spec.mode);
}

ExponentPrediction predicted_exponents(const AveragingSpec& spec,
                                       AveragingMode mode) {
  const VertexClassification cls = classify(spec);
  const int deg = spec.graph.degree();
  const int f = static_cast<int>(spec.q_set.size());

  ExponentPrediction out;
  switch (mode) {
    case AveragingMode::QAverage:
      out.psi_exp = deg + f;
      out.phi_exp = cls.num_charged();
      break;
    case AveragingMode::Chain:
      if (!is_chain_graph(spec.graph))
        throw std::invalid_argument("chain-mode prediction on a non-chain graph");
      if (!is_chain_weight(spec))
        throw std::invalid_argument("chain-mode prediction needs a chain weight");
      out.psi_exp = deg + f;
      out.phi_exp = cls.chain_count - f;
      break;
    case AveragingMode::PProduct:
      if (f != 0)
        throw std::invalid_argument(
            "partial-expectation mode requires an empty Q set");
      out.psi_exp = deg;
      out.phi_exp = cls.num_charged();
      break;
  }
  out.simple_exp = out.psi_exp + out.phi_exp;
  return out;
}

}  // namespace fluctavg
