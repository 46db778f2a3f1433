#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluctavg/classify.hpp"
#include "fluctavg/monomial.hpp"

namespace fluctavg {

enum class StageColour { Solid, Dashed, Dotted, Wiggly };

struct StageEdge {
  int source = 0;
  int target = 0;  // wiggly edges are undirected and stored with source <= target
  StageColour colour = StageColour::Solid;
  int strokes = 0;  // wiggly only: lump size - 2, or dotted-bundle count - 2

  bool is_resolvent() const {
    return colour == StageColour::Solid || colour == StageColour::Dashed;
  }
};

enum class StageVertexKind { Summation, External, Fresh };

struct StageVertex {
  StageVertexKind kind = StageVertexKind::Summation;
  int delta_vertex = -1;  // projection to the base graph (summation/external)
  int copy = 0;           // which of the p copies (summation vertices)
  int parent = -1;        // fresh vertices: the summation vertex they resolve
  int link_count = 0;     // times this vertex was linked to (expansion stage)
};

// One graph of the moment expansion. The same type carries all four stages:
// the p-fold power graph, the maximally expanded graphs, the vertex-resolved
// graphs (fresh vertices, dotted edges), and the lumped graphs (wiggly edges).
struct ExpansionGraph {
  enum class Stage { Power, MaxExpanded, Resolved, Lumped };
  Stage stage = Stage::Power;
  int p = 0;
  std::vector<StageVertex> vertices;
  std::vector<StageEdge> edges;
  long multiplicity = 1;   // linking histories reaching this graph
  bool survives = false;   // every Q-copy vertex linked at least once
  bool remainder = false;  // expansion cut by the edge cap

  int resolvent_edge_count() const;
  int dotted_between_summation() const;  // sigma: dotted edges joining V_s pairs
  int vertex_degree(int v) const;        // legs; loops count twice
  int solid_legs(int v) const;
  int dashed_legs(int v) const;
  std::vector<int> summation_vertices() const;
  std::vector<int> fresh_children(int parent) const;
  std::string label(int v, const AdmissibleGraph& delta) const;
};

// p/2 plain copies and p/2 colour-flipped, direction-reversed copies of the
// monomial graph, with external vertices merged across copies. p must be even.
ExpansionGraph power_graph(const AdmissibleGraph& delta, int p);

// Replaces edge `edge_index` = (i, j) by the same-coloured pair (i, k), (k, j)
// and credits a linking to k. k must be a summation vertex distinct from both
// endpoints.
ExpansionGraph link(const ExpansionGraph& graph, int edge_index, int vertex);

struct ExpansionLimits {
  int stop_edges = 0;        // links that would push |E| past this are cut
  long max_graphs = 100000;  // distinct graphs kept per stage
};

struct MaximalExpansionResult {
  std::vector<ExpansionGraph> graphs;  // deduplicated, with flags
  long histories = 0;                  // enumeration leaves visited
  long remainder_histories = 0;
  bool truncated = false;
  int min_surviving_edges = -1;

  std::vector<const ExpansionGraph*> surviving() const;
};

// Enumerates all linking histories that make every edge maximally expanded in
// the full summation index set, applying the edge cap, then filters survivors:
// a graph survives iff every copy of a Q vertex was linked to at least once.
MaximalExpansionResult maximal_expansion(const ExpansionGraph& power,
                                         const std::vector<int>& q_set_delta,
                                         const ExpansionLimits& limits);

// Vertex resolution: rewrites every resolvent edge incident to summation
// vertices, creating degree-two fresh vertices tied to their parents by
// dotted edges; edges joining two summation vertices alternatively collapse
// to a direct dotted edge. Requires a loop-free input.
std::vector<ExpansionGraph> resolve_vertices(const ExpansionGraph& gamma);

// Lumping: partitions each parent's fresh vertices into blocks of size >= 2
// (complex-Hermitian class: blocks of size two must pair one incoming with
// one outgoing dotted edge), merging each block into one fresh vertex tied to
// the parent by a wiggly edge with (block size - 2) strokes. Dotted bundles
// between summation vertices need multiplicity >= 2 and become wiggly edges
// with (count - 2) strokes.
std::vector<ExpansionGraph> lump(const ExpansionGraph& theta,
                                 SymmetryClass symmetry);

struct MarkedSet {
  std::vector<int> charged;  // vertices of Gamma over charged base vertices
  std::vector<int> marked;   // charged and minimally linked
};

MarkedSet classify_marked(const ExpansionGraph& gamma, const AveragingSpec& spec);

enum class ResolutionCase { ChainChild, HigherLump, DirectBundle };  // (a)/(b)/(c)

ResolutionCase resolution_case(const ExpansionGraph& upsilon, int marked_vertex);

struct ExponentContext {
  int p = 0;
  int degree = 0;       // deg(Delta)
  int q_count = 0;      // |F|
  int charged_count = 0;  // |V_c(Delta)|
};

struct GraphExponents {
  int psi_exp = 0;  // resolvent edges of Upsilon = |E(Gamma)| - sigma
  int phi_exp = 0;  // case (a) + case (b) marked vertices
  int m_exp2 = 0;   // twice the M exponent: strokes + sigma
  bool dominated = false;  // <= Psi^{p(deg+|F|)} Phi^{p|V_c|} by exponent arithmetic
};

GraphExponents bound_from_graph(const ExpansionGraph& upsilon,
                                const ExpansionGraph& gamma,
                                const MarkedSet& marked,
                                const ExponentContext& context);

struct StructureReport {
  long gamma_count = 0;
  long theta_count = 0;
  long upsilon_count = 0;
  long marked_total = 0;
  bool marked_imbalance_ok = true;   // marked => solid legs != dashed legs
  bool edge_lower_bound_ok = true;   // |E| >= p(deg+|F|) + |V_c| - |V_m|
  bool edge_conservation_ok = true;  // both conservation identities
  bool case_structure_ok = true;     // chain child / crossed wiggly / bundle
  bool exponents_ok = true;          // power-counting inequality on every graph
  std::vector<std::string> counterexamples;

  bool all_ok() const {
    return marked_imbalance_ok && edge_lower_bound_ok && edge_conservation_ok &&
           case_structure_ok && exponents_ok;
  }
};

// Runs resolution and lumping over one expanded graph and checks every
// structural assertion; counterexamples carry graph dumps.
StructureReport assert_structure(const ExpansionGraph& gamma,
                                 const AveragingSpec& spec,
                                 SymmetryClass symmetry);

struct PipelineReport {
  long histories = 0;
  long remainder_histories = 0;
  long distinct_graphs = 0;
  long surviving_graphs = 0;
  int min_surviving_edges = -1;
  bool truncated = false;
  StructureReport structure;
  ExponentContext context;
};

// Full pipeline for one spec: power graph, maximal expansion, resolution,
// lumping, assertions. `stop_edges` <= 0 selects p (deg + |F|), the minimal
// surviving edge count.
PipelineReport run_expansion_pipeline(const AveragingSpec& spec, int p,
                                      SymmetryClass symmetry,
                                      int stop_edges = 0,
                                      long max_graphs = 100000);

// Adjacency-list dump with decorations; one vertex or edge per line.
std::string dump_graph(const ExpansionGraph& graph, const AdmissibleGraph& delta);

}  // namespace fluctavg
