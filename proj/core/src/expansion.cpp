#include "fluctavg/expansion.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fluctavg {

int ExpansionGraph::resolvent_edge_count() const {
  int count = 0;
  for (const StageEdge& e : edges)
    if (e.is_resolvent()) ++count;
  return count;
}

int ExpansionGraph::dotted_between_summation() const {
  int count = 0;
  for (const StageEdge& e : edges)
    if (e.colour == StageColour::Dotted &&
        vertices[e.source].kind == StageVertexKind::Summation &&
        vertices[e.target].kind == StageVertexKind::Summation)
      ++count;
  return count;
}

int ExpansionGraph::vertex_degree(int v) const {
  int legs = 0;
  for (const StageEdge& e : edges) {
    if (e.source == v) ++legs;
    if (e.target == v) ++legs;
  }
  return legs;
}

int ExpansionGraph::solid_legs(int v) const {
  int legs = 0;
  for (const StageEdge& e : edges)
    if (e.colour == StageColour::Solid) {
      if (e.source == v) ++legs;
      if (e.target == v) ++legs;
    }
  return legs;
}

int ExpansionGraph::dashed_legs(int v) const {
  int legs = 0;
  for (const StageEdge& e : edges)
    if (e.colour == StageColour::Dashed) {
      if (e.source == v) ++legs;
      if (e.target == v) ++legs;
    }
  return legs;
}

std::vector<int> ExpansionGraph::summation_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(vertices.size()); ++v)
    if (vertices[v].kind == StageVertexKind::Summation) out.push_back(v);
  return out;
}

std::vector<int> ExpansionGraph::fresh_children(int parent) const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(vertices.size()); ++v)
    if (vertices[v].kind == StageVertexKind::Fresh &&
        vertices[v].parent == parent)
      out.push_back(v);
  return out;
}

std::string ExpansionGraph::label(int v, const AdmissibleGraph& delta) const {
  const StageVertex& vert = vertices[v];
  switch (vert.kind) {
    case StageVertexKind::Summation:
      return delta.name(vert.delta_vertex) + "^" + std::to_string(vert.copy + 1);
    case StageVertexKind::External:
      return delta.name(vert.delta_vertex);
    case StageVertexKind::Fresh:
      return "f" + std::to_string(v);
  }
  return "?";
}

ExpansionGraph power_graph(const AdmissibleGraph& delta, int p) {
  if (p < 2 || p % 2 != 0) throw std::invalid_argument("p must be even and >= 2");
  ExpansionGraph out;
  out.stage = ExpansionGraph::Stage::Power;
  out.p = p;

  // Summation vertices copy-major, then the merged external vertices.
  std::vector<std::vector<int>> copy_slots(p);
  for (int j = 0; j < p; ++j) {
    copy_slots[j].resize(delta.num_summation);
    for (int v = 0; v < delta.num_summation; ++v) {
      copy_slots[j][v] = static_cast<int>(out.vertices.size());
      StageVertex vert;
      vert.kind = StageVertexKind::Summation;
      vert.delta_vertex = v;
      vert.copy = j;
      out.vertices.push_back(vert);
    }
  }
  std::vector<int> external_slots(delta.num_vertices(), -1);
  for (int v = delta.num_summation; v < delta.num_vertices(); ++v) {
    external_slots[v] = static_cast<int>(out.vertices.size());
    StageVertex vert;
    vert.kind = StageVertexKind::External;
    vert.delta_vertex = v;
    out.vertices.push_back(vert);
  }

  const auto slot = [&](int j, int delta_vertex) {
    return delta.is_summation(delta_vertex) ? copy_slots[j][delta_vertex]
                                            : external_slots[delta_vertex];
  };
  for (int j = 0; j < p; ++j) {
    const bool conjugated = j >= p / 2;
    for (const MonomialEdge& e : delta.edges) {
      StageEdge edge;
      const bool solid = e.colour == EdgeColour::Solid;
      if (conjugated) {
        edge.source = slot(j, e.target);
        edge.target = slot(j, e.source);
        edge.colour = solid ? StageColour::Dashed : StageColour::Solid;
      } else {
        edge.source = slot(j, e.source);
        edge.target = slot(j, e.target);
        edge.colour = solid ? StageColour::Solid : StageColour::Dashed;
      }
      out.edges.push_back(edge);
    }
  }
  return out;
}

ExpansionGraph link(const ExpansionGraph& graph, int edge_index, int vertex) {
  if (edge_index < 0 || edge_index >= static_cast<int>(graph.edges.size()))
    throw std::out_of_range("edge index out of range");
  const StageEdge e = graph.edges[edge_index];
  if (!e.is_resolvent())
    throw std::invalid_argument("only resolvent edges can be linked");
  if (graph.vertices[vertex].kind != StageVertexKind::Summation)
    throw std::invalid_argument("linking target must be a summation vertex");
  if (vertex == e.source || vertex == e.target)
    throw std::invalid_argument("linking target must differ from the endpoints");

  ExpansionGraph out = graph;
  out.edges[edge_index] = {e.source, vertex, e.colour, 0};
  out.edges.push_back({vertex, e.target, e.colour, 0});
  out.vertices[vertex].link_count += 1;
  return out;
}

namespace {

// Canonical key under permutations of the copies of each base vertex;
// external vertices are fixed points. Used to merge linking histories that
// reach the same graph.
std::string canonical_key(const ExpansionGraph& g) {
  std::vector<std::vector<int>> classes;  // summation vertices per base vertex
  std::map<int, int> class_of_delta;
  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    const StageVertex& vert = g.vertices[v];
    if (vert.kind != StageVertexKind::Summation) continue;
    auto it = class_of_delta.find(vert.delta_vertex);
    if (it == class_of_delta.end()) {
      class_of_delta.emplace(vert.delta_vertex, static_cast<int>(classes.size()));
      classes.push_back({v});
    } else {
      classes[it->second].push_back(v);
    }
  }

  const int nv = static_cast<int>(g.vertices.size());
  std::vector<int> relabel(nv);
  for (int v = 0; v < nv; ++v) relabel[v] = v;

  std::string best;
  const std::function<void(std::size_t)> assign = [&](std::size_t c) {
    if (c == classes.size()) {
      std::vector<std::tuple<int, int, int, int>> encoded;
      encoded.reserve(g.edges.size());
      for (const StageEdge& e : g.edges) {
        int a = relabel[e.source];
        int b = relabel[e.target];
        if (e.colour == StageColour::Wiggly && a > b) std::swap(a, b);
        encoded.emplace_back(a, b, static_cast<int>(e.colour), e.strokes);
      }
      std::sort(encoded.begin(), encoded.end());
      std::ostringstream key;
      key << (g.remainder ? "r|" : "c|");
      for (const auto& [a, b, colour, strokes] : encoded)
        key << a << ',' << b << ',' << colour << ',' << strokes << ';';
      const std::string candidate = key.str();
      if (best.empty() || candidate < best) best = candidate;
      return;
    }
    std::vector<int> perm = classes[c];
    std::sort(perm.begin(), perm.end());
    do {
      for (std::size_t k = 0; k < perm.size(); ++k) relabel[classes[c][k]] = perm[k];
      assign(c + 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  assign(0);
  return best;
}

struct WorkEdge {
  int source, target;
  StageColour colour;
  std::uint32_t upper;  // summation vertices this entry is independent of
};

}  // namespace

std::vector<const ExpansionGraph*> MaximalExpansionResult::surviving() const {
  std::vector<const ExpansionGraph*> out;
  for (const ExpansionGraph& g : graphs)
    if (g.survives) out.push_back(&g);
  return out;
}

MaximalExpansionResult maximal_expansion(const ExpansionGraph& power,
                                         const std::vector<int>& q_set_delta,
                                         const ExpansionLimits& limits) {
  const std::vector<int> summation = power.summation_vertices();
  if (summation.size() > 31)
    throw std::invalid_argument("too many summation vertices for expansion");
  if (limits.stop_edges < static_cast<int>(power.edges.size()))
    throw std::invalid_argument("stop_edges below the power-graph edge count");

  std::uint32_t all_mask = 0;
  for (int v : summation) all_mask |= 1u << v;
  const auto in_q = [&](int v) {
    const StageVertex& vert = power.vertices[v];
    return vert.kind == StageVertexKind::Summation &&
           std::find(q_set_delta.begin(), q_set_delta.end(),
                     vert.delta_vertex) != q_set_delta.end();
  };

  MaximalExpansionResult result;
  std::map<std::string, std::size_t> seen;
  constexpr long kMaxHistories = 20000000;

  std::vector<WorkEdge> initial;
  initial.reserve(power.edges.size());
  for (const StageEdge& e : power.edges)
    initial.push_back({e.source, e.target, e.colour, 0});

  const auto emit = [&](const std::vector<WorkEdge>& edges,
                        const std::vector<int>& links, bool remainder) {
    ExpansionGraph g;
    g.stage = ExpansionGraph::Stage::MaxExpanded;
    g.p = power.p;
    g.vertices = power.vertices;
    for (std::size_t v = 0; v < links.size(); ++v)
      g.vertices[v].link_count = links[v];
    for (const WorkEdge& e : edges)
      g.edges.push_back({e.source, e.target, e.colour, 0});
    g.remainder = remainder;
    g.survives = !remainder;
    if (!remainder)
      for (int v : summation)
        if (in_q(v) && links[v] == 0) g.survives = false;

    const std::string key = canonical_key(g);
    auto it = seen.find(key);
    if (it != seen.end()) {
      result.graphs[it->second].multiplicity += 1;
      return;
    }
    if (static_cast<long>(result.graphs.size()) >= limits.max_graphs) {
      result.truncated = true;
      return;
    }
    seen.emplace(key, result.graphs.size());
    result.graphs.push_back(std::move(g));
  };

  std::vector<int> links(power.vertices.size(), 0);
  const std::function<void(std::vector<WorkEdge>&, std::vector<int>&)> explore =
      [&](std::vector<WorkEdge>& edges, std::vector<int>& link_counts) {
        if (result.histories + result.remainder_histories >= kMaxHistories) {
          result.truncated = true;
          return;
        }
        // First edge that is not yet maximally expanded, lowest missing index.
        int edge_index = -1;
        int missing = -1;
        for (std::size_t k = 0; k < edges.size() && edge_index < 0; ++k) {
          const WorkEdge& e = edges[k];
          std::uint32_t required = all_mask & ~e.upper;
          if (e.source < 32) required &= ~(1u << e.source);
          if (e.target < 32) required &= ~(1u << e.target);
          if (required) {
            edge_index = static_cast<int>(k);
            missing = __builtin_ctz(required);
          }
        }
        if (edge_index < 0) {
          ++result.histories;
          emit(edges, link_counts, /*remainder=*/false);
          return;
        }

        {  // carry the upper index without linking
          const std::uint32_t saved = edges[edge_index].upper;
          edges[edge_index].upper |= 1u << missing;
          explore(edges, link_counts);
          edges[edge_index].upper = saved;
        }

        if (static_cast<int>(edges.size()) < limits.stop_edges) {
          // Link: replace (i, j) with (i, d), (d, j) of the same colour.
          const WorkEdge e = edges[edge_index];
          std::vector<WorkEdge> next = edges;
          next[edge_index] = {e.source, missing, e.colour, e.upper};
          next.push_back({missing, e.target, e.colour, e.upper});
          link_counts[missing] += 1;
          explore(next, link_counts);
          link_counts[missing] -= 1;
        } else {
          // The link would push the term past the edge cap; it joins the
          // remainder bucket in its linked form.
          ++result.remainder_histories;
          const WorkEdge e = edges[edge_index];
          std::vector<WorkEdge> next = edges;
          next[edge_index] = {e.source, missing, e.colour, e.upper};
          next.push_back({missing, e.target, e.colour, e.upper});
          link_counts[missing] += 1;
          emit(next, link_counts, /*remainder=*/true);
          link_counts[missing] -= 1;
        }
      };
  explore(initial, links);

  for (const ExpansionGraph& g : result.graphs)
    if (g.survives) {
      const int count = static_cast<int>(g.edges.size());
      if (result.min_surviving_edges < 0 || count < result.min_surviving_edges)
        result.min_surviving_edges = count;
    }
  return result;
}

std::vector<ExpansionGraph> resolve_vertices(const ExpansionGraph& gamma) {
  for (const StageEdge& e : gamma.edges)
    if (e.source == e.target)
      throw std::domain_error(
          "vertex resolution requires a loop-free graph: diagonal entries are "
          "read as m here, which excludes loop edges");

  const auto is_summation = [&](int v) {
    return gamma.vertices[v].kind == StageVertexKind::Summation;
  };

  // Per edge: one mandatory rewrite, plus the direct matrix-entry alternative
  // when both endpoints are summation vertices.
  std::vector<int> choices(gamma.edges.size(), 1);
  for (std::size_t k = 0; k < gamma.edges.size(); ++k)
    if (is_summation(gamma.edges[k].source) && is_summation(gamma.edges[k].target))
      choices[k] = 2;

  std::vector<ExpansionGraph> out;
  std::vector<int> pick(gamma.edges.size(), 0);
  while (true) {
    ExpansionGraph theta;
    theta.stage = ExpansionGraph::Stage::Resolved;
    theta.p = gamma.p;
    theta.vertices = gamma.vertices;
    theta.multiplicity = gamma.multiplicity;

    const auto fresh = [&](int parent) {
      StageVertex vert;
      vert.kind = StageVertexKind::Fresh;
      vert.parent = parent;
      theta.vertices.push_back(vert);
      return static_cast<int>(theta.vertices.size()) - 1;
    };

    for (std::size_t k = 0; k < gamma.edges.size(); ++k) {
      const StageEdge& e = gamma.edges[k];
      const bool src_sum = is_summation(e.source);
      const bool dst_sum = is_summation(e.target);
      if (!src_sum && !dst_sum)
        throw std::logic_error("edge incident to no summation vertex");
      if (src_sum && dst_sum && pick[k] == 1) {
        theta.edges.push_back({e.source, e.target, StageColour::Dotted, 0});
        continue;
      }
      int src = e.source;
      int dst = e.target;
      if (src_sum) {
        const int x = fresh(e.source);
        theta.edges.push_back({e.source, x, StageColour::Dotted, 0});
        src = x;
      }
      if (dst_sum) {
        const int y = fresh(e.target);
        theta.edges.push_back({y, e.target, StageColour::Dotted, 0});
        dst = y;
      }
      theta.edges.push_back({src, dst, e.colour, 0});
    }
    out.push_back(std::move(theta));

    // mixed-radix increment over the per-edge alternatives
    std::size_t pos = 0;
    while (pos < pick.size()) {
      if (++pick[pos] < choices[pos]) break;
      pick[pos] = 0;
      ++pos;
    }
    if (pos == pick.size()) break;
  }
  return out;
}

namespace {

// All partitions of {0..k-1} into blocks of size >= 2, as block-index vectors.
void lumpings_of(int k, std::vector<std::vector<int>>& out) {
  std::vector<int> assign(k, -1);
  const std::function<void(int, int)> rec = [&](int pos, int blocks) {
    if (pos == k) {
      std::vector<int> sizes(blocks, 0);
      for (int b : assign) ++sizes[b];
      for (int s : sizes)
        if (s < 2) return;
      out.push_back(assign);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      assign[pos] = b;
      rec(pos + 1, std::max(blocks, b + 1));
    }
  };
  if (k == 0)
    out.push_back({});
  else
    rec(0, 0);
}

}  // namespace

std::vector<ExpansionGraph> lump(const ExpansionGraph& theta,
                                 SymmetryClass symmetry) {
  // Dotted bundles between summation vertices must have multiplicity >= 2:
  // a single matrix entry has mean zero and kills the whole term.
  std::map<std::pair<int, int>, int> bundles;
  for (const StageEdge& e : theta.edges) {
    if (e.colour != StageColour::Dotted) continue;
    if (theta.vertices[e.source].kind == StageVertexKind::Summation &&
        theta.vertices[e.target].kind == StageVertexKind::Summation) {
      auto key = std::minmax(e.source, e.target);
      bundles[{key.first, key.second}] += 1;
    }
  }
  for (const auto& [pair, count] : bundles)
    if (count < 2) return {};

  // Group fresh vertices by parent; record the dotted-edge orientation
  // (parent -> fresh = outgoing) and the one resolvent edge per fresh vertex.
  std::vector<int> parents;
  std::map<int, std::vector<int>> children;
  std::vector<bool> outgoing(theta.vertices.size(), false);
  for (const StageEdge& e : theta.edges) {
    if (e.colour != StageColour::Dotted) continue;
    if (theta.vertices[e.source].kind == StageVertexKind::Summation &&
        theta.vertices[e.target].kind == StageVertexKind::Fresh)
      outgoing[e.target] = true;
  }
  for (int v = 0; v < static_cast<int>(theta.vertices.size()); ++v)
    if (theta.vertices[v].kind == StageVertexKind::Fresh)
      children[theta.vertices[v].parent].push_back(v);
  for (const auto& [parent, kids] : children) {
    parents.push_back(parent);
    if (kids.size() < 2) return {};  // a lone fresh vertex cannot be lumped
  }

  // Per-parent lumpings, with the orientation rule for Hermitian pairings.
  std::vector<std::vector<std::vector<int>>> options(parents.size());
  for (std::size_t pi = 0; pi < parents.size(); ++pi) {
    const std::vector<int>& kids = children[parents[pi]];
    std::vector<std::vector<int>> raw;
    lumpings_of(static_cast<int>(kids.size()), raw);
    for (const std::vector<int>& assign : raw) {
      if (symmetry == SymmetryClass::ComplexHermitian) {
        const int blocks = *std::max_element(assign.begin(), assign.end()) + 1;
        std::vector<std::vector<int>> members(blocks);
        for (std::size_t k = 0; k < assign.size(); ++k)
          members[assign[k]].push_back(kids[k]);
        bool ok = true;
        for (const std::vector<int>& block : members)
          if (block.size() == 2 && outgoing[block[0]] == outgoing[block[1]])
            ok = false;  // a pairing must match incoming with outgoing
        if (!ok) continue;
      }
      options[pi].push_back(assign);
    }
    if (options[pi].empty()) return {};
  }

  std::vector<ExpansionGraph> out;
  std::vector<std::size_t> pick(parents.size(), 0);
  while (true) {
    ExpansionGraph upsilon;
    upsilon.stage = ExpansionGraph::Stage::Lumped;
    upsilon.p = theta.p;
    upsilon.multiplicity = theta.multiplicity;
    for (const StageVertex& v : theta.vertices)
      if (v.kind != StageVertexKind::Fresh) upsilon.vertices.push_back(v);

    std::vector<int> remap(theta.vertices.size(), -1);
    for (int v = 0; v < static_cast<int>(theta.vertices.size()); ++v)
      if (theta.vertices[v].kind != StageVertexKind::Fresh) remap[v] = v;

    for (std::size_t pi = 0; pi < parents.size(); ++pi) {
      const std::vector<int>& kids = children[parents[pi]];
      const std::vector<int>& assign = options[pi][pick[pi]];
      const int blocks = *std::max_element(assign.begin(), assign.end()) + 1;
      std::vector<int> block_vertex(blocks, -1);
      std::vector<int> block_size(blocks, 0);
      for (std::size_t k = 0; k < kids.size(); ++k) ++block_size[assign[k]];
      for (int b = 0; b < blocks; ++b) {
        StageVertex vert;
        vert.kind = StageVertexKind::Fresh;
        vert.parent = parents[pi];
        block_vertex[b] = static_cast<int>(upsilon.vertices.size());
        upsilon.vertices.push_back(vert);
        upsilon.edges.push_back({std::min(parents[pi], block_vertex[b]),
                                 std::max(parents[pi], block_vertex[b]),
                                 StageColour::Wiggly, block_size[b] - 2});
      }
      for (std::size_t k = 0; k < kids.size(); ++k)
        remap[kids[k]] = block_vertex[assign[k]];
    }

    for (const StageEdge& e : theta.edges) {
      if (e.colour == StageColour::Dotted) continue;
      upsilon.edges.push_back({remap[e.source], remap[e.target], e.colour, 0});
    }
    for (const auto& [pair, count] : bundles)
      upsilon.edges.push_back(
          {pair.first, pair.second, StageColour::Wiggly, count - 2});

    out.push_back(std::move(upsilon));

    std::size_t pos = 0;
    while (pos < pick.size()) {
      if (++pick[pos] < options[pos].size()) break;
      pick[pos] = 0;
      ++pos;
    }
    if (pos == pick.size() || pick.empty()) break;
  }
  return out;
}

MarkedSet classify_marked(const ExpansionGraph& gamma, const AveragingSpec& spec) {
  const VertexClassification cls = classify(spec);
  MarkedSet out;
  for (int v : gamma.summation_vertices()) {
    const StageVertex& vert = gamma.vertices[v];
    const bool charged = std::find(cls.charged_set.begin(), cls.charged_set.end(),
                                   vert.delta_vertex) != cls.charged_set.end();
    if (!charged) continue;
    out.charged.push_back(v);
    const int minimal_links = spec.in_q_set(vert.delta_vertex) ? 1 : 0;
    if (vert.link_count == minimal_links) out.marked.push_back(v);
  }
  return out;
}

namespace {

int sigma_of(const ExpansionGraph& g) {
  if (g.stage == ExpansionGraph::Stage::Resolved)
    return g.dotted_between_summation();
  int sigma = 0;
  for (const StageEdge& e : g.edges)
    if (e.colour == StageColour::Wiggly &&
        g.vertices[e.source].kind == StageVertexKind::Summation &&
        g.vertices[e.target].kind == StageVertexKind::Summation)
      sigma += e.strokes + 2;
  return sigma;
}

bool has_summation_wiggly(const ExpansionGraph& upsilon, int v) {
  for (const StageEdge& e : upsilon.edges) {
    if (e.colour != StageColour::Wiggly) continue;
    const int other = e.source == v ? e.target : (e.target == v ? e.source : -1);
    if (other >= 0 &&
        upsilon.vertices[other].kind == StageVertexKind::Summation)
      return true;
  }
  return false;
}

bool is_chain_child(const ExpansionGraph& upsilon, int child) {
  int wiggly = 0, strokes = 0, resolvent = 0;
  StageColour colours[2] = {StageColour::Solid, StageColour::Solid};
  for (const StageEdge& e : upsilon.edges) {
    const bool touches = e.source == child || e.target == child;
    if (!touches) continue;
    if (e.colour == StageColour::Wiggly) {
      ++wiggly;
      strokes += e.strokes;
    } else if (e.is_resolvent()) {
      const int legs = (e.source == child) + (e.target == child);
      for (int l = 0; l < legs; ++l)
        if (resolvent + l < 2) colours[resolvent + l] = e.colour;
      resolvent += legs;
    }
  }
  return wiggly == 1 && strokes == 0 && resolvent == 2 && colours[0] == colours[1];
}

}  // namespace

ResolutionCase resolution_case(const ExpansionGraph& upsilon, int marked_vertex) {
  if (has_summation_wiggly(upsilon, marked_vertex))
    return ResolutionCase::DirectBundle;
  for (int child : upsilon.fresh_children(marked_vertex))
    for (const StageEdge& e : upsilon.edges)
      if (e.colour == StageColour::Wiggly && e.strokes > 0 &&
          ((e.source == marked_vertex && e.target == child) ||
           (e.source == child && e.target == marked_vertex)))
        return ResolutionCase::HigherLump;
  return ResolutionCase::ChainChild;
}

GraphExponents bound_from_graph(const ExpansionGraph& upsilon,
                                const ExpansionGraph& gamma,
                                const MarkedSet& marked,
                                const ExponentContext& context) {
  const int sigma = sigma_of(upsilon);
  GraphExponents out;
  out.psi_exp = static_cast<int>(gamma.edges.size()) - sigma;

  int parent_child_strokes = 0;
  for (const StageEdge& e : upsilon.edges) {
    if (e.colour != StageColour::Wiggly) continue;
    const bool between_summation =
        upsilon.vertices[e.source].kind == StageVertexKind::Summation &&
        upsilon.vertices[e.target].kind == StageVertexKind::Summation;
    if (!between_summation) parent_child_strokes += e.strokes;
  }
  out.m_exp2 = parent_child_strokes + sigma;

  for (int v : marked.marked) {
    const ResolutionCase c = resolution_case(upsilon, v);
    if (c == ResolutionCase::ChainChild || c == ResolutionCase::HigherLump)
      ++out.phi_exp;
  }

  // Power counting against Psi^{p(deg+|F|)} Phi^{p|V_c|}: substitute
  // M^{-1/2} -> Psi Phi and then use Psi <= Phi <= 1, which reduces to two
  // integer inequalities on the exponents.
  const int target_psi = context.p * (context.degree + context.q_count);
  const int target_phi = context.p * context.charged_count;
  const int total_psi = out.psi_exp + out.m_exp2;
  const int total_phi = out.phi_exp + out.m_exp2;
  out.dominated = total_psi >= target_psi &&
                  total_psi + total_phi >= target_psi + target_phi;
  return out;
}

StructureReport assert_structure(const ExpansionGraph& gamma,
                                 const AveragingSpec& spec,
                                 SymmetryClass symmetry) {
  StructureReport report;
  report.gamma_count = 1;

  const MarkedSet marked = classify_marked(gamma, spec);
  report.marked_total = static_cast<long>(marked.marked.size());

  ExponentContext context;
  context.p = gamma.p;
  context.degree = spec.graph.degree();
  context.q_count = static_cast<int>(spec.q_set.size());
  context.charged_count = classify(spec).num_charged();

  const auto record = [&](bool& flag, const std::string& what,
                          const ExpansionGraph& g) {
    flag = false;
    if (report.counterexamples.size() < 8)
      report.counterexamples.push_back(what + "\n" + dump_graph(g, spec.graph));
  };

  for (int v : marked.marked)
    if (gamma.solid_legs(v) == gamma.dashed_legs(v))
      record(report.marked_imbalance_ok, "marked vertex with balanced legs", gamma);

  const int lower = context.p * (context.degree + context.q_count) +
                    static_cast<int>(marked.charged.size()) -
                    static_cast<int>(marked.marked.size());
  if (static_cast<int>(gamma.edges.size()) < lower)
    record(report.edge_lower_bound_ok, "edge lower bound violated", gamma);

  for (const ExpansionGraph& theta : resolve_vertices(gamma)) {
    ++report.theta_count;
    if (static_cast<int>(gamma.edges.size()) !=
        theta.resolvent_edge_count() + sigma_of(theta))
      record(report.edge_conservation_ok, "edge conservation broken at resolution",
             theta);

    for (const ExpansionGraph& upsilon : lump(theta, symmetry)) {
      ++report.upsilon_count;
      if (static_cast<int>(gamma.edges.size()) !=
          upsilon.resolvent_edge_count() + sigma_of(upsilon))
        record(report.edge_conservation_ok, "edge conservation broken at lumping",
               upsilon);

      for (int v : marked.marked) {
        switch (resolution_case(upsilon, v)) {
          case ResolutionCase::ChainChild: {
            bool found = false;
            for (int child : upsilon.fresh_children(v))
              if (is_chain_child(upsilon, child)) found = true;
            if (!found)
              record(report.case_structure_ok, "marked vertex without chain child",
                     upsilon);
            break;
          }
          case ResolutionCase::HigherLump: {
            bool found = false;
            for (const StageEdge& e : upsilon.edges)
              if (e.colour == StageColour::Wiggly && e.strokes > 0 &&
                  (e.source == v || e.target == v) &&
                  (upsilon.vertices[e.source].kind == StageVertexKind::Fresh ||
                   upsilon.vertices[e.target].kind == StageVertexKind::Fresh))
                found = true;
            if (!found)
              record(report.case_structure_ok,
                     "higher lump without crossed wiggly edge", upsilon);
            break;
          }
          case ResolutionCase::DirectBundle: {
            if (!has_summation_wiggly(upsilon, v))
              record(report.case_structure_ok,
                     "direct bundle without joining wiggly edge", upsilon);
            break;
          }
        }
      }

      const GraphExponents exps = bound_from_graph(upsilon, gamma, marked, context);
      if (!exps.dominated)
        record(report.exponents_ok, "power-counting inequality violated", upsilon);
    }
  }
  return report;
}

PipelineReport run_expansion_pipeline(const AveragingSpec& spec, int p,
                                      SymmetryClass symmetry, int stop_edges,
                                      long max_graphs) {
  const ExpansionGraph power = power_graph(spec.graph, p);
  const int minimal = p * (spec.graph.degree() + static_cast<int>(spec.q_set.size()));
  ExpansionLimits limits;
  limits.stop_edges = stop_edges > 0 ? stop_edges : minimal;
  limits.max_graphs = max_graphs;

  const MaximalExpansionResult expanded =
      maximal_expansion(power, spec.q_set, limits);

  PipelineReport report;
  report.histories = expanded.histories;
  report.remainder_histories = expanded.remainder_histories;
  report.distinct_graphs = static_cast<long>(expanded.graphs.size());
  report.min_surviving_edges = expanded.min_surviving_edges;
  report.truncated = expanded.truncated;
  report.context.p = p;
  report.context.degree = spec.graph.degree();
  report.context.q_count = static_cast<int>(spec.q_set.size());
  report.context.charged_count = classify(spec).num_charged();

  for (const ExpansionGraph* gamma : expanded.surviving()) {
    ++report.surviving_graphs;
    const StructureReport sub = assert_structure(*gamma, spec, symmetry);
    report.structure.gamma_count += sub.gamma_count;
    report.structure.theta_count += sub.theta_count;
    report.structure.upsilon_count += sub.upsilon_count;
    report.structure.marked_total += sub.marked_total;
    report.structure.marked_imbalance_ok &= sub.marked_imbalance_ok;
    report.structure.edge_lower_bound_ok &= sub.edge_lower_bound_ok;
    report.structure.edge_conservation_ok &= sub.edge_conservation_ok;
    report.structure.case_structure_ok &= sub.case_structure_ok;
    report.structure.exponents_ok &= sub.exponents_ok;
    for (const std::string& c : sub.counterexamples)
      if (report.structure.counterexamples.size() < 8)
        report.structure.counterexamples.push_back(c);
  }
  return report;
}

std::string dump_graph(const ExpansionGraph& graph, const AdmissibleGraph& delta) {
  std::ostringstream out;
  const char* stage = "power";
  switch (graph.stage) {
    case ExpansionGraph::Stage::Power: stage = "power"; break;
    case ExpansionGraph::Stage::MaxExpanded: stage = "expanded"; break;
    case ExpansionGraph::Stage::Resolved: stage = "resolved"; break;
    case ExpansionGraph::Stage::Lumped: stage = "lumped"; break;
  }
  out << "graph stage=" << stage << " p=" << graph.p
      << " edges=" << graph.edges.size() << " multiplicity=" << graph.multiplicity;
  if (graph.stage == ExpansionGraph::Stage::MaxExpanded)
    out << " survives=" << (graph.survives ? 1 : 0)
        << " remainder=" << (graph.remainder ? 1 : 0);
  out << '\n';
  for (int v = 0; v < static_cast<int>(graph.vertices.size()); ++v) {
    const StageVertex& vert = graph.vertices[v];
    out << "v " << v << ' ';
    switch (vert.kind) {
      case StageVertexKind::Summation:
        out << "sum " << graph.label(v, delta) << " links=" << vert.link_count;
        break;
      case StageVertexKind::External:
        out << "ext " << graph.label(v, delta);
        break;
      case StageVertexKind::Fresh:
        out << "fresh parent=" << vert.parent;
        break;
    }
    out << '\n';
  }
  for (const StageEdge& e : graph.edges) {
    const char* colour = "solid";
    switch (e.colour) {
      case StageColour::Solid: colour = "solid"; break;
      case StageColour::Dashed: colour = "dashed"; break;
      case StageColour::Dotted: colour = "dotted"; break;
      case StageColour::Wiggly: colour = "wiggly"; break;
    }
    out << "e " << e.source << (e.colour == StageColour::Wiggly ? " -- " : " -> ")
        << e.target << ' ' << colour;
    if (e.strokes > 0) out << " strokes=" << e.strokes;
    out << '\n';
  }
  return out.str();
}

}  // namespace fluctavg
