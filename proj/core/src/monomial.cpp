#include "fluctavg/monomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

namespace fluctavg {

int AdmissibleGraph::vertex_degree(int v) const {
  int legs = 0;
  for (const MonomialEdge& e : edges) {
    if (e.source == v) ++legs;
    if (e.target == v) ++legs;
  }
  return legs;
}

int AdmissibleGraph::find_vertex(const std::string& name) const {
  for (int v = 0; v < num_vertices(); ++v)
    if (vertex_names[v] == name) return v;
  return -1;
}

bool AveragingSpec::in_q_set(int v) const {
  return std::find(q_set.begin(), q_set.end(), v) != q_set.end();
}

ParseError::ParseError(const std::string& message, std::size_t pos)
    : std::runtime_error(message + " (at offset " + std::to_string(pos) + ")"),
      position(pos) {}

namespace {

struct Token {
  enum class Kind { Id, Keyword, Punct, OneOverN, End };
  Kind kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    current_.pos = pos_;
    if (pos_ >= text_.size()) {
      current_ = {Token::Kind::End, "", pos_};
      return;
    }
    const char c = text_[pos_];
    if (c == '1') {
      if (text_.compare(pos_, 3, "1/N") == 0) {
        current_ = {Token::Kind::OneOverN, "1/N", pos_};
        pos_ += 3;
        return;
      }
      throw ParseError("expected '1/N'", pos_);
    }
    if (c == 'Q') {
      current_ = {Token::Kind::Keyword, "Q", pos_};
      ++pos_;
      return;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::size_t end = pos_ + 1;
      while (end < text_.size() &&
             (std::islower(static_cast<unsigned char>(text_[end])) ||
              std::isdigit(static_cast<unsigned char>(text_[end])) ||
              text_[end] == '_'))
        ++end;
      current_ = {Token::Kind::Id, text_.substr(pos_, end - pos_), pos_};
      pos_ = end;
      return;
    }
    if (std::string(";:,()*-").find(c) != std::string::npos) {
      current_ = {Token::Kind::Punct, std::string(1, c), pos_};
      ++pos_;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token current_{Token::Kind::End, "", 0};
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) {}

  AveragingSpec parse() {
    expect_id("sum");
    std::vector<Token> sum_ids = id_list();
    expect_punct(";");
    expect_id("ext");
    std::vector<Token> ext_ids = id_list();
    expect_punct(";");

    AveragingSpec spec;
    for (const Token& t : sum_ids) declare(spec.graph, t, /*summation=*/true);
    spec.graph.num_summation = static_cast<int>(spec.graph.vertex_names.size());
    for (const Token& t : ext_ids) declare(spec.graph, t, /*summation=*/false);

    expect_keyword("Q");
    expect_punct(":");
    if (lexer_.peek().kind == Token::Kind::Punct && lexer_.peek().text == "-") {
      lexer_.take();
    } else {
      for (const Token& t : id_list()) {
        const int v = spec.graph.find_vertex(t.text);
        if (v < 0 || !spec.graph.is_summation(v))
          throw ParseError("Q index '" + t.text + "' is not a summation index",
                           t.pos);
        if (std::find(spec.q_set.begin(), spec.q_set.end(), v) != spec.q_set.end())
          throw ParseError("duplicate Q index '" + t.text + "'", t.pos);
        spec.q_set.push_back(v);
      }
    }
    std::sort(spec.q_set.begin(), spec.q_set.end());
    expect_punct(";");

    expect_id("w");
    expect_punct(":");
    parse_weight(spec);
    expect_punct(";");

    while (lexer_.peek().kind != Token::Kind::End) parse_term(spec);
    if (spec.graph.edges.empty())
      throw ParseError("spec has no terms", lexer_.peek().pos);

    for (int v = 0; v < spec.graph.num_vertices(); ++v)
      if (spec.graph.vertex_degree(v) == 0)
        throw ParseError("declared index '" + spec.graph.name(v) +
                             "' is isolated; indices used only in the weight "
                             "need no declaration",
                         0);
    return spec;
  }

 private:
  void declare(AdmissibleGraph& graph, const Token& t, bool summation) {
    (void)summation;
    if (graph.find_vertex(t.text) >= 0)
      throw ParseError("duplicate index name '" + t.text + "'", t.pos);
    graph.vertex_names.push_back(t.text);
  }

  std::vector<Token> id_list() {
    std::vector<Token> ids;
    while (lexer_.peek().kind == Token::Kind::Id) ids.push_back(lexer_.take());
    return ids;
  }

  void expect_id(const std::string& word) {
    const Token t = lexer_.take();
    if (t.kind != Token::Kind::Id || t.text != word)
      throw ParseError("expected '" + word + "'", t.pos);
  }

  void expect_keyword(const std::string& word) {
    const Token t = lexer_.take();
    if (t.kind != Token::Kind::Keyword || t.text != word)
      throw ParseError("expected '" + word + "'", t.pos);
  }

  void expect_punct(const std::string& p) {
    const Token t = lexer_.take();
    if (t.kind != Token::Kind::Punct || t.text != p)
      throw ParseError("expected '" + p + "'", t.pos);
  }

  WeightRef weight_ref(AveragingSpec& spec, const Token& t) {
    for (std::size_t d = 0; d < spec.weight.dummies.size(); ++d)
      if (spec.weight.dummies[d] == t.text)
        return {WeightRef::Kind::Dummy, static_cast<int>(d)};
    const int v = spec.graph.find_vertex(t.text);
    if (v >= 0)
      return {spec.graph.is_summation(v) ? WeightRef::Kind::Summation
                                         : WeightRef::Kind::External,
              v};
    for (std::size_t f = 0; f < spec.weight.fixed_names.size(); ++f)
      if (spec.weight.fixed_names[f] == t.text)
        return {WeightRef::Kind::Fixed, static_cast<int>(f)};
    spec.weight.fixed_names.push_back(t.text);
    return {WeightRef::Kind::Fixed,
            static_cast<int>(spec.weight.fixed_names.size()) - 1};
  }

  void parse_weight(AveragingSpec& spec) {
    // Leading dummy sums: "sum d:" may nest.
    while (lexer_.peek().kind == Token::Kind::Id && lexer_.peek().text == "sum") {
      lexer_.take();
      const Token d = lexer_.take();
      if (d.kind != Token::Kind::Id)
        throw ParseError("expected dummy index name after 'sum'", d.pos);
      if (spec.graph.find_vertex(d.text) >= 0 ||
          std::find(spec.weight.dummies.begin(), spec.weight.dummies.end(),
                    d.text) != spec.weight.dummies.end())
        throw ParseError("duplicate dummy name '" + d.text + "'", d.pos);
      spec.weight.dummies.push_back(d.text);
      expect_punct(":");
    }
    while (true) {
      parse_factor(spec);
      if (lexer_.peek().kind == Token::Kind::Punct && lexer_.peek().text == "*") {
        lexer_.take();
        continue;
      }
      // Factors may also be juxtaposed without '*'.
      if (lexer_.peek().kind == Token::Kind::OneOverN ||
          (lexer_.peek().kind == Token::Kind::Id && lexer_.peek().text == "s"))
        continue;
      break;
    }
  }

  void parse_factor(AveragingSpec& spec) {
    const Token t = lexer_.take();
    if (t.kind == Token::Kind::OneOverN) {
      WeightFactor f;
      f.kind = WeightFactor::Kind::OneOverN;
      spec.weight.factors.push_back(f);
      return;
    }
    if (t.kind == Token::Kind::Id && t.text == "s") {
      expect_punct("(");
      const Token x = lexer_.take();
      if (x.kind != Token::Kind::Id) throw ParseError("expected index name", x.pos);
      expect_punct(",");
      const Token y = lexer_.take();
      if (y.kind != Token::Kind::Id) throw ParseError("expected index name", y.pos);
      expect_punct(")");
      WeightFactor f;
      f.kind = WeightFactor::Kind::SEntry;
      f.x = weight_ref(spec, x);
      f.y = weight_ref(spec, y);
      spec.weight.factors.push_back(f);
      return;
    }
    throw ParseError("malformed weight factor", t.pos);
  }

  void parse_term(AveragingSpec& spec) {
    const Token head = lexer_.take();
    if (head.kind != Token::Kind::Id || (head.text != "g" && head.text != "ginv"))
      throw ParseError("expected term 'g', 'g*' or 'ginv'", head.pos);
    MonomialEdge edge;
    edge.inverse_diagonal = head.text == "ginv";
    if (!edge.inverse_diagonal && lexer_.peek().kind == Token::Kind::Punct &&
        lexer_.peek().text == "*") {
      lexer_.take();
      edge.colour = EdgeColour::Dashed;
    }
    expect_punct("(");
    const Token x = lexer_.take();
    if (x.kind != Token::Kind::Id) throw ParseError("expected index name", x.pos);
    expect_punct(",");
    const Token y = lexer_.take();
    if (y.kind != Token::Kind::Id) throw ParseError("expected index name", y.pos);
    expect_punct(")");

    edge.source = spec.graph.find_vertex(x.text);
    if (edge.source < 0)
      throw ParseError("unknown index '" + x.text + "' in a term", x.pos);
    edge.target = spec.graph.find_vertex(y.text);
    if (edge.target < 0)
      throw ParseError("unknown index '" + y.text + "' in a term", y.pos);
    if (!spec.graph.is_summation(edge.source) &&
        !spec.graph.is_summation(edge.target))
      throw ParseError("term joins two external indices", head.pos);
    if (edge.inverse_diagonal && edge.source != edge.target)
      throw ParseError("ginv requires equal indices", head.pos);
    spec.graph.edges.push_back(edge);
  }

  Lexer lexer_;
};

}  // namespace

AveragingSpec parse_monomial(const std::string& text) { return Parser(text).parse(); }

namespace {

std::string ref_name(const AveragingSpec& spec, const WeightRef& r) {
  switch (r.kind) {
    case WeightRef::Kind::Summation:
    case WeightRef::Kind::External:
      return spec.graph.name(r.index);
    case WeightRef::Kind::Dummy:
      return spec.weight.dummies[r.index];
    case WeightRef::Kind::Fixed:
      return spec.weight.fixed_names[r.index];
  }
  return "?";
}

}  // namespace

std::string print_monomial(const AveragingSpec& spec) {
  std::ostringstream out;
  out << "sum";
  for (int v = 0; v < spec.graph.num_summation; ++v)
    out << ' ' << spec.graph.name(v);
  out << "; ext";
  for (int v = spec.graph.num_summation; v < spec.graph.num_vertices(); ++v)
    out << ' ' << spec.graph.name(v);
  out << "; Q:";
  if (spec.q_set.empty()) {
    out << " -";
  } else {
    for (int v : spec.q_set) out << ' ' << spec.graph.name(v);
  }
  out << "; w: ";
  for (const std::string& d : spec.weight.dummies) out << "sum " << d << ": ";
  for (std::size_t k = 0; k < spec.weight.factors.size(); ++k) {
    if (k) out << " * ";
    const WeightFactor& f = spec.weight.factors[k];
    if (f.kind == WeightFactor::Kind::OneOverN)
      out << "1/N";
    else
      out << "s(" << ref_name(spec, f.x) << ',' << ref_name(spec, f.y) << ')';
  }
  out << ';';
  for (const MonomialEdge& e : spec.graph.edges) {
    out << ' ';
    if (e.inverse_diagonal)
      out << "ginv";
    else
      out << (e.colour == EdgeColour::Solid ? "g" : "g*");
    out << '(' << spec.graph.name(e.source) << ',' << spec.graph.name(e.target)
        << ')';
  }
  return out.str();
}

WeightEvaluator::WeightEvaluator(const WeightSpec& weight,
                                 const AdmissibleGraph& graph,
                                 const VarianceMatrix& s)
    : weight_(weight), s_(s), num_vertices_(graph.num_vertices()) {}

double WeightEvaluator::value(const std::vector<int>& vertex_values,
                              const std::vector<int>& fixed_values) const {
  if (static_cast<int>(vertex_values.size()) != num_vertices_)
    throw std::invalid_argument("weight: wrong vertex assignment size");
  if (fixed_values.size() != weight_.fixed_names.size())
    throw std::invalid_argument("weight: wrong fixed assignment size");

  const int n = s_.dim();
  std::vector<int> dummy_values(weight_.dummies.size(), 0);

  const std::function<double(std::size_t)> sum_dummies =
      [&](std::size_t level) -> double {
    if (level == weight_.dummies.size()) {
      double prod = 1.0;
      for (const WeightFactor& f : weight_.factors) {
        if (f.kind == WeightFactor::Kind::OneOverN) {
          prod /= n;
          continue;
        }
        const auto resolve = [&](const WeightRef& r) {
          switch (r.kind) {
            case WeightRef::Kind::Summation:
            case WeightRef::Kind::External:
              return vertex_values[r.index];
            case WeightRef::Kind::Dummy:
              return dummy_values[r.index];
            case WeightRef::Kind::Fixed:
              return fixed_values[r.index];
          }
          return 0;
        };
        prod *= s_.entries(resolve(f.x), resolve(f.y));
        if (prod == 0.0) return 0.0;
      }
      return prod;
    }
    double total = 0.0;
    for (int v = 0; v < n; ++v) {
      dummy_values[level] = v;
      total += sum_dummies(level + 1);
    }
    return total;
  };
  return sum_dummies(0);
}

namespace {

// Enumerates all partitions of {0..k-1} as block-assignment vectors in
// restricted-growth form.
void enumerate_partitions(int k, std::vector<std::vector<int>>& out) {
  std::vector<int> assign(k, 0);
  const std::function<void(int, int)> rec = [&](int pos, int max_block) {
    if (pos == k) {
      out.push_back(assign);
      return;
    }
    for (int b = 0; b <= max_block; ++b) {
      assign[pos] = b;
      rec(pos + 1, std::max(max_block, b + 1));
    }
  };
  if (k == 0)
    out.push_back({});
  else
    rec(0, 0);
}

}  // namespace

bool weight_partition_inequality_holds(const AveragingSpec& spec,
                                       const VarianceMatrix& s,
                                       const std::vector<int>& external_values,
                                       const std::vector<int>& fixed_values,
                                       double slack) {
  const AdmissibleGraph& graph = spec.graph;
  const int ns = graph.num_summation;
  const int n = s.dim();
  const double m_scale = s.inv_max_entry;
  WeightEvaluator eval(spec.weight, graph, s);

  std::vector<int> values(graph.num_vertices(), 0);
  for (int v = ns; v < graph.num_vertices(); ++v)
    values[v] = external_values[v - ns];

  // Split V_s = I ⊔ J by bitmask; enumerate partitions of J; check the bound.
  for (int mask = 0; mask < (1 << ns); ++mask) {
    std::vector<int> j_set;
    std::vector<int> i_set;
    for (int v = 0; v < ns; ++v)
      ((mask >> v) & 1) ? j_set.push_back(v) : i_set.push_back(v);

    std::vector<std::vector<int>> partitions;
    enumerate_partitions(static_cast<int>(j_set.size()), partitions);

    for (const std::vector<int>& part : partitions) {
      const int blocks =
          part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;
      const double bound =
          std::pow(m_scale, static_cast<double>(blocks - ns)) * (1.0 + slack);

      // max over frozen a_I of the constrained sum over a_J
      double worst = 0.0;
      std::vector<int> i_vals(i_set.size(), 0);
      const std::function<void(std::size_t)> loop_i = [&](std::size_t li) {
        if (li == i_set.size()) {
          double total = 0.0;
          std::vector<int> block_vals(blocks, 0);
          const std::function<void(int)> loop_blocks = [&](int b) {
            if (b == blocks) {
              for (std::size_t t = 0; t < j_set.size(); ++t)
                values[j_set[t]] = block_vals[part[t]];
              total += eval.value(values, fixed_values);
              return;
            }
            for (int v = 0; v < n; ++v) {
              bool fresh = true;
              for (int b2 = 0; b2 < b; ++b2)
                if (block_vals[b2] == v) fresh = false;
              if (!fresh) continue;  // blocks carry distinct values
              block_vals[b] = v;
              loop_blocks(b + 1);
            }
          };
          loop_blocks(0);
          worst = std::max(worst, total);
          return;
        }
        for (int v = 0; v < n; ++v) {
          i_vals[li] = v;
          values[i_set[li]] = v;
          loop_i(li + 1);
        }
      };
      loop_i(0);
      if (worst > bound) return false;
    }
  }
  return true;
}

}  // namespace fluctavg
