#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "motifcloss/rng.hpp"

namespace motifcloss {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("edge list line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Simple directed graph with opaque string node labels.  No self-loops, no
// duplicate edges; weights, when present, cover exactly the edge set and are
// strictly positive.  Instances are treated as immutable values once built.
class Digraph {
 public:
  Digraph() = default;

  int add_node(const std::string& label) {
    auto it = index_.find(label);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(labels_.size());
    labels_.push_back(label);
    index_.emplace(label, id);
    out_.emplace_back();
    in_.emplace_back();
    return id;
  }

  void add_edge(int u, int v) {
    if (u < 0 || v < 0 || u >= node_count() || v >= node_count())
      throw std::invalid_argument("add_edge: node index out of range");
    if (u == v) throw std::invalid_argument("add_edge: self-loop");
    if (has_edge(u, v)) throw std::invalid_argument("add_edge: duplicate edge");
    if (!weights_.empty())
      throw std::invalid_argument("add_edge: weighted graph needs explicit weight");
    insert_edge(u, v);
  }

  void add_edge(int u, int v, double w) {
    if (u < 0 || v < 0 || u >= node_count() || v >= node_count())
      throw std::invalid_argument("add_edge: node index out of range");
    if (u == v) throw std::invalid_argument("add_edge: self-loop");
    if (has_edge(u, v)) throw std::invalid_argument("add_edge: duplicate edge");
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("add_edge: weight must be positive and finite");
    if (edge_count_ > 0 && weights_.empty())
      throw std::invalid_argument("add_edge: unweighted graph cannot take a weight");
    insert_edge(u, v);
    weights_[key(u, v)] = w;
  }

  void add_edge(const std::string& u, const std::string& v) {
    add_edge(add_node(u), add_node(v));
  }
  void add_edge(const std::string& u, const std::string& v, double w) {
    int a = add_node(u), b = add_node(v);
    add_edge(a, b, w);
  }

  int node_count() const { return static_cast<int>(labels_.size()); }
  std::int64_t edge_count() const { return edge_count_; }
  bool weighted() const { return !weights_.empty(); }

  const std::string& label(int id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<int> find_node(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool has_edge(int u, int v) const {
    const auto& o = out_[static_cast<std::size_t>(u)];
    return std::binary_search(o.begin(), o.end(), v);
  }

  double weight(int u, int v) const {
    if (!has_edge(u, v)) throw std::invalid_argument("weight: no such edge");
    if (weights_.empty()) return 1.0;
    return weights_.at(key(u, v));
  }

  // Sorted neighbour lists; iteration order is deterministic.
  const std::vector<int>& out_neighbors(int u) const { return out_[static_cast<std::size_t>(u)]; }
  const std::vector<int>& in_neighbors(int u) const { return in_[static_cast<std::size_t>(u)]; }

  // All edges as (source, target), sorted by (source, target) index.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    e.reserve(static_cast<std::size_t>(edge_count_));
    for (int u = 0; u < node_count(); ++u)
      for (int v : out_[static_cast<std::size_t>(u)]) e.emplace_back(u, v);
    return e;
  }

  bool mutual(int u, int v) const { return has_edge(u, v) && has_edge(v, u); }

  bool operator==(const Digraph& other) const {
    return labels_ == other.labels_ && out_ == other.out_ && weights_ == other.weights_;
  }

 private:
  static std::uint64_t key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  }

  void insert_edge(int u, int v) {
    auto& o = out_[static_cast<std::size_t>(u)];
    o.insert(std::lower_bound(o.begin(), o.end(), v), v);
    auto& i = in_[static_cast<std::size_t>(v)];
    i.insert(std::lower_bound(i.begin(), i.end(), u), u);
    ++edge_count_;
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> out_, in_;
  std::map<std::uint64_t, double> weights_;
  std::int64_t edge_count_ = 0;
};

// Per-node (in, out, mutual-partner) counts; the quantity degree-preserving
// randomization keeps fixed.
struct DegreeSignature {
  struct Node {
    int in = 0;
    int out = 0;
    int mutual = 0;
    bool operator==(const Node&) const = default;
  };
  std::vector<Node> per_node;

  bool operator==(const DegreeSignature&) const = default;

  static DegreeSignature of(const Digraph& g) {
    DegreeSignature s;
    s.per_node.resize(static_cast<std::size_t>(g.node_count()));
    for (int u = 0; u < g.node_count(); ++u) {
      auto& n = s.per_node[static_cast<std::size_t>(u)];
      n.out = static_cast<int>(g.out_neighbors(u).size());
      n.in = static_cast<int>(g.in_neighbors(u).size());
      for (int v : g.out_neighbors(u))
        if (g.has_edge(v, u)) ++n.mutual;
    }
    return s;
  }
};

struct LoadResult {
  Digraph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_collapsed = 0;
};

// Parses `source target [weight]` lines; `#` starts a comment, blank lines
// are skipped, CRLF accepted.  Self-loops are dropped and duplicate edges
// collapsed (first weight wins); both are counted for the caller to report.
// Malformed lines raise ParseError with a 1-based line number.
inline LoadResult load_edge_list(std::istream& in) {
  LoadResult result;
  struct Pending {
    std::string u, v;
    std::optional<double> w;
  };
  std::vector<Pending> pending;
  bool any_weight = false, any_bare = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ss(line);
    std::string u, v, w_tok, extra;
    ss >> u >> v;
    if (v.empty()) throw ParseError(line_no, "expected `source target [weight]`");
    Pending p{u, v, std::nullopt};
    if (ss >> w_tok) {
      if (ss >> extra) throw ParseError(line_no, "too many fields");
      char* end = nullptr;
      double w = std::strtod(w_tok.c_str(), &end);
      if (end != w_tok.c_str() + w_tok.size() || !std::isfinite(w))
        throw ParseError(line_no, "weight is not a number: `" + w_tok + "`");
      if (!(w > 0.0)) throw ParseError(line_no, "weight must be > 0");
      p.w = w;
      any_weight = true;
    } else {
      any_bare = true;
    }
    if (any_weight && any_bare)
      throw ParseError(line_no, "mix of weighted and unweighted edges");
    pending.push_back(std::move(p));
  }

  for (const auto& p : pending) {
    int u = result.graph.add_node(p.u);
    int v = result.graph.add_node(p.v);
    if (u == v) {
      ++result.self_loops_dropped;
      continue;
    }
    if (result.graph.has_edge(u, v)) {
      ++result.duplicates_collapsed;
      continue;
    }
    if (p.w)
      result.graph.add_edge(u, v, *p.w);
    else
      result.graph.add_edge(u, v);
  }
  return result;
}

inline LoadResult load_edge_list(const std::string& text) {
  std::istringstream ss(text);
  return load_edge_list(ss);
}

// Serializes back to the edge-list format, edges sorted lexicographically by
// (source label, target label).  Weight formatting is left to the caller via
// `format_weight` so report writers can keep one number style everywhere.
template <typename FormatWeight>
void write_edge_list(std::ostream& os, const Digraph& g, FormatWeight&& format_weight) {
  std::vector<std::pair<int, int>> e = g.edges();
  std::sort(e.begin(), e.end(), [&](const auto& a, const auto& b) {
    if (g.label(a.first) != g.label(b.first)) return g.label(a.first) < g.label(b.first);
    return g.label(a.second) < g.label(b.second);
  });
  for (const auto& [u, v] : e) {
    os << g.label(u) << ' ' << g.label(v);
    if (g.weighted()) os << ' ' << format_weight(g.weight(u, v));
    os << '\n';
  }
  // Isolated nodes have no line of their own; list them in a comment so the
  // node set round-trips for human readers even if the type does not need it.
  for (int u = 0; u < g.node_count(); ++u)
    if (g.out_neighbors(u).empty() && g.in_neighbors(u).empty())
      os << "# isolated: " << g.label(u) << '\n';
}

inline std::string to_edge_list(const Digraph& g) {
  std::ostringstream os;
  write_edge_list(os, g, [](double w) {
    std::ostringstream ws;
    ws.precision(17);
    ws << w;
    return ws.str();
  });
  return os.str();
}

// Subgraph on exactly `nodes` (in the given order) with all edges of g among
// them.  Unknown labels raise invalid_argument.
inline Digraph induced_subgraph(const Digraph& g, const std::vector<std::string>& nodes) {
  std::vector<int> ids;
  ids.reserve(nodes.size());
  std::unordered_set<int> seen;
  for (const auto& label : nodes) {
    auto id = g.find_node(label);
    if (!id) throw std::invalid_argument("induced_subgraph: unknown node `" + label + "`");
    if (!seen.insert(*id).second)
      throw std::invalid_argument("induced_subgraph: node repeated: `" + label + "`");
    ids.push_back(*id);
  }
  Digraph sub;
  for (int id : ids) sub.add_node(g.label(id));
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = 0; b < ids.size(); ++b) {
      if (a == b) continue;
      if (g.has_edge(ids[a], ids[b])) {
        if (g.weighted())
          sub.add_edge(static_cast<int>(a), static_cast<int>(b),
                       g.weight(ids[a], ids[b]));
        else
          sub.add_edge(static_cast<int>(a), static_cast<int>(b));
      }
    }
  return sub;
}

inline Digraph induced_subgraph(const Digraph& g, const std::vector<int>& ids) {
  std::vector<std::string> labels;
  labels.reserve(ids.size());
  for (int id : ids) labels.push_back(g.label(id));
  return induced_subgraph(g, labels);
}

struct RandomizeResult {
  Digraph graph;
  bool swappable = true;
  std::int64_t swaps_performed = 0;
};

// Degree-preserving shuffle: swap_factor * |E| attempted double-edge swaps,
// single (non-reciprocated) edges swapped only with single edges and mutual
// pairs only with mutual pairs, so every node keeps its exact
// (in, out, mutual) signature.  Weights are dropped: the shuffle is a
// topology-only null model.  Graphs with nothing to swap come back unchanged
// with swappable = false.
inline RandomizeResult randomize(const Digraph& g, std::uint64_t seed, int swap_factor = 100) {
  if (swap_factor <= 0) throw std::invalid_argument("randomize: swap_factor must be positive");
  const int n = g.node_count();

  std::vector<std::pair<int, int>> singles;        // u→v with no v→u
  std::vector<std::pair<int, int>> mutuals;        // u<v with both directions
  for (const auto& [u, v] : g.edges()) {
    if (g.has_edge(v, u)) {
      if (u < v) mutuals.emplace_back(u, v);
    } else {
      singles.emplace_back(u, v);
    }
  }

  auto ekey = [n](int u, int v) {
    return static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(v);
  };
  std::unordered_set<std::uint64_t> edge_set;
  edge_set.reserve(static_cast<std::size_t>(g.edge_count()) * 2);
  for (const auto& [u, v] : g.edges()) edge_set.insert(ekey(u, v));

  RandomizeResult result;
  const bool can_single = singles.size() >= 2;
  const bool can_mutual = mutuals.size() >= 2;
  if (!can_single && !can_mutual) {
    result.graph = g;
    result.swappable = false;
    return result;
  }

  RngStream rng = RngStream::derive(seed, rng_salt::kRandomize);
  const std::int64_t attempts = static_cast<std::int64_t>(swap_factor) * g.edge_count();
  const std::uint64_t total = static_cast<std::uint64_t>(g.edge_count());
  const std::uint64_t n_single_slots = static_cast<std::uint64_t>(singles.size());

  for (std::int64_t t = 0; t < attempts; ++t) {
    // Pick the category in proportion to its edge share, as in directed
    // switching: a draw below the single-edge count selects a single swap.
    bool single = rng.below(total) < n_single_slots;
    if (single && !can_single) continue;
    if (!single && !can_mutual) continue;

    if (single) {
      std::uint64_t i = rng.below(singles.size());
      std::uint64_t j = rng.below(singles.size() - 1);
      if (j >= i) ++j;
      auto [a, b] = singles[static_cast<std::size_t>(i)];
      auto [c, d] = singles[static_cast<std::size_t>(j)];
      // a→b, c→d  become  a→d, c→b.
      if (a == d || c == b) continue;
      if (edge_set.count(ekey(a, d)) || edge_set.count(ekey(c, b))) continue;
      // The new edges must stay non-reciprocated or mutual counts change.
      if (edge_set.count(ekey(d, a)) || edge_set.count(ekey(b, c))) continue;
      edge_set.erase(ekey(a, b));
      edge_set.erase(ekey(c, d));
      edge_set.insert(ekey(a, d));
      edge_set.insert(ekey(c, b));
      singles[static_cast<std::size_t>(i)] = {a, d};
      singles[static_cast<std::size_t>(j)] = {c, b};
      ++result.swaps_performed;
    } else {
      std::uint64_t i = rng.below(mutuals.size());
      std::uint64_t j = rng.below(mutuals.size() - 1);
      if (j >= i) ++j;
      auto [a, b] = mutuals[static_cast<std::size_t>(i)];
      auto [c, d] = mutuals[static_cast<std::size_t>(j)];
      // Pair {a,b} with {c,d} rewires to {a,c}/{b,d} or {a,d}/{b,c}.
      int p, q, r, s;
      if (rng.coin()) {
        p = a; q = c; r = b; s = d;
      } else {
        p = a; q = d; r = b; s = c;
      }
      if (p == q || r == s) continue;
      bool clash = false;
      for (auto [x, y] : {std::pair{p, q}, std::pair{q, p}, std::pair{r, s}, std::pair{s, r}}) {
        // The four removed arcs no longer block; anything else does.
        std::uint64_t k = ekey(x, y);
        bool removed = (x == a && y == b) || (x == b && y == a) ||
                       (x == c && y == d) || (x == d && y == c);
        if (!removed && edge_set.count(k)) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}, std::pair{c, d}, std::pair{d, c}})
        edge_set.erase(ekey(x, y));
      for (auto [x, y] : {std::pair{p, q}, std::pair{q, p}, std::pair{r, s}, std::pair{s, r}})
        edge_set.insert(ekey(x, y));
      mutuals[static_cast<std::size_t>(i)] = {std::min(p, q), std::max(p, q)};
      mutuals[static_cast<std::size_t>(j)] = {std::min(r, s), std::max(r, s)};
      ++result.swaps_performed;
    }
  }

  Digraph out;
  for (const auto& label : g.labels()) out.add_node(label);
  std::vector<std::uint64_t> keys(edge_set.begin(), edge_set.end());
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t k : keys)
    out.add_edge(static_cast<int>(k / static_cast<std::uint64_t>(n)),
                 static_cast<int>(k % static_cast<std::uint64_t>(n)));
  result.graph = std::move(out);
  return result;
}

}  // namespace motifcloss
