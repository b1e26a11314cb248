#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "motifcloss/digraph.hpp"
#include "motifcloss/parallel.hpp"

namespace motifcloss {

// Off-diagonal adjacency bitmask encoding for digraphs on n <= 4 nodes:
// bit pair_bit(n, i, j) is set when the edge i -> j exists.  Row-major with
// the diagonal excluded, so n=3 uses 6 bits and n=4 uses 12.
inline int pair_bit(int n, int i, int j) {
  return i * (n - 1) + (j - (j > i ? 1 : 0));
}

inline int pattern_bit_count(int n) { return n * (n - 1); }

inline bool pattern_has_edge(std::uint16_t bits, int n, int i, int j) {
  return (bits >> pair_bit(n, i, j)) & 1u;
}

inline std::uint16_t permute_pattern(std::uint16_t bits, int n, const std::vector<int>& perm) {
  std::uint16_t out = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && pattern_has_edge(bits, n, i, j))
        out |= static_cast<std::uint16_t>(1u << pair_bit(n, perm[static_cast<std::size_t>(i)],
                                                         perm[static_cast<std::size_t>(j)]));
  return out;
}

inline bool pattern_weakly_connected(std::uint16_t bits, int n) {
  unsigned seen = 1u;  // start from node 0
  for (int pass = 0; pass < n; ++pass)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && pattern_has_edge(bits, n, i, j) &&
            ((seen >> i) & 1u) != ((seen >> j) & 1u))
          seen |= (1u << i) | (1u << j);
  return seen == (1u << n) - 1u;
}

namespace detail {

inline std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

struct CanonTable {
  std::vector<std::uint16_t> canon;  // minimum mask over all node permutations
  std::vector<std::uint8_t> connected;
};

inline const CanonTable& canon_table(int n) {
  if (n != 3 && n != 4) throw std::invalid_argument("subgraph size must be 3 or 4");
  static const CanonTable tables[2] = {
      [] {
        CanonTable t;
        auto perms = all_permutations(3);
        t.canon.resize(1u << 6);
        t.connected.resize(1u << 6);
        for (std::uint32_t m = 0; m < (1u << 6); ++m) {
          std::uint16_t best = static_cast<std::uint16_t>(m);
          for (const auto& p : perms)
            best = std::min(best, permute_pattern(static_cast<std::uint16_t>(m), 3, p));
          t.canon[m] = best;
          t.connected[m] = pattern_weakly_connected(static_cast<std::uint16_t>(m), 3);
        }
        return t;
      }(),
      [] {
        CanonTable t;
        auto perms = all_permutations(4);
        t.canon.resize(1u << 12);
        t.connected.resize(1u << 12);
        for (std::uint32_t m = 0; m < (1u << 12); ++m) {
          std::uint16_t best = static_cast<std::uint16_t>(m);
          for (const auto& p : perms)
            best = std::min(best, permute_pattern(static_cast<std::uint16_t>(m), 4, p));
          t.canon[m] = best;
          t.connected[m] = pattern_weakly_connected(static_cast<std::uint16_t>(m), 4);
        }
        return t;
      }()};
  return tables[n - 3];
}

}  // namespace detail

inline int popcount16(std::uint16_t bits) { return __builtin_popcount(bits); }

std::optional<std::string> motif_id_for(int n, std::uint16_t canon_bits);  // below

// Isomorphism class of a connected (or not) digraph on n nodes, keyed by the
// minimal adjacency bitmask over all node permutations.
struct SubgraphClass {
  int n = 0;
  std::uint16_t canon_bits = 0;
  int edge_count = 0;
  std::optional<std::string> motif_id;

  std::pair<int, int> density_class() const { return {n, edge_count}; }

  std::string id_hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, n == 3 ? "%02x" : "%03x", canon_bits);
    return buf;
  }

  bool operator==(const SubgraphClass& other) const {
    return n == other.n && canon_bits == other.canon_bits;
  }
  bool operator<(const SubgraphClass& other) const {
    if (n != other.n) return n < other.n;
    if (edge_count != other.edge_count) return edge_count < other.edge_count;
    return canon_bits < other.canon_bits;
  }
};

// Canonical class of an arbitrary bitmask (minimum over permutations), with
// density class and motif-catalog tag attached.
inline SubgraphClass canonical_form(std::uint16_t bits, int n) {
  const auto& table = detail::canon_table(n);
  if (bits >= table.canon.size()) throw std::invalid_argument("canonical_form: bits out of range");
  SubgraphClass cls;
  cls.n = n;
  cls.canon_bits = table.canon[bits];
  cls.edge_count = popcount16(bits);
  cls.motif_id = motif_id_for(n, cls.canon_bits);
  return cls;
}

// All weakly connected isomorphism classes on n nodes, ordered by
// (edge count, canon_bits).  Cached after the first call.
inline const std::vector<SubgraphClass>& enumerate_classes(int n) {
  if (n != 3 && n != 4) throw std::invalid_argument("enumerate_classes: n must be 3 or 4");
  static const std::vector<SubgraphClass> cache[2] = {
      [] {
        std::vector<SubgraphClass> out;
        const auto& t = detail::canon_table(3);
        for (std::uint32_t m = 0; m < t.canon.size(); ++m)
          if (t.canon[m] == m && m != 0 && t.connected[m])
            out.push_back(canonical_form(static_cast<std::uint16_t>(m), 3));
        std::sort(out.begin(), out.end());
        return out;
      }(),
      [] {
        std::vector<SubgraphClass> out;
        const auto& t = detail::canon_table(4);
        for (std::uint32_t m = 0; m < t.canon.size(); ++m)
          if (t.canon[m] == m && m != 0 && t.connected[m])
            out.push_back(canonical_form(static_cast<std::uint16_t>(m), 4));
        std::sort(out.begin(), out.end());
        return out;
      }()};
  return cache[n - 3];
}

// Interconnection-convention pattern matrix of a class: entry (i, j) is 1
// when node j feeds node i, i.e. the matrix that multiplies the state in
// dx_i/dt = f_i(x_i) + sum_j A_ij x_j.  (Transpose of the edge direction.)
inline Eigen::MatrixXd pattern_matrix(std::uint16_t bits, int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && pattern_has_edge(bits, n, i, j)) a(j, i) = 1.0;
  return a;
}

inline std::uint16_t pattern_of(const Digraph& g) {
  const int n = g.node_count();
  if (n < 2 || n > 4) throw std::invalid_argument("pattern_of: graph must have 2..4 nodes");
  std::uint16_t bits = 0;
  for (const auto& [u, v] : g.edges())
    bits |= static_cast<std::uint16_t>(1u << pair_bit(n, u, v));
  return bits;
}

// Representative digraph of a class, nodes labeled v0..v{n-1}.
inline Digraph class_digraph(const SubgraphClass& cls) {
  Digraph g;
  for (int i = 0; i < cls.n; ++i) g.add_node("v" + std::to_string(i));
  for (int i = 0; i < cls.n; ++i)
    for (int j = 0; j < cls.n; ++j)
      if (i != j && pattern_has_edge(cls.canon_bits, cls.n, i, j)) g.add_edge(i, j);
  return g;
}

// ---------------------------------------------------------------------------
// Motif catalog: the distinct subgraph shapes of the classic motif table
// (gene regulation, neurons, food webs, electronic circuits, WWW).  IDs M10+
// are reserved; the remaining figure entries re-list these shapes per network
// family and add no new shape, so catalog v1 stops at M9.

struct MotifCatalogEntry {
  std::string id;
  int n;
  std::string name;
  std::uint16_t canon_bits;
};

inline const std::vector<MotifCatalogEntry>& motif_catalog() {
  static const std::vector<MotifCatalogEntry> entries = [] {
    struct Raw {
      const char* id;
      int n;
      const char* name;
      std::vector<std::pair<int, int>> edges;
    };
    const std::vector<Raw> raw = {
        {"M1", 3, "three chain", {{0, 1}, {1, 2}}},
        {"M2", 3, "feed-forward loop", {{0, 1}, {1, 2}, {0, 2}}},
        {"M3", 3, "three-node feedback loop", {{0, 1}, {1, 2}, {2, 0}}},
        {"M4", 4, "bi-fan", {{0, 2}, {0, 3}, {1, 2}, {1, 3}}},
        {"M5", 4, "bi-parallel", {{0, 1}, {0, 2}, {1, 3}, {2, 3}}},
        {"M6", 4, "four-node feedback loop", {{0, 1}, {1, 2}, {2, 3}, {3, 0}}},
        {"M7", 3, "uplinked mutual dyad", {{0, 1}, {1, 0}, {0, 2}, {1, 2}}},
        {"M8", 3, "feedback with two mutual dyads", {{0, 1}, {1, 0}, {1, 2}, {2, 1}}},
        {"M9", 3, "fully connected triad",
         {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}}},
    };
    std::vector<MotifCatalogEntry> out;
    for (const auto& r : raw) {
      std::uint16_t bits = 0;
      for (auto [i, j] : r.edges)
        bits |= static_cast<std::uint16_t>(1u << pair_bit(r.n, i, j));
      out.push_back({r.id, r.n, r.name, detail::canon_table(r.n).canon[bits]});
    }
    return out;
  }();
  return entries;
}

inline std::optional<std::string> motif_id_for(int n, std::uint16_t canon_bits) {
  for (const auto& e : motif_catalog())
    if (e.n == n && e.canon_bits == canon_bits) return e.id;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Census: count induced occurrences of every connected n-node class.

struct CensusOptions {
  std::size_t occurrence_cap = 1'000'000;  // per class, for uniqueness analysis
  int threads = 1;
};

struct ClassCount {
  SubgraphClass cls;
  std::int64_t count = 0;
  std::vector<std::vector<int>> occurrences;  // sorted node-id subsets
  bool occurrences_truncated = false;
};

struct CensusResult {
  int n = 0;
  std::int64_t total = 0;
  std::vector<ClassCount> classes;  // ordered by (edge count, canon_bits)

  const ClassCount* find(std::uint16_t canon_bits) const {
    for (const auto& c : classes)
      if (c.cls.canon_bits == canon_bits) return &c;
    return nullptr;
  }
};

namespace detail {

// Connected-subgraph enumeration with ordered extension: every connected
// induced n-subset is produced exactly once, rooted at its smallest node.
template <typename Emit>
void enumerate_connected_subsets(const std::vector<std::vector<int>>& weak_nbr, int n,
                                 int root, Emit&& emit) {
  std::vector<int> sub{root};
  std::vector<int> ext;
  for (int u : weak_nbr[static_cast<std::size_t>(root)])
    if (u > root) ext.push_back(u);

  auto adjacent = [&](int a, int b) {
    const auto& nb = weak_nbr[static_cast<std::size_t>(a)];
    return std::binary_search(nb.begin(), nb.end(), b);
  };

  // Recursive extension; depth is bounded by n <= 4.
  auto extend = [&](auto&& self, std::vector<int>& extension) -> void {
    if (static_cast<int>(sub.size()) == n) {
      emit(sub);
      return;
    }
    while (!extension.empty()) {
      int w = extension.back();
      extension.pop_back();
      std::vector<int> next = extension;
      for (int u : weak_nbr[static_cast<std::size_t>(w)]) {
        if (u <= root || u == w) continue;
        if (std::find(sub.begin(), sub.end(), u) != sub.end()) continue;
        bool seen_before = false;
        for (int s : sub)
          if (adjacent(u, s)) {
            seen_before = true;
            break;
          }
        if (seen_before) continue;  // u is reachable from the current subset already
        if (std::find(next.begin(), next.end(), u) != next.end()) continue;
        next.push_back(u);
      }
      sub.push_back(w);
      self(self, next);
      sub.pop_back();
    }
  };
  extend(extend, ext);
}

}  // namespace detail

// Counts every connected induced n-node subgraph of g once, canonicalizes it,
// and aggregates per class.  Parallel over root-node chunks; chunk results
// are folded in root order, so counts AND retained occurrence lists are
// independent of the thread count.
inline CensusResult census(const Digraph& g, int n, const CensusOptions& options = {}) {
  if (n != 3 && n != 4) throw std::invalid_argument("census: n must be 3 or 4");
  CensusResult result;
  result.n = n;
  if (g.node_count() < n) return result;

  std::vector<std::vector<int>> weak_nbr(static_cast<std::size_t>(g.node_count()));
  for (int u = 0; u < g.node_count(); ++u) {
    auto& nb = weak_nbr[static_cast<std::size_t>(u)];
    nb.insert(nb.end(), g.out_neighbors(u).begin(), g.out_neighbors(u).end());
    nb.insert(nb.end(), g.in_neighbors(u).begin(), g.in_neighbors(u).end());
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  struct ChunkResult {
    std::map<std::uint16_t, std::pair<std::int64_t, std::vector<std::vector<int>>>> per_class;
  };
  constexpr int kRootsPerChunk = 64;
  const std::size_t num_chunks =
      (static_cast<std::size_t>(g.node_count()) + kRootsPerChunk - 1) / kRootsPerChunk;
  std::vector<ChunkResult> chunks(num_chunks);

  parallel_chunks(num_chunks, resolve_threads(options.threads), [&](std::size_t c) {
    ChunkResult& local = chunks[c];
    int lo = static_cast<int>(c) * kRootsPerChunk;
    int hi = std::min(g.node_count(), lo + kRootsPerChunk);
    std::vector<int> sorted;
    for (int root = lo; root < hi; ++root) {
      detail::enumerate_connected_subsets(weak_nbr, n, root, [&](const std::vector<int>& sub) {
        sorted = sub;
        std::sort(sorted.begin(), sorted.end());
        std::uint16_t bits = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            if (a != b && g.has_edge(sorted[static_cast<std::size_t>(a)],
                                     sorted[static_cast<std::size_t>(b)]))
              bits |= static_cast<std::uint16_t>(1u << pair_bit(n, a, b));
        std::uint16_t canon = detail::canon_table(n).canon[bits];
        auto& slot = local.per_class[canon];
        ++slot.first;
        if (slot.second.size() < options.occurrence_cap) slot.second.push_back(sorted);
      });
    }
  });

  std::map<std::uint16_t, ClassCount> merged;
  for (auto& chunk : chunks)
    for (auto& [canon, slot] : chunk.per_class) {
      auto& out = merged[canon];
      out.count += slot.first;
      for (auto& occ : slot.second)
        if (out.occurrences.size() < options.occurrence_cap)
          out.occurrences.push_back(std::move(occ));
    }

  for (auto& [canon, cc] : merged) {
    cc.cls = canonical_form(canon, n);
    cc.occurrences_truncated = cc.count > static_cast<std::int64_t>(cc.occurrences.size());
    result.total += cc.count;
    result.classes.push_back(std::move(cc));
  }
  std::sort(result.classes.begin(), result.classes.end(),
            [](const ClassCount& a, const ClassCount& b) { return a.cls < b.cls; });
  return result;
}

}  // namespace motifcloss
