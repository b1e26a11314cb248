#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "motifcloss/condensation.hpp"
#include "motifcloss/digraph.hpp"
#include "motifcloss/dynamics.hpp"
#include "motifcloss/rng.hpp"

namespace motifcloss {

// Synthetic benchmark with known motif structure: `copies` node-disjoint
// feed-forward loops next to an acyclic background (edges only from lower to
// higher node index, so the whole graph has no directed cycle and no mutual
// edge).  Background edges that would close a transitive triangle are
// rejected, so the planted loops are the only feed-forward occurrences and
// every count derived from them is exact.  Degree-preserving nulls destroy
// most of the planted loops, which makes the class strongly over-represented
// by construction.
inline Digraph planted_ffl_network(int copies = 20, int background_nodes = 40,
                                   int background_edges = 80, std::uint64_t seed = 7) {
  if (copies < 0 || background_nodes < 0 || background_edges < 0)
    throw std::invalid_argument("planted_ffl_network: negative sizes");
  const long max_edges =
      static_cast<long>(background_nodes) * (background_nodes - 1) / 2;
  if (background_edges > max_edges)
    throw std::invalid_argument("planted_ffl_network: too many background edges");

  Digraph g;
  for (int k = 0; k < copies; ++k) {
    std::string a = "f" + std::to_string(k) + "_a";
    std::string b = "f" + std::to_string(k) + "_b";
    std::string c = "f" + std::to_string(k) + "_c";
    g.add_edge(a, b);
    g.add_edge(b, c);
    g.add_edge(a, c);
  }

  std::vector<int> background;
  for (int i = 0; i < background_nodes; ++i)
    background.push_back(g.add_node("b" + std::to_string(i)));

  // Would u -> v complete a transitive triangle in any of its three roles?
  auto closes_triangle = [&](int u, int v) {
    for (int w : background) {
      if (w == u || w == v) continue;
      if (g.has_edge(u, w) && g.has_edge(w, v)) return true;  // u -> v as shortcut
      if (g.has_edge(v, w) && g.has_edge(u, w)) return true;  // u -> v as first leg
      if (g.has_edge(w, u) && g.has_edge(w, v)) return true;  // u -> v as second leg
    }
    return false;
  };

  RngStream rng = RngStream::derive(seed, rng_salt::kReference);
  int placed = 0;
  long attempts = 0;
  const long attempt_cap = 200L * std::max(1, background_edges) + 10000L;
  while (placed < background_edges) {
    if (++attempts > attempt_cap)
      throw std::runtime_error("planted_ffl_network: triangle-free background too dense");
    std::uint64_t i = rng.below(static_cast<std::uint64_t>(background_nodes));
    std::uint64_t j = rng.below(static_cast<std::uint64_t>(background_nodes));
    if (i == j) continue;
    int u = background[static_cast<std::size_t>(std::min(i, j))];
    int v = background[static_cast<std::size_t>(std::max(i, j))];
    if (g.has_edge(u, v) || closes_triangle(u, v)) continue;
    g.add_edge(u, v);
    ++placed;
  }
  return g;
}

// Three feed-forward modules in a closed ring: the worked example where the
// condensed matrix is exactly the 3-cycle adjacency.  Each module has nodes
// a -> b -> c with the shortcut a -> c, identity metric, and module rate
// (decay - |gain|) - 1 because the symmetric part of the unit feed-forward
// coupling has largest eigenvalue exactly 1.  Module j feeds node a of
// module j+1 from its node c with weight `link_weight`.
struct FflRingSystem {
  std::vector<ModuleSpec> modules;
  std::vector<std::vector<Eigen::MatrixXd>> blocks;
  std::vector<TestNode> nodes;  // node order: module 0 (a,b,c), module 1, module 2
  Eigen::MatrixXd coupling;     // 9x9 node-level coupling
  Digraph graph;
};

inline FflRingSystem ffl_ring_system(double decay = 2.5, double gain = 0.3,
                                     double link_weight = 1.0) {
  if (!(std::abs(gain) < decay))
    throw std::invalid_argument("ffl_ring_system: need |gain| < decay");

  Eigen::MatrixXd internal = Eigen::MatrixXd::Zero(3, 3);
  internal(1, 0) = internal(2, 0) = internal(2, 1) = 1.0;
  Eigen::MatrixXd input_map = Eigen::MatrixXd::Zero(3, 1);
  input_map(0, 0) = 1.0;  // inputs enter node a
  Eigen::MatrixXd output_map = Eigen::MatrixXd::Zero(1, 3);
  output_map(0, 2) = 1.0;  // node c is read as the output

  FflRingSystem sys;
  const double node_rate = decay - std::abs(gain);
  for (int j = 0; j < 3; ++j) {
    ModuleSpec m;
    m.name = "ffl" + std::to_string(j);
    m.node_rates = {node_rate, node_rate, node_rate};
    m.internal = internal;
    m.input_map = input_map;
    m.output_map = output_map;
    m.rate_measure = MeasureKind::two();
    sys.modules.push_back(std::move(m));
  }
  sys.blocks.assign(3, std::vector<Eigen::MatrixXd>(3));
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd link(1, 1);
    link << link_weight;
    sys.blocks[static_cast<std::size_t>((j + 1) % 3)][static_cast<std::size_t>(j)] = link;
  }
  sys.nodes.assign(9, TestNode{decay, gain});
  sys.coupling = full_coupling(sys.modules, sys.blocks);

  const char* part = "abc";
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      sys.graph.add_node(sys.modules[static_cast<std::size_t>(j)].name + "_" +
                         std::string(1, part[k]));
  for (Eigen::Index i = 0; i < 9; ++i)
    for (Eigen::Index j = 0; j < 9; ++j)
      if (sys.coupling(i, j) != 0.0)
        sys.graph.add_edge(static_cast<int>(j), static_cast<int>(i));
  return sys;
}

}  // namespace motifcloss
