// Recursively condenses motifs on a synthetic network with 20 planted
// feed-forward loops over a random acyclic background, then prints what each
// round removed and how the condensed shapes score on relative loss.

#include <iostream>

#include "motifcloss/motifcloss.hpp"
#include "motifcloss/reference_systems.hpp"

int main() {
  using namespace motifcloss;

  Digraph g = planted_ffl_network();
  std::cout << "Planted network: " << g.node_count() << " nodes, " << g.edge_count()
            << " edges (20 feed-forward loops on a triangle-free background)\n\n";

  CondenseOptions opt;
  opt.sizes = {3};
  opt.significance.ensemble_size = 400;
  opt.significance.seed = 11;
  CondensationTrace trace = condense_motifs(g, opt);

  ClossOptions loss_opt;
  loss_opt.samples = 10000;
  loss_opt.seed = 1;
  std::vector<ClossTable> tables = {closs_table(3, MeasureKind::spectral(), loss_opt)};
  auto histograms = closs_histogram(trace, tables);

  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const CondensationRound& round = trace.rounds[i];
    std::cout << "Round " << round.round << ": " << round.nodes_before << " -> "
              << round.nodes_after << " nodes, " << round.condensed.size()
              << " occurrences condensed";
    if (!round.condensed.empty())
      std::cout << " (class " << round.condensed.front().cls.id_hex() << ")";
    std::cout << "\n  relative-loss histogram [0,.2,.4,.6,.8,1]: ";
    for (long long b : histograms[i].bins) std::cout << b << " ";
    std::cout << "| undefined " << histograms[i].undefined << "\n";
  }

  std::cout << "\nTerminal graph: " << trace.terminal.node_count() << " nodes, "
            << trace.terminal.edge_count() << " edges, " << trace.total_mapping().size()
            << " original nodes mapped into supernodes.\n"
            << "The first round removes exactly the 20 planted loops (relative loss 0);\n"
            << "later rounds may condense chain-like shapes whose loss is undefined in\n"
            << "their density class.\n";
  return 0;
}
