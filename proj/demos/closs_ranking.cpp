// Ranks every connected 3-node class by mean contraction loss under the
// spectral measure and prints the table with relative loss and catalog ids.
// Acyclic shapes (the classic motifs among them) land at zero; feedback-heavy
// shapes spend the most contraction.

#include <iomanip>
#include <iostream>

#include "motifcloss/motifcloss.hpp"

int main() {
  using namespace motifcloss;

  ClossOptions opt;
  opt.samples = 20000;
  opt.seed = 1;
  ClossTable table = closs_table(3, MeasureKind::spectral(), opt);

  std::cout << "Mean contraction loss of connected 3-node classes\n"
            << "(spectral measure, weights uniform in (0, 1], " << opt.samples
            << " samples per class)\n\n";
  std::cout << std::left << std::setw(9) << "class" << std::setw(7) << "edges" << std::setw(12)
            << "mean" << std::setw(12) << "std" << std::setw(12) << "relative" << "catalog\n";
  for (std::size_t i = 0; i < table.stats.size(); ++i) {
    const ClossStats& st = table.stats[i];
    const RelativeCloss& rel = table.relative[i];
    std::cout << std::left << std::setw(9) << st.cls.id_hex() << std::setw(7)
              << st.cls.edge_count << std::setw(12) << std::setprecision(4) << std::fixed
              << st.mean << std::setw(12) << st.stddev << std::setw(12)
              << (rel.r ? std::to_string(*rel.r).substr(0, 6) : "undef")
              << st.cls.motif_id.value_or("-") << "\n";
  }

  std::cout << "\nWithin each density class (same edge count), the acyclic shapes rank\n"
               "lowest: interconnection weights on a cycle-free pattern never erode the\n"
               "nodes' own contraction, so their loss is exactly zero.\n";
  return 0;
}
