// Regenerates the committed reference files under data/:
//   planted_ffl.edges  -- 100-node network with 20 planted feed-forward loops
//                         on a triangle-free random background
//   ffl_ring.json      -- 9-node system: three feed-forward-loop modules in a
//                         ring, input format of the `verify` subcommand
//   motif_catalog.tsv  -- catalog id, size, canonical bitmask, name
//
// Usage: make_reference_data [output-dir]   (default: data)

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "motifcloss/motifcloss.hpp"
#include "motifcloss/reference_systems.hpp"

int main(int argc, char** argv) {
  using namespace motifcloss;
  try {
    std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(dir);

    write_text_file((dir / "planted_ffl.edges").string(),
                    to_edge_list(planted_ffl_network()));

    FflRingSystem ring = ffl_ring_system();
    DynamicalSystem sys;
    sys.name = "ffl_ring";
    sys.nodes = ring.nodes;
    sys.coupling = ring.coupling;
    sys.labels = ring.graph.labels();
    write_text_file((dir / "ffl_ring.json").string(), system_json(sys));

    std::ostringstream tsv;
    tsv << "# motif catalog v" << kMotifCatalogVersion
        << "\tbitmask bit k set = ordered pair k present, k = i*(n-1) + (j - (j>i))\n";
    tsv << "id\tn\tcanon_bits\tname\n";
    for (const auto& e : motif_catalog())
      tsv << e.id << "\t" << e.n << "\t" << e.canon_bits << "\t" << e.name << "\n";
    write_text_file((dir / "motif_catalog.tsv").string(), tsv.str());

    std::cout << "wrote " << dir.string() << "/{planted_ffl.edges, ffl_ring.json, motif_catalog.tsv}\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
