#pragma once

#include <string_view>

namespace motifcloss {

inline constexpr std::string_view kVersion = "0.1.0";

// Version of the shipped motif shape catalog (data/motif_catalog.tsv mirrors it).
inline constexpr int kMotifCatalogVersion = 1;

}  // namespace motifcloss
