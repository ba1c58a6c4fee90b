#pragma once

#include "ofc/tabular.hpp"

#include <cstdint>

namespace ofc {

struct SmoteConfig {
    int k_neighbors = 5;
    std::uint64_t seed = 0;
};

/// Appends synthetic minority rows x + u * (nn - x), u ~ U(0,1), until
/// both classes have equal counts. Distances are Euclidean over the
/// table's feature columns; neighbor ties break by row index. Original
/// rows come first and are unchanged; synthetic rows carry the
/// provenance flag in their RowMeta.
Table smote_enrich(const Table& train, const SmoteConfig& cfg);

} // namespace ofc
