#pragma once

#include "ofc/tabular.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ofc {

struct PartitionPlan {
    double feature_selection_fraction = 0.2;
    double test_fraction = 0.2;
    int folds = 3;
    int shuffles = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Row-level assignment for one shuffle. Patient-wise: every row of a
/// patient lands in the same top-level set and, within train/validation,
/// the same fold.
struct Partition {
    std::vector<std::size_t> feature_selection_rows;
    std::vector<std::size_t> test_rows;
    std::vector<std::int32_t> fold_of_row; // per table row; -1 outside train/validation
    int folds = 0;

    std::vector<std::size_t> trainval_rows() const;
    std::vector<std::size_t> fold_rows(int fold) const;

    /// Plain-text audit manifest: one "row_id  set  fold" line per row.
    std::string manifest(const Table& table) const;
};

/// Deterministic function of (plan.seed, shuffle_index, table): patient
/// groups are shuffled, then greedily assigned (largest group first) to
/// the set with the largest remaining row deficit.
Partition make_partition(const Table& table, const PartitionPlan& plan, int shuffle_index);

/// Copy of the table with every row's SetTag stamped from the partition.
Table with_set_tags(const Table& table, const Partition& partition);

/// (train, validation) views of one fold: validation = that fold's rows,
/// train = every other train/validation row. Original row order.
std::pair<Table, Table> fold_views(const Table& table, const Partition& partition, int fold);

} // namespace ofc
