#include "ofc/split.hpp"

#include "ofc/error.hpp"
#include "ofc/rng.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace ofc {

void PartitionPlan::validate() const {
    if (feature_selection_fraction <= 0.0 || feature_selection_fraction >= 1.0) {
        throw ValidationError("feature_selection_fraction must lie in (0, 1)");
    }
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw ValidationError("test_fraction must lie in (0, 1)");
    }
    if (feature_selection_fraction + test_fraction >= 1.0) {
        throw ValidationError("feature_selection_fraction + test_fraction must be < 1");
    }
    if (folds < 1) throw ValidationError("folds must be >= 1");
    if (shuffles < 1) throw ValidationError("shuffles must be >= 1");
}

std::vector<std::size_t> Partition::trainval_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
        if (fold_of_row[r] >= 0) rows.push_back(r);
    }
    return rows;
}

std::vector<std::size_t> Partition::fold_rows(int fold) const {
    if (fold < 0 || fold >= folds) {
        throw ValidationError("unknown fold id " + std::to_string(fold));
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
        if (fold_of_row[r] == fold) rows.push_back(r);
    }
    return rows;
}

std::string Partition::manifest(const Table& table) const {
    std::vector<std::string> set_of(fold_of_row.size(), "train_val");
    for (std::size_t r : feature_selection_rows) set_of[r] = "feature_selection";
    for (std::size_t r : test_rows) set_of[r] = "test";
    std::ostringstream out;
    out << "row_id\tset\tfold\n";
    for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
        out << table.meta(r).row_id << "\t" << set_of[r] << "\t";
        if (fold_of_row[r] >= 0) out << fold_of_row[r];
        else out << "-";
        out << "\n";
    }
    return out.str();
}

namespace {

struct PatientGroup {
    std::string id;
    std::vector<std::size_t> rows;
};

enum TargetSet { kTrainVal = 0, kFeatureSelection = 1, kTest = 2 };

} // namespace

Partition make_partition(const Table& table, const PartitionPlan& plan, int shuffle_index) {
    plan.validate();
    if (shuffle_index < 0 || shuffle_index >= plan.shuffles) {
        throw ValidationError("shuffle_index out of range");
    }
    const std::size_t n = table.n_rows();
    if (n == 0) throw ValidationError("cannot partition an empty table");

    // Group rows by patient, keeping first-appearance order as the base.
    std::vector<PatientGroup> groups;
    std::map<std::string, std::size_t> group_of;
    for (std::size_t r = 0; r < n; ++r) {
        const std::string& pid = table.patient_id(r);
        auto [it, inserted] = group_of.emplace(pid, groups.size());
        if (inserted) groups.push_back({pid, {}});
        groups[it->second].rows.push_back(r);
    }

    // Per-shuffle stream derived from (seed, shuffle_index) so shuffles can
    // run in parallel yet match a serial run.
    rng::Stream stream(rng::SeedChain(plan.seed)
                           .mix("partition")
                           .mix(static_cast<std::uint64_t>(shuffle_index))
                           .value());
    stream.shuffle(groups);
    // Largest group first; shuffled order breaks size ties.
    std::stable_sort(groups.begin(), groups.end(),
                     [](const PatientGroup& a, const PatientGroup& b) {
                         return a.rows.size() > b.rows.size();
                     });

    const double nd = static_cast<double>(n);
    double deficit[3];
    deficit[kFeatureSelection] = plan.feature_selection_fraction * nd;
    deficit[kTest] = plan.test_fraction * nd;
    deficit[kTrainVal] = nd - deficit[kFeatureSelection] - deficit[kTest];
    const double target[3] = {deficit[kTrainVal], deficit[kFeatureSelection], deficit[kTest]};

    Partition partition;
    partition.folds = plan.folds;
    partition.fold_of_row.assign(n, -1);

    std::vector<const PatientGroup*> trainval_groups;
    for (const auto& group : groups) {
        // Emptiest target = the set missing the most rows; ties prefer the
        // larger target, then the fixed order train_val < fs < test.
        int best = kTrainVal;
        for (int s : {kFeatureSelection, kTest}) {
            if (deficit[s] > deficit[best] ||
                (deficit[s] == deficit[best] && target[s] > target[best])) {
                best = s;
            }
        }
        deficit[best] -= static_cast<double>(group.rows.size());
        switch (best) {
            case kFeatureSelection:
                for (std::size_t r : group.rows) partition.feature_selection_rows.push_back(r);
                break;
            case kTest:
                for (std::size_t r : group.rows) partition.test_rows.push_back(r);
                break;
            default:
                trainval_groups.push_back(&group);
        }
    }

    if (trainval_groups.size() < static_cast<std::size_t>(plan.folds)) {
        throw ValidationError("too few patients outside feature-selection/test sets to populate " +
                              std::to_string(plan.folds) + " folds (have " +
                              std::to_string(trainval_groups.size()) + ")");
    }

    // Same greedy fill for fold assignment, largest group into the
    // emptiest fold (fewest rows, ties to the lower fold id).
    std::vector<std::size_t> fold_sizes(static_cast<std::size_t>(plan.folds), 0);
    for (const PatientGroup* group : trainval_groups) {
        std::size_t best = 0;
        for (std::size_t f = 1; f < fold_sizes.size(); ++f) {
            if (fold_sizes[f] < fold_sizes[best]) best = f;
        }
        fold_sizes[best] += group->rows.size();
        for (std::size_t r : group->rows) {
            partition.fold_of_row[r] = static_cast<std::int32_t>(best);
        }
    }

    std::sort(partition.feature_selection_rows.begin(), partition.feature_selection_rows.end());
    std::sort(partition.test_rows.begin(), partition.test_rows.end());
    return partition;
}

Table with_set_tags(const Table& table, const Partition& partition) {
    if (partition.fold_of_row.size() != table.n_rows()) {
        throw ValidationError("partition does not match table row count");
    }
    std::vector<SetTag> tags(table.n_rows(), SetTag::TrainVal);
    for (std::size_t r : partition.feature_selection_rows) tags[r] = SetTag::FeatureSelection;
    for (std::size_t r : partition.test_rows) tags[r] = SetTag::Test;

    Table out(table.schema());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        RowMeta meta = table.meta(r);
        meta.set_tag = tags[r];
        out.append_row(table.row(r), meta);
    }
    return out;
}

std::pair<Table, Table> fold_views(const Table& table, const Partition& partition, int fold) {
    if (fold < 0 || fold >= partition.folds) {
        throw ValidationError("unknown fold id " + std::to_string(fold));
    }
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> validation_rows;
    for (std::size_t r = 0; r < partition.fold_of_row.size(); ++r) {
        if (partition.fold_of_row[r] < 0) continue;
        if (partition.fold_of_row[r] == fold) validation_rows.push_back(r);
        else train_rows.push_back(r);
    }
    // Degenerate single-fold partitions train and validate on the same
    // view, so a one-member ensemble coincides with the cv model.
    if (partition.folds == 1) train_rows = validation_rows;
    return {table.subset(train_rows), table.subset(validation_rows)};
}

} // namespace ofc
