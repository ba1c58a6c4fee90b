#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ofc {

/// Confusion counts with pass (1) as the positive class.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

/// One evaluation's metric values; nullopt marks a 0/0 denominator
/// (undefined), never silently 0.
struct MetricSet {
    std::optional<double> auc;
    std::optional<double> f1;
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> ppv;
};

inline constexpr const char* kMetricNames[6] = {"auc",         "f1",          "accuracy",
                                                "sensitivity", "specificity", "ppv"};

const std::optional<double>& metric_field(const MetricSet& set, int index);

/// Mean and sample std (n-1) per metric over shuffles, skipping
/// undefined values; skips are counted, not zero-filled.
struct MetricAggregate {
    struct Entry {
        double mean = 0.0;
        double stddev = 0.0;
        int used = 0;
        int skipped = 0;
    };
    Entry entries[6];
    std::vector<MetricSet> per_shuffle;

    const Entry& operator[](int index) const { return entries[index]; }
};

/// Probability a random positive outscores a random negative, ties
/// counted half (Mann-Whitney; equals trapezoidal ROC area). Throws
/// UndefinedMetricError when only one class is present.
double auc(std::span<const double> scores, std::span<const int> labels);

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels);

/// sensitivity = tp/(tp+fn), specificity = tn/(tn+fp), ppv = tp/(tp+fp),
/// accuracy = (tp+tn)/total, f1 = 2tp/(2tp+fp+fn) (the harmonic mean of
/// ppv and sensitivity wherever that is defined). AUC is left unset.
MetricSet derive_metrics(const ConfusionCounts& counts);

MetricAggregate aggregate(const std::vector<MetricSet>& per_shuffle);

} // namespace ofc
