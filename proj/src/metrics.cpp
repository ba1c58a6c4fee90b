#include "ofc/metrics.hpp"

#include "ofc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ofc {

const std::optional<double>& metric_field(const MetricSet& set, int index) {
    switch (index) {
        case 0: return set.auc;
        case 1: return set.f1;
        case 2: return set.accuracy;
        case 3: return set.sensitivity;
        case 4: return set.specificity;
        default: return set.ppv;
    }
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw ValidationError("auc requires equal-length scores and labels");
    }
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += static_cast<std::size_t>(y != 0);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw UndefinedMetricError("auc is undefined when only one class is present");
    }

    // Rank-sum with midranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] != 0) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw ValidationError("confusion requires equal-length predictions and labels");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred_pos = predictions[i] != 0;
        const bool is_pos = labels[i] != 0;
        if (pred_pos && is_pos) ++c.tp;
        else if (pred_pos && !is_pos) ++c.fp;
        else if (!pred_pos && is_pos) ++c.fn;
        else ++c.tn;
    }
    return c;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

MetricSet derive_metrics(const ConfusionCounts& c) {
    MetricSet m;
    m.sensitivity = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.tn + c.fp);
    m.ppv = ratio(c.tp, c.tp + c.fp);
    m.accuracy = ratio(c.tp + c.tn, c.total());
    m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    return m;
}

MetricAggregate aggregate(const std::vector<MetricSet>& per_shuffle) {
    if (per_shuffle.empty()) throw ValidationError("aggregate requires a nonempty input");
    MetricAggregate agg;
    agg.per_shuffle = per_shuffle;
    for (int k = 0; k < 6; ++k) {
        std::vector<double> values;
        for (const auto& set : per_shuffle) {
            const auto& v = metric_field(set, k);
            if (v.has_value()) values.push_back(*v);
        }
        auto& entry = agg.entries[k];
        entry.used = static_cast<int>(values.size());
        entry.skipped = static_cast<int>(per_shuffle.size() - values.size());
        if (values.empty()) continue;
        const double mean =
            std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        entry.mean = mean;
        entry.stddev =
            values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    }
    return agg;
}

} // namespace ofc
