#pragma once

#include "ofc/tabular.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ofc {

struct MiEstimate {
    double value = 0.0; // nats, >= 0
    int bins = 0;
};

/// Ordered (feature, selection score) pairs; first entry is the most
/// relevant feature, later entries carry the greedy mRMR score at their
/// selection step.
struct FeatureRanking {
    std::vector<std::pair<std::string, double>> ordered;
};

/// Equal-frequency discretization to at most `bins` levels. Variables
/// with <= bins distinct values keep one level per value, so binary and
/// categorical codes pass through unchanged. Assignment compares raw
/// values against order-statistic edges, making the result invariant
/// under strictly monotone transforms.
std::vector<int> equal_frequency_bins(std::span<const double> x, int bins);

/// Plug-in mutual information of the joint histogram after
/// discretization. Zero when either variable is constant.
MiEstimate mutual_information(std::span<const double> x, std::span<const double> y, int bins);

/// Greedy mRMR in the MID (difference) form: the first feature maximizes
/// MI with the outcome; each following feature maximizes
/// MI(f, y) - mean over selected s of MI(f, s). Ties break toward the
/// earlier candidate.
FeatureRanking mrmr_rank(const Table& table, const std::vector<std::string>& candidate_features,
                         int bins);

/// Kneedle-style elbow: the interior k with maximum perpendicular
/// distance from the chord joining the first and last curve points; ties
/// break toward smaller k.
int elbow_select(const std::vector<std::pair<int, double>>& performance_curve);

} // namespace ofc
