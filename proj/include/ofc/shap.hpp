#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ofc {

/// Any scoring function over dense feature vectors; models plug in via
/// a lambda so ensembles and raw callables are explained identically.
using ScoreFunction = std::function<double(std::span<const double>)>;

struct ShapConfig {
    std::size_t max_background = 100; // background subsample cap
    std::size_t coalition_budget = 2048; // sampled mode only (feature count > 12)
    std::uint64_t seed = 0;
};

/// One sample's explanation: base value plus one attribution per feature.
struct ShapExplanation {
    double phi0 = 0.0;
    std::vector<double> phi;
};

/// Mean |phi| per feature, overall and split by true class. Rows are
/// sorted descending by the overall column. Class columns are empty
/// (nullopt) when that class is absent from the explained set.
struct ShapAggregate {
    struct Row {
        std::string feature;
        double mean_abs_overall = 0.0;
        std::optional<double> mean_abs_pass;
        std::optional<double> mean_abs_fail;
    };
    std::vector<Row> rows;
    std::size_t n_samples = 0;
    std::size_t n_pass = 0;
    std::size_t n_fail = 0;
};

/// Shapley kernel weight (M-1) / (C(M,s) * s * (M-s)) for 0 < s < M.
double shapley_kernel_weight(std::size_t m, std::size_t s);

/// Deterministic subsample of at most max_rows rows (uniform without
/// replacement, order preserved).
std::vector<std::vector<double>> background_sample(const std::vector<std::vector<double>>& rows,
                                                   std::size_t max_rows, std::uint64_t seed);

/// kernelSHAP: masked predictions are background-replacement averages;
/// coalitions are enumerated exactly when the feature count is <= 12,
/// otherwise sampled to cfg.coalition_budget. The weighted least-squares
/// solve enforces phi0 + sum(phi) = f(x) with phi0 = mean background
/// score.
ShapExplanation explain(const ScoreFunction& f, std::span<const double> x,
                        const std::vector<std::vector<double>>& background,
                        const ShapConfig& cfg);

ShapAggregate aggregate_shap(const std::vector<ShapExplanation>& per_sample,
                             const std::vector<int>& true_labels,
                             const std::vector<std::string>& feature_names);

} // namespace ofc
