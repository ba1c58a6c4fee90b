#pragma once

#include "ofc/classifiers.hpp"
#include "ofc/metrics.hpp"
#include "ofc/mrmr.hpp"
#include "ofc/smote.hpp"
#include "ofc/split.hpp"
#include "ofc/tabular.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ofc {

/// Candidate distributions per classifier kind. Randomized kinds draw
/// `trials` candidates; the random forest walks its full grid.
struct SearchSpace {
    std::size_t trials = 20;
    double svm_c_lo = 1e-3, svm_c_hi = 1e2;
    double svm_gamma_lo = 1e-3, svm_gamma_hi = 1e2;
    double lucck_theta_lo = 1e-2, lucck_theta_hi = 1e3;
    double lucck_lambda_lo = 1e-2, lucck_lambda_hi = 1e4;
    std::vector<double> forest_trees = {20, 40, 80, 100, 160};
    std::vector<std::string> forest_criteria = {"gini", "infogain"};
    std::vector<double> forest_min_leaf = {1, 2, 5};
    std::vector<double> forest_mtry = {6, 12, 24};
    std::vector<std::string> forest_max_splits = {"n", "log2n"};

    void validate() const;
    std::vector<HyperMap> candidates(ClassifierKind kind, std::uint64_t seed) const;
};

struct SmoteSettings {
    bool enabled = true;
    int k_neighbors = 5;
};

/// Full experiment description, loadable from a JSON document.
struct PipelineConfig {
    std::string data_path;
    std::string schema_path;
    std::string output_dir;
    PartitionPlan partition; // folds >= 2 enforced here, seed comes from `seed`
    std::uint64_t seed = 0;
    std::vector<ClassifierKind> kinds = {ClassifierKind::NaiveBayes,
                                         ClassifierKind::LogisticRegression,
                                         ClassifierKind::Svm,
                                         ClassifierKind::RandomForest,
                                         ClassifierKind::Lucck};
    std::size_t feature_count = 0; // 0 selects k by the elbow heuristic
    int mi_bins = 10;
    SmoteSettings smote;
    SearchSpace search;
    std::size_t shap_background = 100;
    std::size_t shap_budget = 2048;
    int threads = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& doc);

    /// to_json without output_dir and threads, which change where and how
    /// fast results are produced but never what they are.
    nlohmann::json experiment_json() const;

    /// FNV-1a hash of experiment_json, used in provenance headers.
    std::uint64_t config_hash() const;
};

/// A fitted model bundled with the scaler its inputs pass through;
/// score/predict take raw (unstandardized) feature vectors.
struct PreparedModel {
    TrainedModel model;
    ScalerParams scaler;

    double score(std::span<const double> raw) const;
    int predict(std::span<const double> raw) const;

    nlohmann::json to_json() const;
    static PreparedModel from_json(const nlohmann::json& doc);
};

/// Exactly `folds` members, one per fold, sharing kind, hyperparameters,
/// and feature set.
struct EnsembleModel {
    std::vector<PreparedModel> members;

    nlohmann::json to_json() const;
    static EnsembleModel from_json(const nlohmann::json& doc);
};

/// label = mode of member labels, score = mean of member scores.
std::pair<int, double> ensemble_predict(const EnsembleModel& ensemble,
                                        std::span<const double> raw);

/// One fold after per-fold preprocessing: scaler fit on the train view,
/// train view standardized and SMOTE-enriched, validation rows held as
/// raw vectors.
struct FoldPrep {
    ScalerParams scaler;
    Table train;
    std::vector<std::vector<double>> validation_x; // raw values
    std::vector<int> validation_y;
};

std::vector<FoldPrep> prepare_folds(const Table& tagged, const Partition& partition,
                                    const std::vector<std::string>& features,
                                    const SmoteSettings& smote, std::uint64_t seed);

struct SearchOutcome {
    HyperMap best;
    double best_mean_auc = 0.0;
    std::size_t best_trial = 0;
    std::size_t candidates_tried = 0;
};

/// Trains every candidate on each fold's train view, averages validation
/// AUC across folds, and returns the argmax candidate (ties keep the
/// first sampled). Throws when every candidate fails, listing causes.
SearchOutcome search_hyperparameters(ClassifierKind kind, const SearchSpace& space,
                                     const std::vector<FoldPrep>& folds,
                                     const std::vector<std::string>& features,
                                     std::uint64_t seed);

/// Single model fit on all train/validation rows (standardized on those
/// rows, then SMOTE-enriched).
PreparedModel build_cv_model(ClassifierKind kind, const HyperMap& best, const Table& tagged,
                             const Partition& partition,
                             const std::vector<std::string>& features,
                             const SmoteSettings& smote, std::uint64_t seed);

/// One member per prepared fold, all sharing kind and hyperparameters.
EnsembleModel build_ensemble(ClassifierKind kind, const HyperMap& best,
                             const std::vector<FoldPrep>& folds,
                             const std::vector<std::string>& features, std::uint64_t seed);

struct ShuffleRecord {
    int shuffle = 0;
    bool failed = false;
    std::string error;
    FeatureRanking ranking;
    std::vector<std::string> selected_features;
    int k_selected = 0;
    std::string partition_manifest;
    std::map<std::string, HyperMap> chosen_hyperparameters; // by kind name
    std::map<std::string, MetricSet> cv_metrics;            // by kind name
    std::map<std::string, MetricSet> ensemble_metrics;      // by kind name
};

struct ExperimentResult {
    std::vector<ShuffleRecord> shuffles;
    std::map<std::string, MetricAggregate> cv_aggregate;       // by kind name
    std::map<std::string, MetricAggregate> ensemble_aggregate; // by kind name

    nlohmann::json to_json() const;
};

/// Full orchestration: per shuffle partition -> mRMR on the
/// feature-selection set -> top-k features -> per kind search, cv model,
/// ensemble -> evaluation on the untouched test set; aggregated across
/// shuffles. Model artifacts and manifests are written under
/// cfg.output_dir when set. Fails when more than half the shuffles fail.
ExperimentResult run_experiment(const Table& table, const PipelineConfig& cfg);

/// Runs fn(0..n-1) on up to `threads` workers; results and side effects
/// keyed by index so any thread count reproduces serial output.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace ofc
