#include "ofc/pipeline.hpp"

#include "ofc/error.hpp"
#include "ofc/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

namespace ofc {

namespace {

void check_keys(const nlohmann::json& doc, std::initializer_list<const char*> known,
                const char* where) {
    for (const auto& [key, value] : doc.items()) {
        if (std::find_if(known.begin(), known.end(),
                         [&key](const char* k) { return key == k; }) == known.end()) {
            throw ValidationError(std::string("unknown ") + where + " key '" + key + "'");
        }
    }
}

void check_positive_range(double lo, double hi, const char* name) {
    if (lo <= 0.0 || hi < lo) {
        throw ValidationError(std::string(name) + " bounds must satisfy 0 < lo <= hi");
    }
}

std::pair<double, double> read_range(const nlohmann::json& doc, const char* key, double lo,
                                     double hi) {
    if (!doc.contains(key)) return {lo, hi};
    const auto& v = doc.at(key);
    if (!v.is_array() || v.size() != 2) {
        throw ValidationError(std::string("search range '") + key + "' must be [lo, hi]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

} // namespace

void SearchSpace::validate() const {
    if (trials < 1) throw ValidationError("search trials must be >= 1");
    check_positive_range(svm_c_lo, svm_c_hi, "svm C");
    check_positive_range(svm_gamma_lo, svm_gamma_hi, "svm gamma");
    check_positive_range(lucck_theta_lo, lucck_theta_hi, "lucck theta");
    check_positive_range(lucck_lambda_lo, lucck_lambda_hi, "lucck lambda");
    if (forest_trees.empty() || forest_criteria.empty() || forest_min_leaf.empty() ||
        forest_mtry.empty() || forest_max_splits.empty()) {
        throw ValidationError("random forest grid axes must be nonempty");
    }
}

void PipelineConfig::validate() const {
    partition.validate();
    if (partition.folds < 2) {
        throw ValidationError("pipeline requires folds >= 2 (cross-validation)");
    }
    if (kinds.empty()) throw ValidationError("at least one model kind required");
    std::set<ClassifierKind> seen;
    for (ClassifierKind kind : kinds) {
        if (!seen.insert(kind).second) {
            throw ValidationError("duplicate model kind '" + std::string(to_string(kind)) + "'");
        }
    }
    if (mi_bins < 2) throw ValidationError("mi_bins must be >= 2");
    if (smote.k_neighbors < 1) throw ValidationError("smote k_neighbors must be >= 1");
    if (shap_background < 1) throw ValidationError("shap background must be >= 1");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    search.validate();
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json kinds_json = nlohmann::json::array();
    for (ClassifierKind kind : kinds) kinds_json.push_back(std::string(to_string(kind)));
    return {{"data", data_path},
            {"schema", schema_path},
            {"output_dir", output_dir},
            {"seed", seed},
            {"partition",
             {{"feature_selection_fraction", partition.feature_selection_fraction},
              {"test_fraction", partition.test_fraction},
              {"folds", partition.folds},
              {"shuffles", partition.shuffles}}},
            {"models", kinds_json},
            {"feature_count", feature_count == 0 ? nlohmann::json("elbow")
                                                 : nlohmann::json(feature_count)},
            {"mi_bins", mi_bins},
            {"smote", {{"enabled", smote.enabled}, {"k_neighbors", smote.k_neighbors}}},
            {"search",
             {{"trials", search.trials},
              {"svm_c", {search.svm_c_lo, search.svm_c_hi}},
              {"svm_gamma", {search.svm_gamma_lo, search.svm_gamma_hi}},
              {"lucck_theta", {search.lucck_theta_lo, search.lucck_theta_hi}},
              {"lucck_lambda", {search.lucck_lambda_lo, search.lucck_lambda_hi}},
              {"forest_trees", search.forest_trees},
              {"forest_criteria", search.forest_criteria},
              {"forest_min_leaf", search.forest_min_leaf},
              {"forest_mtry", search.forest_mtry},
              {"forest_max_splits", search.forest_max_splits}}},
            {"shap", {{"background", shap_background}, {"coalitions", shap_budget}}},
            {"threads", threads}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
    PipelineConfig cfg;
    check_keys(doc,
               {"data", "schema", "output_dir", "seed", "partition", "models", "feature_count",
                "mi_bins", "smote", "search", "shap", "threads"},
               "config");
    cfg.data_path = doc.value("data", "");
    cfg.schema_path = doc.value("schema", "");
    cfg.output_dir = doc.value("output_dir", "");
    cfg.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("partition")) {
        const auto& p = doc.at("partition");
        check_keys(p, {"feature_selection_fraction", "test_fraction", "folds", "shuffles"},
                   "partition");
        cfg.partition.feature_selection_fraction =
            p.value("feature_selection_fraction", cfg.partition.feature_selection_fraction);
        cfg.partition.test_fraction = p.value("test_fraction", cfg.partition.test_fraction);
        cfg.partition.folds = p.value("folds", cfg.partition.folds);
        cfg.partition.shuffles = p.value("shuffles", cfg.partition.shuffles);
    }
    cfg.partition.seed = cfg.seed;
    if (doc.contains("models")) {
        cfg.kinds.clear();
        for (const auto& token : doc.at("models")) {
            cfg.kinds.push_back(classifier_kind_from_string(token.get<std::string>()));
        }
    }
    if (doc.contains("feature_count")) {
        const auto& fc = doc.at("feature_count");
        if (fc.is_string()) {
            if (fc.get<std::string>() != "elbow") {
                throw ValidationError("feature_count must be a positive integer or \"elbow\"");
            }
            cfg.feature_count = 0;
        } else {
            const auto k = fc.get<std::int64_t>();
            if (k < 1) {
                throw ValidationError("feature_count must be a positive integer or \"elbow\"");
            }
            cfg.feature_count = static_cast<std::size_t>(k);
        }
    }
    cfg.mi_bins = doc.value("mi_bins", cfg.mi_bins);
    if (doc.contains("smote")) {
        const auto& s = doc.at("smote");
        check_keys(s, {"enabled", "k_neighbors"}, "smote");
        cfg.smote.enabled = s.value("enabled", cfg.smote.enabled);
        cfg.smote.k_neighbors = s.value("k_neighbors", cfg.smote.k_neighbors);
    }
    if (doc.contains("search")) {
        const auto& s = doc.at("search");
        check_keys(s,
                   {"trials", "svm_c", "svm_gamma", "lucck_theta", "lucck_lambda", "forest_trees",
                    "forest_criteria", "forest_min_leaf", "forest_mtry", "forest_max_splits"},
                   "search");
        cfg.search.trials = s.value("trials", cfg.search.trials);
        std::tie(cfg.search.svm_c_lo, cfg.search.svm_c_hi) =
            read_range(s, "svm_c", cfg.search.svm_c_lo, cfg.search.svm_c_hi);
        std::tie(cfg.search.svm_gamma_lo, cfg.search.svm_gamma_hi) =
            read_range(s, "svm_gamma", cfg.search.svm_gamma_lo, cfg.search.svm_gamma_hi);
        std::tie(cfg.search.lucck_theta_lo, cfg.search.lucck_theta_hi) =
            read_range(s, "lucck_theta", cfg.search.lucck_theta_lo, cfg.search.lucck_theta_hi);
        std::tie(cfg.search.lucck_lambda_lo, cfg.search.lucck_lambda_hi) =
            read_range(s, "lucck_lambda", cfg.search.lucck_lambda_lo, cfg.search.lucck_lambda_hi);
        cfg.search.forest_trees = s.value("forest_trees", cfg.search.forest_trees);
        cfg.search.forest_criteria = s.value("forest_criteria", cfg.search.forest_criteria);
        cfg.search.forest_min_leaf = s.value("forest_min_leaf", cfg.search.forest_min_leaf);
        cfg.search.forest_mtry = s.value("forest_mtry", cfg.search.forest_mtry);
        cfg.search.forest_max_splits = s.value("forest_max_splits", cfg.search.forest_max_splits);
    }
    if (doc.contains("shap")) {
        const auto& s = doc.at("shap");
        check_keys(s, {"background", "coalitions"}, "shap");
        cfg.shap_background = s.value("background", cfg.shap_background);
        cfg.shap_budget = s.value("coalitions", cfg.shap_budget);
    }
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.validate();
    return cfg;
}

nlohmann::json PipelineConfig::experiment_json() const {
    nlohmann::json doc = to_json();
    doc.erase("output_dir");
    doc.erase("threads");
    return doc;
}

std::uint64_t PipelineConfig::config_hash() const { return rng::fnv1a(experiment_json().dump()); }

} // namespace ofc
