#include "ofc/pipeline.hpp"

#include "ofc/error.hpp"
#include "ofc/report.hpp"
#include "ofc/rng.hpp"
#include "ofc/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace ofc {

namespace {

std::vector<double> apply_scaler(const ScalerParams& scaler, std::span<const double> raw) {
    if (raw.size() != scaler.names.size()) {
        throw ValidationError("scaler dimension mismatch");
    }
    std::vector<double> z(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        z[j] = scaler.constant[j] ? 0.0 : (raw[j] - scaler.mean[j]) / scaler.stddev[j];
    }
    return z;
}

nlohmann::json scaler_to_json(const ScalerParams& scaler) {
    return {{"names", scaler.names},
            {"mean", scaler.mean},
            {"stddev", scaler.stddev},
            {"constant", scaler.constant}};
}

ScalerParams scaler_from_json(const nlohmann::json& doc) {
    ScalerParams scaler;
    scaler.names = doc.at("names").get<std::vector<std::string>>();
    scaler.mean = doc.at("mean").get<std::vector<double>>();
    scaler.stddev = doc.at("stddev").get<std::vector<double>>();
    scaler.constant = doc.at("constant").get<std::vector<std::uint8_t>>();
    return scaler;
}

nlohmann::json hyper_map_to_json(const HyperMap& hp) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, value] : hp) {
        if (const auto* s = std::get_if<std::string>(&value)) out[name] = *s;
        else out[name] = std::get<double>(value);
    }
    return out;
}

HyperMap hyper_map_from_json(const nlohmann::json& doc) {
    HyperMap hp;
    for (const auto& [name, value] : doc.items()) {
        if (value.is_string()) hp[name] = value.get<std::string>();
        else hp[name] = value.get<double>();
    }
    return hp;
}

nlohmann::json metric_set_to_json(const MetricSet& set) {
    nlohmann::json out = nlohmann::json::object();
    for (int i = 0; i < 6; ++i) {
        const auto& v = metric_field(set, i);
        out[kMetricNames[i]] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    }
    return out;
}

nlohmann::json aggregate_to_json(const MetricAggregate& agg) {
    nlohmann::json metrics = nlohmann::json::object();
    for (int i = 0; i < 6; ++i) {
        metrics[kMetricNames[i]] = {{"mean", agg[i].mean},
                                    {"stddev", agg[i].stddev},
                                    {"used", agg[i].used},
                                    {"skipped", agg[i].skipped}};
    }
    nlohmann::json per_shuffle = nlohmann::json::array();
    for (const MetricSet& set : agg.per_shuffle) per_shuffle.push_back(metric_set_to_json(set));
    return {{"metrics", metrics}, {"per_shuffle", per_shuffle}};
}

} // namespace

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<HyperMap> SearchSpace::candidates(ClassifierKind kind, std::uint64_t seed) const {
    validate();
    std::vector<HyperMap> out;
    switch (kind) {
        case ClassifierKind::NaiveBayes:
            out.push_back({});
            break;
        case ClassifierKind::LogisticRegression:
            out.push_back({{"c", 1.0}});
            break;
        case ClassifierKind::Svm:
            for (std::size_t t = 0; t < trials; ++t) {
                rng::Stream stream(rng::SeedChain(seed).mix("svm_trial").mix(t).value());
                HyperMap hp;
                hp["c"] = stream.log_uniform(svm_c_lo, svm_c_hi);
                hp["gamma"] = stream.log_uniform(svm_gamma_lo, svm_gamma_hi);
                hp["kernel"] = stream.uniform() < 0.5 ? std::string("linear")
                                                      : std::string("rbf");
                out.push_back(std::move(hp));
            }
            break;
        case ClassifierKind::Lucck:
            for (std::size_t t = 0; t < trials; ++t) {
                rng::Stream stream(rng::SeedChain(seed).mix("lucck_trial").mix(t).value());
                HyperMap hp;
                hp["theta"] = stream.log_uniform(lucck_theta_lo, lucck_theta_hi);
                hp["lambda"] = stream.log_uniform(lucck_lambda_lo, lucck_lambda_hi);
                out.push_back(std::move(hp));
            }
            break;
        case ClassifierKind::RandomForest:
            for (double trees : forest_trees) {
                for (const std::string& criterion : forest_criteria) {
                    for (double min_leaf : forest_min_leaf) {
                        for (double mtry : forest_mtry) {
                            for (const std::string& max_splits : forest_max_splits) {
                                out.push_back({{"trees", trees},
                                               {"criterion", criterion},
                                               {"min_leaf", min_leaf},
                                               {"mtry", mtry},
                                               {"max_splits", max_splits}});
                            }
                        }
                    }
                }
            }
            break;
    }
    return out;
}

double PreparedModel::score(std::span<const double> raw) const {
    return model.score(apply_scaler(scaler, raw));
}

int PreparedModel::predict(std::span<const double> raw) const {
    return model.predict(apply_scaler(scaler, raw));
}

nlohmann::json PreparedModel::to_json() const {
    return {{"format", kPreparedFormat},
            {"model", model.to_json()},
            {"scaler", scaler_to_json(scaler)}};
}

PreparedModel PreparedModel::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != kPreparedFormat) {
        throw ParseError("unsupported prepared-model artifact format");
    }
    PreparedModel out;
    out.model = TrainedModel::from_json(doc.at("model"));
    out.scaler = scaler_from_json(doc.at("scaler"));
    return out;
}

nlohmann::json EnsembleModel::to_json() const {
    nlohmann::json member_docs = nlohmann::json::array();
    for (const PreparedModel& member : members) member_docs.push_back(member.to_json());
    return {{"format", kEnsembleFormat}, {"members", member_docs}};
}

EnsembleModel EnsembleModel::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != kEnsembleFormat) {
        throw ParseError("unsupported ensemble artifact format");
    }
    EnsembleModel out;
    for (const auto& member : doc.at("members")) {
        out.members.push_back(PreparedModel::from_json(member));
    }
    return out;
}

std::pair<int, double> ensemble_predict(const EnsembleModel& ensemble,
                                        std::span<const double> raw) {
    if (ensemble.members.empty()) throw ValidationError("ensemble has no members");
    std::size_t votes_pass = 0;
    double score_sum = 0.0;
    for (const PreparedModel& member : ensemble.members) {
        votes_pass += static_cast<std::size_t>(member.predict(raw));
        score_sum += member.score(raw);
    }
    const std::size_t votes_fail = ensemble.members.size() - votes_pass;
    return {votes_pass >= votes_fail ? 1 : 0,
            score_sum / static_cast<double>(ensemble.members.size())};
}

std::vector<FoldPrep> prepare_folds(const Table& tagged, const Partition& partition,
                                    const std::vector<std::string>& features,
                                    const SmoteSettings& smote, std::uint64_t seed) {
    std::vector<FoldPrep> preps;
    preps.reserve(static_cast<std::size_t>(partition.folds));
    for (int f = 0; f < partition.folds; ++f) {
        auto [train, validation] = fold_views(tagged, partition, f);
        FoldPrep prep;
        prep.scaler = standardize_fit(train, features);
        Table standardized = standardize_apply(train, prep.scaler);
        if (smote.enabled) {
            SmoteConfig sc;
            sc.k_neighbors = smote.k_neighbors;
            sc.seed = rng::SeedChain(seed).mix("smote").mix(static_cast<std::uint64_t>(f)).value();
            prep.train = smote_enrich(standardized, sc);
        } else {
            prep.train = std::move(standardized);
        }
        prep.validation_x = validation.matrix(features);
        prep.validation_y = validation.labels01();
        preps.push_back(std::move(prep));
    }
    return preps;
}

SearchOutcome search_hyperparameters(ClassifierKind kind, const SearchSpace& space,
                                     const std::vector<FoldPrep>& folds,
                                     const std::vector<std::string>& features,
                                     std::uint64_t seed) {
    if (folds.size() < 2) throw ValidationError("hyperparameter search requires >= 2 folds");
    const std::vector<HyperMap> candidates = space.candidates(kind, seed);

    SearchOutcome outcome;
    outcome.candidates_tried = candidates.size();
    bool any_succeeded = false;
    std::vector<std::string> failures;

    for (std::size_t t = 0; t < candidates.size(); ++t) {
        double auc_sum = 0.0;
        int auc_count = 0;
        std::string failure;
        try {
            for (std::size_t f = 0; f < folds.size(); ++f) {
                ClassifierSpec spec;
                spec.kind = kind;
                spec.hyperparameters = candidates[t];
                spec.seed = rng::SeedChain(seed).mix("trial").mix(t).mix("fold").mix(f).value();
                TrainedModel model = fit(spec, folds[f].train, features);
                std::vector<double> scores;
                scores.reserve(folds[f].validation_x.size());
                for (const auto& raw : folds[f].validation_x) {
                    scores.push_back(model.score(apply_scaler(folds[f].scaler, raw)));
                }
                try {
                    auc_sum += auc(scores, folds[f].validation_y);
                    ++auc_count;
                } catch (const UndefinedMetricError&) {
                    // Single-class validation fold: skip it in the mean.
                }
            }
            if (auc_count == 0) {
                failure = "no fold produced a defined validation AUC";
            }
        } catch (const std::exception& e) {
            failure = e.what();
        }
        if (!failure.empty()) {
            failures.push_back("trial " + std::to_string(t) + ": " + failure);
            continue;
        }
        const double mean_auc = auc_sum / auc_count;
        if (!any_succeeded || mean_auc > outcome.best_mean_auc) {
            any_succeeded = true;
            outcome.best = candidates[t];
            outcome.best_mean_auc = mean_auc;
            outcome.best_trial = t;
        }
    }

    if (!any_succeeded) {
        std::string message = "hyperparameter search failed for " +
                              std::string(to_string(kind)) + ":";
        for (const std::string& f : failures) message += "\n  " + f;
        throw Error(message);
    }
    return outcome;
}

PreparedModel build_cv_model(ClassifierKind kind, const HyperMap& best, const Table& tagged,
                             const Partition& partition,
                             const std::vector<std::string>& features,
                             const SmoteSettings& smote, std::uint64_t seed) {
    const Table trainval = tagged.subset(partition.trainval_rows());
    PreparedModel out;
    out.scaler = standardize_fit(trainval, features);
    Table standardized = standardize_apply(trainval, out.scaler);
    if (smote.enabled) {
        SmoteConfig sc;
        sc.k_neighbors = smote.k_neighbors;
        sc.seed = rng::SeedChain(seed).mix("cv_smote").value();
        standardized = smote_enrich(standardized, sc);
    }
    ClassifierSpec spec;
    spec.kind = kind;
    spec.hyperparameters = best;
    spec.seed = rng::SeedChain(seed).mix("cv_fit").value();
    out.model = fit(spec, standardized, features);
    return out;
}

EnsembleModel build_ensemble(ClassifierKind kind, const HyperMap& best,
                             const std::vector<FoldPrep>& folds,
                             const std::vector<std::string>& features, std::uint64_t seed) {
    EnsembleModel ensemble;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.hyperparameters = best;
        spec.seed = rng::SeedChain(seed).mix("ensemble_fit").mix(f).value();
        PreparedModel member;
        member.scaler = folds[f].scaler;
        member.model = fit(spec, folds[f].train, features);
        ensemble.members.push_back(std::move(member));
    }
    return ensemble;
}

namespace {

MetricSet evaluate_scores(const std::vector<double>& scores, const std::vector<int>& predictions,
                          const std::vector<int>& labels) {
    MetricSet set = derive_metrics(confusion(predictions, labels));
    try {
        set.auc = auc(scores, labels);
    } catch (const UndefinedMetricError&) {
        set.auc = std::nullopt;
    }
    return set;
}

struct ShuffleModels {
    std::map<std::string, PreparedModel> cv;
    std::map<std::string, EnsembleModel> ensemble;
};

ShuffleRecord run_shuffle(const Table& table, const PipelineConfig& cfg, int s,
                          const std::vector<std::string>& all_features,
                          ShuffleModels* models_out) {
    ShuffleRecord record;
    record.shuffle = s;
    const std::uint64_t shuffle_seed =
        rng::SeedChain(cfg.seed).mix("shuffle").mix(static_cast<std::uint64_t>(s)).value();

    const Partition partition = make_partition(table, cfg.partition, s);
    const Table tagged = with_set_tags(table, partition);
    record.partition_manifest = partition.manifest(tagged);

    const Table fs_view = tagged.subset(partition.feature_selection_rows);
    record.ranking = mrmr_rank(fs_view, all_features, cfg.mi_bins);

    const std::size_t n_candidates = record.ranking.ordered.size();
    auto top_features = [&record](std::size_t k) {
        std::vector<std::string> names;
        names.reserve(k);
        for (std::size_t i = 0; i < k; ++i) names.push_back(record.ranking.ordered[i].first);
        return names;
    };

    std::size_t k = 0;
    if (cfg.feature_count > 0) {
        k = std::min(cfg.feature_count, n_candidates);
    } else if (n_candidates < 3) {
        k = n_candidates;
    } else {
        // Validation-AUC-vs-k curve for the elbow, probed with the
        // deterministic logistic model.
        std::vector<std::pair<int, double>> curve;
        for (std::size_t kk = 1; kk <= n_candidates; ++kk) {
            const std::vector<std::string> names = top_features(kk);
            const std::vector<FoldPrep> preps =
                prepare_folds(tagged, partition, names, cfg.smote, shuffle_seed);
            double auc_sum = 0.0;
            int auc_count = 0;
            for (const FoldPrep& prep : preps) {
                ClassifierSpec spec;
                spec.kind = ClassifierKind::LogisticRegression;
                spec.hyperparameters = {{"c", 1.0}};
                TrainedModel model = fit(spec, prep.train, names);
                std::vector<double> scores;
                scores.reserve(prep.validation_x.size());
                for (const auto& raw : prep.validation_x) {
                    scores.push_back(model.score(apply_scaler(prep.scaler, raw)));
                }
                try {
                    auc_sum += auc(scores, prep.validation_y);
                    ++auc_count;
                } catch (const UndefinedMetricError&) {
                }
            }
            if (auc_count > 0) {
                curve.emplace_back(static_cast<int>(kk), auc_sum / auc_count);
            }
        }
        k = curve.size() >= 3 ? static_cast<std::size_t>(elbow_select(curve)) : n_candidates;
    }

    record.k_selected = static_cast<int>(k);
    record.selected_features = top_features(k);

    const std::vector<FoldPrep> preps =
        prepare_folds(tagged, partition, record.selected_features, cfg.smote, shuffle_seed);

    const Table test_view = tagged.subset(partition.test_rows);
    const std::vector<std::vector<double>> test_x = test_view.matrix(record.selected_features);
    const std::vector<int> test_y = test_view.labels01();

    for (ClassifierKind kind : cfg.kinds) {
        const std::string kind_name(to_string(kind));
        const std::uint64_t kind_seed =
            rng::SeedChain(shuffle_seed).mix("kind").mix(kind_name).value();

        const SearchOutcome search = search_hyperparameters(
            kind, cfg.search, preps, record.selected_features, kind_seed);
        record.chosen_hyperparameters[kind_name] = search.best;

        PreparedModel cv = build_cv_model(kind, search.best, tagged, partition,
                                          record.selected_features, cfg.smote, kind_seed);
        EnsembleModel ensemble =
            build_ensemble(kind, search.best, preps, record.selected_features, kind_seed);

        std::vector<double> cv_scores, ens_scores;
        std::vector<int> cv_pred, ens_pred;
        cv_scores.reserve(test_x.size());
        for (const auto& raw : test_x) {
            cv_scores.push_back(cv.score(raw));
            cv_pred.push_back(cv.predict(raw));
            const auto [label, score] = ensemble_predict(ensemble, raw);
            ens_pred.push_back(label);
            ens_scores.push_back(score);
        }
        record.cv_metrics[kind_name] = evaluate_scores(cv_scores, cv_pred, test_y);
        record.ensemble_metrics[kind_name] = evaluate_scores(ens_scores, ens_pred, test_y);

        if (models_out != nullptr) {
            models_out->cv.emplace(kind_name, std::move(cv));
            models_out->ensemble.emplace(kind_name, std::move(ensemble));
        }
    }
    return record;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

} // namespace

nlohmann::json ExperimentResult::to_json() const {
    nlohmann::json shuffle_docs = nlohmann::json::array();
    for (const ShuffleRecord& record : shuffles) {
        nlohmann::json ranking = nlohmann::json::array();
        for (const auto& [name, score] : record.ranking.ordered) {
            ranking.push_back({{"feature", name}, {"score", score}});
        }
        nlohmann::json hp = nlohmann::json::object();
        for (const auto& [kind, map] : record.chosen_hyperparameters) {
            hp[kind] = hyper_map_to_json(map);
        }
        nlohmann::json cv = nlohmann::json::object();
        for (const auto& [kind, set] : record.cv_metrics) cv[kind] = metric_set_to_json(set);
        nlohmann::json ens = nlohmann::json::object();
        for (const auto& [kind, set] : record.ensemble_metrics) {
            ens[kind] = metric_set_to_json(set);
        }
        shuffle_docs.push_back({{"shuffle", record.shuffle},
                                {"failed", record.failed},
                                {"error", record.error},
                                {"ranking", ranking},
                                {"selected_features", record.selected_features},
                                {"k_selected", record.k_selected},
                                {"chosen_hyperparameters", hp},
                                {"cv_metrics", cv},
                                {"ensemble_metrics", ens}});
    }
    nlohmann::json cv_agg = nlohmann::json::object();
    for (const auto& [kind, agg] : cv_aggregate) cv_agg[kind] = aggregate_to_json(agg);
    nlohmann::json ens_agg = nlohmann::json::object();
    for (const auto& [kind, agg] : ensemble_aggregate) ens_agg[kind] = aggregate_to_json(agg);
    return {{"shuffles", shuffle_docs},
            {"cv_aggregate", cv_agg},
            {"ensemble_aggregate", ens_agg}};
}

ExperimentResult run_experiment(const Table& table, const PipelineConfig& cfg) {
    cfg.validate();
    if (table.n_rows() == 0) throw ValidationError("run_experiment requires a nonempty table");
    const std::vector<std::string> all_features = table.feature_names();
    if (all_features.empty()) throw ValidationError("run_experiment requires feature columns");

    const bool persist = !cfg.output_dir.empty();
    const std::filesystem::path out_dir(cfg.output_dir);
    if (persist) {
        std::filesystem::create_directories(out_dir / "models");
        std::filesystem::create_directories(out_dir / "manifests");
    }

    const std::size_t n_shuffles = static_cast<std::size_t>(cfg.partition.shuffles);
    ExperimentResult result;
    result.shuffles.resize(n_shuffles);
    std::vector<ShuffleModels> models(persist ? n_shuffles : 0);

    parallel_for(n_shuffles, cfg.threads, [&](std::size_t s) {
        ShuffleRecord record;
        try {
            record = run_shuffle(table, cfg, static_cast<int>(s), all_features,
                                 persist ? &models[s] : nullptr);
        } catch (const std::exception& e) {
            record.shuffle = static_cast<int>(s);
            record.failed = true;
            record.error = e.what();
        }
        result.shuffles[s] = std::move(record);
    });

    std::vector<std::string> failures;
    for (const ShuffleRecord& record : result.shuffles) {
        if (record.failed) {
            failures.push_back("shuffle " + std::to_string(record.shuffle) + ": " + record.error);
        }
    }
    if (failures.size() * 2 > n_shuffles) {
        std::string message = "experiment failed: more than half of the shuffles failed";
        for (const std::string& f : failures) message += "\n  " + f;
        throw Error(message);
    }

    for (ClassifierKind kind : cfg.kinds) {
        const std::string kind_name(to_string(kind));
        std::vector<MetricSet> cv_sets, ens_sets;
        for (const ShuffleRecord& record : result.shuffles) {
            if (record.failed) continue;
            cv_sets.push_back(record.cv_metrics.at(kind_name));
            ens_sets.push_back(record.ensemble_metrics.at(kind_name));
        }
        result.cv_aggregate[kind_name] = aggregate(cv_sets);
        result.ensemble_aggregate[kind_name] = aggregate(ens_sets);
    }

    if (persist) {
        const nlohmann::json provenance = {{"config_hash", cfg.config_hash()},
                                           {"seed", cfg.seed},
                                           {"version", kVersion}};
        const std::vector<std::string> header = provenance_header(cfg);
        for (std::size_t s = 0; s < n_shuffles; ++s) {
            const ShuffleRecord& record = result.shuffles[s];
            char tag[32];
            std::snprintf(tag, sizeof(tag), "shuffle_%02zu", s);
            {
                std::ofstream manifest(out_dir / "manifests" / (std::string(tag) + ".tsv"));
                if (!manifest) throw Error("cannot write partition manifest");
                for (const std::string& line : header) manifest << line << "\n";
                manifest << record.partition_manifest;
            }
            if (record.failed) continue;
            const std::filesystem::path model_dir = out_dir / "models" / tag;
            std::filesystem::create_directories(model_dir);
            for (const auto& [kind_name, model] : models[s].cv) {
                nlohmann::json artifact = model.to_json();
                artifact["provenance"] = provenance;
                write_json_file(model_dir / (kind_name + "_cv.json"), artifact);
            }
            for (const auto& [kind_name, ensemble] : models[s].ensemble) {
                nlohmann::json artifact = ensemble.to_json();
                artifact["provenance"] = provenance;
                write_json_file(model_dir / (kind_name + "_ensemble.json"), artifact);
            }
        }
        nlohmann::json doc = result.to_json();
        doc["provenance"] = provenance;
        doc["config"] = cfg.experiment_json();
        write_json_file(out_dir / "result.json", doc);
    }
    return result;
}

} // namespace ofc
