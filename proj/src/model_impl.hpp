#pragma once

#include "ofc/classifiers.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <span>
#include <vector>

namespace ofc::detail {

/// Dense training view handed to the per-kind fitters.
struct TrainingData {
    std::vector<std::vector<double>> x; // row-major
    std::vector<int> y;                 // 1 = pass, 0 = fail
    std::size_t n_features = 0;
};

class ModelImpl {
public:
    virtual ~ModelImpl() = default;
    virtual ClassifierKind kind() const = 0;
    virtual double score(std::span<const double> x) const = 0;
    virtual double threshold() const = 0;
    virtual nlohmann::json params_json() const = 0;
};

std::unique_ptr<ModelImpl> fit_naive_bayes(const TrainingData& data, const HyperMap& hp);
std::unique_ptr<ModelImpl> fit_logistic(const TrainingData& data, const HyperMap& hp);
std::unique_ptr<ModelImpl> fit_svm(const TrainingData& data, const HyperMap& hp);
std::unique_ptr<ModelImpl> fit_forest(const TrainingData& data, const HyperMap& hp,
                                      std::uint64_t seed);
std::unique_ptr<ModelImpl> fit_lucck(const TrainingData& data, const HyperMap& hp);

std::unique_ptr<ModelImpl> load_naive_bayes(const nlohmann::json& params);
std::unique_ptr<ModelImpl> load_logistic(const nlohmann::json& params);
std::unique_ptr<ModelImpl> load_svm(const nlohmann::json& params);
std::unique_ptr<ModelImpl> load_forest(const nlohmann::json& params);
std::unique_ptr<ModelImpl> load_lucck(const nlohmann::json& params);

double hyper_number(const HyperMap& hp, const std::string& name, double fallback);
std::string hyper_string(const HyperMap& hp, const std::string& name, const std::string& fallback);

/// LUCCK predict shared by the impl and the public lucck_predict: log-sum
/// of per-sample log similarities per class, so extreme (lambda, theta)
/// do not underflow.
std::pair<int, double> lucck_affinity_predict(std::span<const double> x, const LucckParams& params);

} // namespace ofc::detail
