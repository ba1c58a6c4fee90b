#pragma once

#include "ofc/tabular.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ofc {

enum class ClassifierKind { NaiveBayes, LogisticRegression, Svm, RandomForest, Lucck };

std::string_view to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(std::string_view token);

using HyperValue = std::variant<double, std::string>;
using HyperMap = std::map<std::string, HyperValue>;

std::string hyper_to_string(const HyperValue& value);

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::NaiveBayes;
    HyperMap hyperparameters;
    std::uint64_t seed = 0; // consumed by randomized kinds (random forest bagging)
};

/// Kernel hyperparameters plus the stored per-class training vectors.
/// One global (lambda, theta) pair is broadcast across features; the
/// per-feature vectors stay addressable for extension.
struct LucckParams {
    std::vector<double> lambda; // per feature, > 0
    std::vector<double> theta;  // per feature, > 0
    std::vector<std::vector<double>> class_pass;
    std::vector<std::vector<double>> class_fail;

    static LucckParams global(double lambda, double theta, std::size_t n_features);
};

/// (1 + lambda x^2)^(-theta); in (0, 1], even in x.
double lucck_kernel(double x, double lambda, double theta);

/// Product of per-coordinate kernels of the difference vector; symmetric,
/// 1 iff x == y.
double lucck_similarity(std::span<const double> x, std::span<const double> y,
                        const LucckParams& params);

/// Sum of similarities of x against every stored sample of one class.
double lucck_class_affinity(std::span<const double> x,
                            const std::vector<std::vector<double>>& class_samples,
                            const LucckParams& params);

namespace detail {
class ModelImpl;
}

/// Immutable fitted classifier. score() is monotone in the model's
/// confidence for the pass class; predict() compares the score against
/// the kind's decision threshold (0.5 for probabilistic kinds, 0 for
/// SVM), ties resolving to pass.
class TrainedModel {
public:
    TrainedModel() = default;

    bool fitted() const { return impl_ != nullptr; }
    ClassifierKind kind() const;
    const std::vector<std::string>& features() const { return features_; }
    const HyperMap& hyperparameters() const { return hyperparameters_; }
    std::uint64_t training_fingerprint() const { return fingerprint_; }

    double score(std::span<const double> x) const;
    int predict(std::span<const double> x) const; // 1 = pass, 0 = fail
    double threshold() const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& doc);

private:
    friend TrainedModel fit(const ClassifierSpec&, const Table&, const std::vector<std::string>&);

    std::shared_ptr<const detail::ModelImpl> impl_;
    std::vector<std::string> features_;
    HyperMap hyperparameters_;
    std::uint64_t fingerprint_ = 0;
};

/// Trains one model of the requested kind on the prepared training table
/// (standardization and enrichment are the caller's concern). Throws on
/// single-class data or invalid hyperparameters.
TrainedModel fit(const ClassifierSpec& spec, const Table& train,
                 const std::vector<std::string>& features);

/// (label, score) of a fitted LUCCK model; label is argmax class
/// affinity with ties resolving to pass, score the normalized pass
/// affinity.
std::pair<int, double> lucck_predict(const TrainedModel& model, std::span<const double> x);

} // namespace ofc
