#include "ofc/classifiers.hpp"

#include "model_impl.hpp"
#include "ofc/error.hpp"
#include "ofc/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ofc {

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::NaiveBayes: return "naive_bayes";
        case ClassifierKind::LogisticRegression: return "logistic_regression";
        case ClassifierKind::Svm: return "svm";
        case ClassifierKind::RandomForest: return "random_forest";
        case ClassifierKind::Lucck: return "lucck";
    }
    return "unknown";
}

ClassifierKind classifier_kind_from_string(std::string_view token) {
    if (token == "naive_bayes") return ClassifierKind::NaiveBayes;
    if (token == "logistic_regression") return ClassifierKind::LogisticRegression;
    if (token == "svm") return ClassifierKind::Svm;
    if (token == "random_forest") return ClassifierKind::RandomForest;
    if (token == "lucck") return ClassifierKind::Lucck;
    throw ParseError("unknown classifier kind: '" + std::string(token) + "'");
}

std::string hyper_to_string(const HyperValue& value) {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(value));
    return buf;
}

namespace detail {

double hyper_number(const HyperMap& hp, const std::string& name, double fallback) {
    auto it = hp.find(name);
    if (it == hp.end()) return fallback;
    if (const auto* v = std::get_if<double>(&it->second)) return *v;
    throw ValidationError("hyperparameter '" + name + "' must be numeric");
}

std::string hyper_string(const HyperMap& hp, const std::string& name, const std::string& fallback) {
    auto it = hp.find(name);
    if (it == hp.end()) return fallback;
    if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
    throw ValidationError("hyperparameter '" + name + "' must be a string");
}

namespace {

/// FNV-1a over the raw bit patterns of the training matrix and labels.
std::uint64_t fingerprint(const TrainingData& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            h ^= (word >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& row : data.x) {
        for (double v : row) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &v, sizeof(bits));
            mix(bits);
        }
    }
    for (int y : data.y) mix(static_cast<std::uint64_t>(y));
    return h;
}

} // namespace
} // namespace detail

LucckParams LucckParams::global(double lambda, double theta, std::size_t n_features) {
    if (lambda <= 0.0 || theta <= 0.0) {
        throw ValidationError("LUCCK hyperparameters lambda and theta must be positive");
    }
    LucckParams p;
    p.lambda.assign(n_features, lambda);
    p.theta.assign(n_features, theta);
    return p;
}

double lucck_kernel(double x, double lambda, double theta) {
    if (lambda <= 0.0 || theta <= 0.0) {
        throw ValidationError("lucck_kernel requires lambda > 0 and theta > 0");
    }
    return std::pow(1.0 + lambda * x * x, -theta);
}

double lucck_similarity(std::span<const double> x, std::span<const double> y,
                        const LucckParams& params) {
    if (x.size() != y.size() || x.size() != params.lambda.size()) {
        throw ValidationError("lucck_similarity dimension mismatch");
    }
    double product = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        product *= std::pow(1.0 + params.lambda[i] * d * d, -params.theta[i]);
    }
    return product;
}

double lucck_class_affinity(std::span<const double> x,
                            const std::vector<std::vector<double>>& class_samples,
                            const LucckParams& params) {
    if (class_samples.empty()) {
        throw ValidationError("lucck_class_affinity requires a nonempty class set");
    }
    double sum = 0.0;
    for (const auto& sample : class_samples) {
        sum += lucck_similarity(x, sample, params);
    }
    return sum;
}

ClassifierKind TrainedModel::kind() const {
    if (!impl_) throw ValidationError("model is not fitted");
    return impl_->kind();
}

double TrainedModel::score(std::span<const double> x) const {
    if (!impl_) throw ValidationError("model is not fitted");
    if (x.size() != features_.size()) {
        throw ValidationError("score: expected " + std::to_string(features_.size()) +
                              " features, got " + std::to_string(x.size()));
    }
    return impl_->score(x);
}

int TrainedModel::predict(std::span<const double> x) const {
    return score(x) >= threshold() ? 1 : 0;
}

double TrainedModel::threshold() const {
    if (!impl_) throw ValidationError("model is not fitted");
    return impl_->threshold();
}

nlohmann::json TrainedModel::to_json() const {
    if (!impl_) throw ValidationError("cannot serialize an unfitted model");
    nlohmann::json hp = nlohmann::json::object();
    for (const auto& [name, value] : hyperparameters_) {
        if (const auto* s = std::get_if<std::string>(&value)) hp[name] = *s;
        else hp[name] = std::get<double>(value);
    }
    return nlohmann::json{{"format", kModelFormat},
                          {"kind", std::string(to_string(impl_->kind()))},
                          {"hyperparameters", hp},
                          {"features", features_},
                          {"training_fingerprint", fingerprint_},
                          {"params", impl_->params_json()}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != kModelFormat) {
        throw ParseError("unsupported model artifact format");
    }
    TrainedModel model;
    const ClassifierKind kind = classifier_kind_from_string(doc.at("kind").get<std::string>());
    model.features_ = doc.at("features").get<std::vector<std::string>>();
    model.fingerprint_ = doc.value("training_fingerprint", std::uint64_t{0});
    for (const auto& [name, value] : doc.at("hyperparameters").items()) {
        if (value.is_string()) model.hyperparameters_[name] = value.get<std::string>();
        else model.hyperparameters_[name] = value.get<double>();
    }
    const nlohmann::json& params = doc.at("params");
    switch (kind) {
        case ClassifierKind::NaiveBayes: model.impl_ = detail::load_naive_bayes(params); break;
        case ClassifierKind::LogisticRegression: model.impl_ = detail::load_logistic(params); break;
        case ClassifierKind::Svm: model.impl_ = detail::load_svm(params); break;
        case ClassifierKind::RandomForest: model.impl_ = detail::load_forest(params); break;
        case ClassifierKind::Lucck: model.impl_ = detail::load_lucck(params); break;
    }
    return model;
}

TrainedModel fit(const ClassifierSpec& spec, const Table& train,
                 const std::vector<std::string>& features) {
    require_no_test_rows(train, "fit");
    if (train.n_rows() == 0) throw ValidationError("fit requires a nonempty training table");
    if (features.empty()) throw ValidationError("fit requires at least one feature");

    detail::TrainingData data;
    data.x = train.matrix(features);
    data.y = train.labels01();
    data.n_features = features.size();

    const bool has_pass = std::any_of(data.y.begin(), data.y.end(), [](int y) { return y == 1; });
    const bool has_fail = std::any_of(data.y.begin(), data.y.end(), [](int y) { return y == 0; });
    if (!has_pass || !has_fail) {
        throw ValidationError("fit requires both classes in the training data");
    }

    TrainedModel model;
    model.features_ = features;
    model.hyperparameters_ = spec.hyperparameters;
    model.fingerprint_ = detail::fingerprint(data);
    switch (spec.kind) {
        case ClassifierKind::NaiveBayes:
            model.impl_ = detail::fit_naive_bayes(data, spec.hyperparameters);
            break;
        case ClassifierKind::LogisticRegression:
            model.impl_ = detail::fit_logistic(data, spec.hyperparameters);
            break;
        case ClassifierKind::Svm:
            model.impl_ = detail::fit_svm(data, spec.hyperparameters);
            break;
        case ClassifierKind::RandomForest:
            model.impl_ = detail::fit_forest(data, spec.hyperparameters, spec.seed);
            break;
        case ClassifierKind::Lucck:
            model.impl_ = detail::fit_lucck(data, spec.hyperparameters);
            break;
    }
    return model;
}

std::pair<int, double> lucck_predict(const TrainedModel& model, std::span<const double> x) {
    if (!model.fitted() || model.kind() != ClassifierKind::Lucck) {
        throw ValidationError("lucck_predict requires a fitted LUCCK model");
    }
    const double s = model.score(x);
    return {s >= 0.5 ? 1 : 0, s};
}

} // namespace ofc
