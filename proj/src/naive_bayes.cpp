#include "model_impl.hpp"
#include "ofc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ofc::detail {

namespace {

class NaiveBayesModel final : public ModelImpl {
public:
    std::vector<double> mean[2];     // [class][feature]
    std::vector<double> variance[2]; // smoothed
    double log_prior[2] = {0.0, 0.0};

    ClassifierKind kind() const override { return ClassifierKind::NaiveBayes; }
    double threshold() const override { return 0.5; }

    double score(std::span<const double> x) const override {
        double log_like[2];
        for (int c = 0; c < 2; ++c) {
            double ll = log_prior[c];
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double d = x[j] - mean[c][j];
                ll += -0.5 * std::log(2.0 * std::numbers::pi * variance[c][j]) -
                      d * d / (2.0 * variance[c][j]);
            }
            log_like[c] = ll;
        }
        // Posterior of class 1 (pass) via log-sum-exp.
        const double m = std::max(log_like[0], log_like[1]);
        const double z0 = std::exp(log_like[0] - m);
        const double z1 = std::exp(log_like[1] - m);
        return z1 / (z0 + z1);
    }

    nlohmann::json params_json() const override {
        return {{"mean_fail", mean[0]},
                {"mean_pass", mean[1]},
                {"variance_fail", variance[0]},
                {"variance_pass", variance[1]},
                {"log_prior_fail", log_prior[0]},
                {"log_prior_pass", log_prior[1]}};
    }
};

} // namespace

std::unique_ptr<ModelImpl> fit_naive_bayes(const TrainingData& data, const HyperMap&) {
    auto model = std::make_unique<NaiveBayesModel>();
    const std::size_t d = data.n_features;
    std::size_t count[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
        model->mean[c].assign(d, 0.0);
        model->variance[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const int c = data.y[i];
        ++count[c];
        for (std::size_t j = 0; j < d; ++j) model->mean[c][j] += data.x[i][j];
    }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < d; ++j) model->mean[c][j] /= static_cast<double>(count[c]);
    }
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const int c = data.y[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = data.x[i][j] - model->mean[c][j];
            model->variance[c][j] += dlt * dlt;
        }
    }

    // Smoothing: 1e-9 times the largest overall feature variance keeps
    // zero-variance features finite.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean_all = 0.0;
        for (const auto& row : data.x) mean_all += row[j];
        mean_all /= static_cast<double>(data.x.size());
        double var_all = 0.0;
        for (const auto& row : data.x) var_all += (row[j] - mean_all) * (row[j] - mean_all);
        var_all /= static_cast<double>(data.x.size());
        max_var = std::max(max_var, var_all);
    }
    const double smoothing = std::max(1e-9 * max_var, 1e-300);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            model->variance[c][j] =
                model->variance[c][j] / static_cast<double>(count[c]) + smoothing;
        }
        model->log_prior[c] = std::log(static_cast<double>(count[c]) /
                                       static_cast<double>(data.x.size()));
    }
    return model;
}

std::unique_ptr<ModelImpl> load_naive_bayes(const nlohmann::json& params) {
    auto model = std::make_unique<NaiveBayesModel>();
    model->mean[0] = params.at("mean_fail").get<std::vector<double>>();
    model->mean[1] = params.at("mean_pass").get<std::vector<double>>();
    model->variance[0] = params.at("variance_fail").get<std::vector<double>>();
    model->variance[1] = params.at("variance_pass").get<std::vector<double>>();
    model->log_prior[0] = params.at("log_prior_fail").get<double>();
    model->log_prior[1] = params.at("log_prior_pass").get<double>();
    return model;
}

} // namespace ofc::detail
