#include "model_impl.hpp"
#include "ofc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ofc::detail {

namespace {

// Log of the similarity between x and a stored point: the product kernel
// becomes a sum of -theta_j * log(1 + lambda_j * d_j^2) terms, which stays
// finite where the direct product would underflow.
double log_similarity(std::span<const double> x, const std::vector<double>& point,
                      const LucckParams& params) {
    double acc = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) {
        const double d = x[j] - point[j];
        acc += -params.theta[j] * std::log1p(params.lambda[j] * d * d);
    }
    return acc;
}

// log(sum_i exp(v_i)) with the usual max shift.
double log_sum_exp(const std::vector<double>& values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

class LucckModel final : public ModelImpl {
public:
    LucckParams params;

    ClassifierKind kind() const override { return ClassifierKind::Lucck; }
    double threshold() const override { return 0.5; }

    double score(std::span<const double> x) const override {
        return lucck_affinity_predict(x, params).second;
    }

    nlohmann::json params_json() const override {
        return {{"lambda", params.lambda},
                {"theta", params.theta},
                {"class_pass", params.class_pass},
                {"class_fail", params.class_fail}};
    }
};

} // namespace

std::pair<int, double> lucck_affinity_predict(std::span<const double> x,
                                              const LucckParams& params) {
    std::vector<double> log_sim_pass;
    log_sim_pass.reserve(params.class_pass.size());
    for (const auto& p : params.class_pass) log_sim_pass.push_back(log_similarity(x, p, params));
    std::vector<double> log_sim_fail;
    log_sim_fail.reserve(params.class_fail.size());
    for (const auto& p : params.class_fail) log_sim_fail.push_back(log_similarity(x, p, params));

    const double log_r_pass = log_sum_exp(log_sim_pass);
    const double log_r_fail = log_sum_exp(log_sim_fail);

    const int label = log_r_pass >= log_r_fail ? 1 : 0;
    // score = R_pass / (R_pass + R_fail) = sigmoid(log_r_pass - log_r_fail)
    const double diff = log_r_fail - log_r_pass;
    double score;
    if (diff > 700.0) {
        score = 0.0;
    } else if (diff < -700.0) {
        score = 1.0;
    } else {
        score = 1.0 / (1.0 + std::exp(diff));
    }
    return {label, score};
}

std::unique_ptr<ModelImpl> fit_lucck(const TrainingData& data, const HyperMap& hyper) {
    const double lambda = hyper_number(hyper, "lambda", 1.0);
    const double theta = hyper_number(hyper, "theta", 1.0);
    auto model = std::make_unique<LucckModel>();
    model->params = LucckParams::global(lambda, theta, data.n_features);
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        if (data.y[i] == 1) {
            model->params.class_pass.push_back(data.x[i]);
        } else {
            model->params.class_fail.push_back(data.x[i]);
        }
    }
    return model;
}

std::unique_ptr<ModelImpl> load_lucck(const nlohmann::json& params) {
    auto model = std::make_unique<LucckModel>();
    model->params.lambda = params.at("lambda").get<std::vector<double>>();
    model->params.theta = params.at("theta").get<std::vector<double>>();
    model->params.class_pass = params.at("class_pass").get<std::vector<std::vector<double>>>();
    model->params.class_fail = params.at("class_fail").get<std::vector<std::vector<double>>>();
    return model;
}

} // namespace ofc::detail
