#include "model_impl.hpp"
#include "ofc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ofc::detail {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

class LogisticModel final : public ModelImpl {
public:
    std::vector<double> weights;
    double bias = 0.0;

    ClassifierKind kind() const override { return ClassifierKind::LogisticRegression; }
    double threshold() const override { return 0.5; }

    double score(std::span<const double> x) const override {
        double z = bias;
        for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
        return sigmoid(z);
    }

    nlohmann::json params_json() const override {
        return {{"weights", weights}, {"bias", bias}};
    }
};

// Penalized negative log likelihood; the bias (last coefficient) carries no
// penalty.
double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& beta, double inv_c) {
    const Eigen::VectorXd z = x * beta;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        // log(1 + exp(z)) - y z, computed stably.
        const double zi = z[i];
        const double softplus = zi > 0.0 ? zi + std::log1p(std::exp(-zi))
                                         : std::log1p(std::exp(zi));
        nll += softplus - y[i] * zi;
    }
    const Eigen::Index d = beta.size() - 1;
    nll += 0.5 * inv_c * beta.head(d).squaredNorm();
    return nll;
}

} // namespace

std::unique_ptr<ModelImpl> fit_logistic(const TrainingData& data, const HyperMap& hyper) {
    const double c = hyper_number(hyper, "c", 1.0);
    if (c <= 0.0) throw ValidationError("logistic regression requires c > 0");
    const double inv_c = 1.0 / c;

    const Eigen::Index n = static_cast<Eigen::Index>(data.x.size());
    const Eigen::Index d = static_cast<Eigen::Index>(data.n_features);
    Eigen::MatrixXd x(n, d + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = data.x[i][j];
        x(i, d) = 1.0;
        y[i] = data.y[i];
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, inv_c);
    penalty[d] = 0.0;

    constexpr int kMaxIterations = 1000;
    constexpr double kGradTolerance = 1e-6;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        const Eigen::VectorXd z = x * beta;
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) p[i] = sigmoid(z[i]);

        Eigen::VectorXd grad = x.transpose() * (p - y) + penalty.cwiseProduct(beta);
        if (grad.lpNorm<Eigen::Infinity>() <= kGradTolerance) break;

        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i) s[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
        Eigen::MatrixXd hessian = x.transpose() * s.asDiagonal() * x;
        hessian.diagonal() += penalty;

        Eigen::VectorXd step = hessian.ldlt().solve(grad);
        if (!step.allFinite()) break;

        // Backtracking keeps the Newton step from overshooting on separable
        // data.
        const double f0 = objective(x, y, beta, inv_c);
        double alpha = 1.0;
        Eigen::VectorXd candidate = beta - alpha * step;
        int halvings = 0;
        while (objective(x, y, candidate, inv_c) > f0 && halvings < 30) {
            alpha *= 0.5;
            candidate = beta - alpha * step;
            ++halvings;
        }
        if (halvings == 30) break;
        beta = candidate;
    }

    auto model = std::make_unique<LogisticModel>();
    model->weights.assign(d, 0.0);
    for (Eigen::Index j = 0; j < d; ++j) model->weights[j] = beta[j];
    model->bias = beta[d];
    return model;
}

std::unique_ptr<ModelImpl> load_logistic(const nlohmann::json& params) {
    auto model = std::make_unique<LogisticModel>();
    model->weights = params.at("weights").get<std::vector<double>>();
    model->bias = params.at("bias").get<double>();
    return model;
}

} // namespace ofc::detail
