#include "model_impl.hpp"
#include "ofc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ofc::detail {

namespace {

double kernel_eval(const std::string& kernel, double gamma,
                   std::span<const double> a, std::span<const double> b) {
    if (kernel == "linear") {
        double dot = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        dist2 += d * d;
    }
    return std::exp(-gamma * dist2);
}

class SvmModel final : public ModelImpl {
public:
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coef; // alpha_i * t_i
    double bias = 0.0;
    std::string kernel = "rbf";
    double gamma = 1.0;

    ClassifierKind kind() const override { return ClassifierKind::Svm; }
    double threshold() const override { return 0.0; }

    double score(std::span<const double> x) const override {
        double value = bias;
        for (std::size_t i = 0; i < support_vectors.size(); ++i) {
            value += dual_coef[i] * kernel_eval(kernel, gamma, support_vectors[i], x);
        }
        return value;
    }

    nlohmann::json params_json() const override {
        return {{"support_vectors", support_vectors},
                {"dual_coef", dual_coef},
                {"bias", bias},
                {"kernel", kernel},
                {"gamma", gamma}};
    }
};

} // namespace

std::unique_ptr<ModelImpl> fit_svm(const TrainingData& data, const HyperMap& hyper) {
    const double c = hyper_number(hyper, "c", 1.0);
    const std::string kernel = hyper_string(hyper, "kernel", "rbf");
    const double gamma =
        hyper_number(hyper, "gamma", 1.0 / static_cast<double>(data.n_features));
    if (c <= 0.0) throw ValidationError("svm requires c > 0");
    if (kernel != "linear" && kernel != "rbf") {
        throw ValidationError("svm kernel must be 'linear' or 'rbf'");
    }
    if (kernel == "rbf" && gamma <= 0.0) throw ValidationError("svm rbf requires gamma > 0");

    const std::size_t n = data.x.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = data.y[i] == 1 ? 1.0 : -1.0;

    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel_eval(kernel, gamma, data.x[i], data.x[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }

    // SMO on the dual, selecting the maximal-violating pair each step.
    // g[i] tracks sum_j alpha_j t_j K_ij; KKT violation is measured on
    // t_i - g[i].
    std::vector<double> alpha(n, 0.0);
    std::vector<double> g(n, 0.0);
    constexpr double kTolerance = 1e-3;
    const std::size_t max_iterations = std::max<std::size_t>(200 * n, 20000);

    auto in_up = [&](std::size_t i) {
        return (t[i] > 0.0 && alpha[i] < c) || (t[i] < 0.0 && alpha[i] > 0.0);
    };
    auto in_low = [&](std::size_t i) {
        return (t[i] < 0.0 && alpha[i] < c) || (t[i] > 0.0 && alpha[i] > 0.0);
    };

    double m_up = 0.0, m_low = 0.0;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        std::size_t best_i = n, best_j = n;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = t[i] - g[i];
            if (in_up(i) && v > m_up) {
                m_up = v;
                best_i = i;
            }
            if (in_low(i) && v < m_low) {
                m_low = v;
                best_j = i;
            }
        }
        if (best_i == n || best_j == n || m_up - m_low <= kTolerance) break;

        const std::size_t i = best_i;
        const std::size_t j = best_j;
        const double s = t[i] * t[j];
        double lo, hi;
        if (s < 0.0) {
            lo = std::max(0.0, alpha[j] - alpha[i]);
            hi = std::min(c, c + alpha[j] - alpha[i]);
        } else {
            lo = std::max(0.0, alpha[i] + alpha[j] - c);
            hi = std::min(c, alpha[i] + alpha[j]);
        }
        if (hi - lo < 1e-15) continue;

        const double eta = std::max(k[i][i] + k[j][j] - 2.0 * k[i][j], 1e-12);
        // E_i - E_j with the bias cancelled.
        const double delta = (g[i] - t[i]) - (g[j] - t[j]);
        double alpha_j_new = alpha[j] + t[j] * delta / eta;
        alpha_j_new = std::clamp(alpha_j_new, lo, hi);
        const double alpha_i_new = alpha[i] + s * (alpha[j] - alpha_j_new);

        const double di = (alpha_i_new - alpha[i]) * t[i];
        const double dj = (alpha_j_new - alpha[j]) * t[j];
        if (std::abs(di) < 1e-15 && std::abs(dj) < 1e-15) break;
        for (std::size_t p = 0; p < n; ++p) g[p] += di * k[i][p] + dj * k[j][p];
        alpha[i] = alpha_i_new;
        alpha[j] = alpha_j_new;
    }

    auto model = std::make_unique<SvmModel>();
    model->kernel = kernel;
    model->gamma = gamma;
    if (std::isfinite(m_up) && std::isfinite(m_low)) {
        model->bias = 0.5 * (m_up + m_low);
    } else {
        model->bias = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-12) {
            model->support_vectors.push_back(data.x[i]);
            model->dual_coef.push_back(alpha[i] * t[i]);
        }
    }
    return model;
}

std::unique_ptr<ModelImpl> load_svm(const nlohmann::json& params) {
    auto model = std::make_unique<SvmModel>();
    model->support_vectors = params.at("support_vectors").get<std::vector<std::vector<double>>>();
    model->dual_coef = params.at("dual_coef").get<std::vector<double>>();
    model->bias = params.at("bias").get<double>();
    model->kernel = params.at("kernel").get<std::string>();
    model->gamma = params.at("gamma").get<double>();
    return model;
}

} // namespace ofc::detail
