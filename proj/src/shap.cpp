#include "ofc/shap.hpp"

#include "ofc/error.hpp"
#include "ofc/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ofc {

namespace {

/// Masked prediction: absent features are replaced row-by-row from the
/// background and the scores averaged (interventional form).
double coalition_value(const ScoreFunction& f, std::span<const double> x,
                       const std::vector<std::vector<double>>& background,
                       std::uint32_t member_mask) {
    std::vector<double> z(x.size());
    double total = 0.0;
    for (const auto& row : background) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            z[j] = (member_mask >> j) & 1u ? x[j] : row[j];
        }
        total += f(z);
    }
    return total / static_cast<double>(background.size());
}

struct Coalition {
    std::uint32_t mask = 0;
    double weight = 0.0;
    double value = 0.0;
};

} // namespace

double shapley_kernel_weight(std::size_t m, std::size_t s) {
    if (s == 0 || s >= m) {
        throw ValidationError("shapley_kernel_weight requires 0 < s < m");
    }
    double binom = 1.0;
    for (std::size_t i = 1; i <= s; ++i) {
        binom *= static_cast<double>(m - s + i) / static_cast<double>(i);
    }
    return static_cast<double>(m - 1) /
           (binom * static_cast<double>(s) * static_cast<double>(m - s));
}

std::vector<std::vector<double>> background_sample(const std::vector<std::vector<double>>& rows,
                                                   std::size_t max_rows, std::uint64_t seed) {
    if (max_rows == 0) throw ValidationError("background_sample requires max_rows >= 1");
    if (rows.size() <= max_rows) return rows;
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    rng::Stream stream(rng::SeedChain(seed).mix("shap_background").value());
    stream.shuffle(order);
    order.resize(max_rows);
    std::sort(order.begin(), order.end());
    std::vector<std::vector<double>> out;
    out.reserve(max_rows);
    for (std::size_t i : order) out.push_back(rows[i]);
    return out;
}

ShapExplanation explain(const ScoreFunction& f, std::span<const double> x,
                        const std::vector<std::vector<double>>& background,
                        const ShapConfig& cfg) {
    const std::size_t m = x.size();
    if (m == 0) throw ValidationError("explain requires at least one feature");
    if (m > 31) throw ValidationError("explain supports at most 31 features");
    if (background.empty()) throw ValidationError("explain requires a nonempty background");
    for (const auto& row : background) {
        if (row.size() != m) throw ValidationError("background dimension mismatch");
    }

    ShapExplanation result;
    result.phi.assign(m, 0.0);
    result.phi0 = coalition_value(f, x, background, 0u);
    const double fx = f(std::vector<double>(x.begin(), x.end()));
    const double excess = fx - result.phi0;

    if (m == 1) {
        result.phi[0] = excess;
        return result;
    }

    const bool exact = m <= 12;
    std::vector<Coalition> coalitions;
    if (exact) {
        const std::uint32_t full = (1u << m) - 1u;
        coalitions.reserve(full - 1);
        for (std::uint32_t mask = 1; mask < full; ++mask) {
            Coalition c;
            c.mask = mask;
            c.weight = shapley_kernel_weight(m, static_cast<std::size_t>(std::popcount(mask)));
            coalitions.push_back(c);
        }
    } else {
        if (cfg.coalition_budget < m + 2) {
            throw ValidationError("coalition budget too small: need at least feature count + 2");
        }
        // Size distribution p(s) proportional to the total kernel mass of
        // size-s coalitions, (m-1)/(s(m-s)); the subset is then uniform
        // given its size, so frequency-weighted samples reproduce the
        // kernel weighting in expectation.
        std::vector<double> size_cdf(m - 1);
        double mass = 0.0;
        for (std::size_t s = 1; s < m; ++s) {
            mass += 1.0 / (static_cast<double>(s) * static_cast<double>(m - s));
            size_cdf[s - 1] = mass;
        }
        rng::Stream stream(rng::SeedChain(cfg.seed).mix("shap_coalitions").value());
        std::vector<std::size_t> indices(m);
        coalitions.reserve(cfg.coalition_budget);
        for (std::size_t draw = 0; draw < cfg.coalition_budget; ++draw) {
            const double u = stream.uniform() * mass;
            std::size_t s = 1;
            while (s < m - 1 && size_cdf[s - 1] <= u) ++s;
            std::iota(indices.begin(), indices.end(), 0);
            // Partial Fisher-Yates: the first s entries are a uniform
            // s-subset.
            for (std::size_t i = 0; i < s; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(stream.uniform_int(m - i));
                std::swap(indices[i], indices[j]);
            }
            Coalition c;
            for (std::size_t i = 0; i < s; ++i) c.mask |= 1u << indices[i];
            c.weight = 1.0;
            coalitions.push_back(c);
        }
    }

    for (Coalition& c : coalitions) {
        c.value = coalition_value(f, x, background, c.mask);
    }

    // Constraint elimination: phi0 is fixed to v(empty) and the last
    // feature's phi is substituted from phi0 + sum(phi) = f(x), leaving an
    // unconstrained weighted least squares in m-1 unknowns.
    const std::size_t d = m - 1;
    Eigen::MatrixXd a(coalitions.size(), d);
    Eigen::VectorXd y(coalitions.size());
    Eigen::VectorXd w(coalitions.size());
    for (std::size_t r = 0; r < coalitions.size(); ++r) {
        const Coalition& c = coalitions[r];
        const double z_last = (c.mask >> d) & 1u ? 1.0 : 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            a(r, j) = ((c.mask >> j) & 1u ? 1.0 : 0.0) - z_last;
        }
        y[r] = c.value - result.phi0 - z_last * excess;
        w[r] = c.weight;
    }

    const Eigen::MatrixXd awa = a.transpose() * w.asDiagonal() * a;
    const Eigen::VectorXd awy = a.transpose() * (w.asDiagonal() * y);
    Eigen::VectorXd psi = awa.ldlt().solve(awy);

    const double residual = (awa * psi - awy).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + awy.lpNorm<Eigen::Infinity>();
    if (!psi.allFinite() || residual > 1e-8 * scale) {
        std::fprintf(stderr,
                     "warning: rank-deficient SHAP regression; using the minimum-norm "
                     "solution\n");
        const Eigen::VectorXd sqrt_w = w.cwiseSqrt();
        const Eigen::MatrixXd b = sqrt_w.asDiagonal() * a;
        const Eigen::VectorXd c = sqrt_w.asDiagonal() * y;
        psi = b.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(c);
    }

    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        result.phi[j] = psi[j];
        sum += psi[j];
    }
    result.phi[d] = excess - sum;
    return result;
}

ShapAggregate aggregate_shap(const std::vector<ShapExplanation>& per_sample,
                             const std::vector<int>& true_labels,
                             const std::vector<std::string>& feature_names) {
    if (per_sample.empty()) throw ValidationError("aggregate_shap requires at least one sample");
    if (per_sample.size() != true_labels.size()) {
        throw ValidationError("aggregate_shap: one true label per explained sample required");
    }
    const std::size_t m = feature_names.size();
    for (const auto& sample : per_sample) {
        if (sample.phi.size() != m) {
            throw ValidationError("aggregate_shap: attribution dimension mismatch");
        }
    }

    ShapAggregate agg;
    agg.n_samples = per_sample.size();
    for (int label : true_labels) {
        if (label == 1) ++agg.n_pass;
        else ++agg.n_fail;
    }

    std::vector<double> overall(m, 0.0), pass(m, 0.0), fail(m, 0.0);
    for (std::size_t i = 0; i < per_sample.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = std::abs(per_sample[i].phi[j]);
            overall[j] += v;
            (true_labels[i] == 1 ? pass[j] : fail[j]) += v;
        }
    }

    agg.rows.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        ShapAggregate::Row& row = agg.rows[j];
        row.feature = feature_names[j];
        row.mean_abs_overall = overall[j] / static_cast<double>(agg.n_samples);
        if (agg.n_pass > 0) row.mean_abs_pass = pass[j] / static_cast<double>(agg.n_pass);
        if (agg.n_fail > 0) row.mean_abs_fail = fail[j] / static_cast<double>(agg.n_fail);
    }
    std::stable_sort(agg.rows.begin(), agg.rows.end(),
                     [](const ShapAggregate::Row& a, const ShapAggregate::Row& b) {
                         return a.mean_abs_overall > b.mean_abs_overall;
                     });
    return agg;
}

} // namespace ofc
