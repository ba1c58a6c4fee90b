#include "ofc/mrmr.hpp"

#include "ofc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace ofc {

std::vector<int> equal_frequency_bins(std::span<const double> x, int bins) {
    if (bins < 2) throw ValidationError("bins must be >= 2");

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    if (sorted.size() <= static_cast<std::size_t>(bins)) {
        // Few distinct values: one level per value.
        std::vector<int> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = static_cast<int>(
                std::lower_bound(sorted.begin(), sorted.end(), x[i]) - sorted.begin());
        }
        return out;
    }

    // Order-statistic edges at i/bins quantiles of the full sample.
    std::vector<double> all(x.begin(), x.end());
    std::sort(all.begin(), all.end());
    std::vector<double> edges;
    for (int i = 1; i < bins; ++i) {
        const std::size_t pos = (all.size() * static_cast<std::size_t>(i)) / bins;
        edges.push_back(all[pos]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<int> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = static_cast<int>(
            std::lower_bound(edges.begin(), edges.end(), x[i]) - edges.begin());
    }
    return out;
}

MiEstimate mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    if (x.size() != y.size()) {
        throw ValidationError("mutual_information requires equal-length sequences");
    }
    if (x.size() < 2) throw ValidationError("mutual_information requires >= 2 samples");
    if (bins < 2) throw ValidationError("bins must be >= 2");

    const std::vector<int> bx = equal_frequency_bins(x, bins);
    const std::vector<int> by = equal_frequency_bins(y, bins);
    const int kx = *std::max_element(bx.begin(), bx.end()) + 1;
    const int ky = *std::max_element(by.begin(), by.end()) + 1;

    const std::size_t n = x.size();
    std::vector<double> joint(static_cast<std::size_t>(kx) * ky, 0.0);
    std::vector<double> px(kx, 0.0);
    std::vector<double> py(ky, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(bx[i]) * ky + by[i]] += 1.0;
        px[bx[i]] += 1.0;
        py[by[i]] += 1.0;
    }
    const double nd = static_cast<double>(n);
    double mi = 0.0;
    for (int a = 0; a < kx; ++a) {
        for (int b = 0; b < ky; ++b) {
            const double nab = joint[static_cast<std::size_t>(a) * ky + b];
            if (nab == 0.0) continue;
            mi += (nab / nd) * std::log(nab * nd / (px[a] * py[b]));
        }
    }
    // Clamp the tiny negatives that round-off can produce.
    return {std::max(mi, 0.0), bins};
}

FeatureRanking mrmr_rank(const Table& table, const std::vector<std::string>& candidate_features,
                         int bins) {
    require_no_test_rows(table, "mrmr_rank");
    if (candidate_features.empty()) {
        throw ValidationError("mrmr_rank requires a nonempty candidate set");
    }

    const std::size_t n = table.n_rows();
    std::vector<double> outcome(n);
    for (std::size_t r = 0; r < n; ++r) outcome[r] = table.outcome01(r);

    const std::size_t m = candidate_features.size();
    std::vector<std::vector<double>> cols(m, std::vector<double>(n));
    for (std::size_t f = 0; f < m; ++f) {
        const std::size_t j = table.column_index(candidate_features[f]);
        for (std::size_t r = 0; r < n; ++r) cols[f][r] = table.number_at(r, j);
    }

    std::vector<double> relevance(m);
    for (std::size_t f = 0; f < m; ++f) {
        relevance[f] = mutual_information(cols[f], outcome, bins).value;
    }

    // Pairwise redundancy cache, filled lazily.
    std::vector<std::vector<double>> redundancy(m, std::vector<double>(m, -1.0));
    auto pair_mi = [&](std::size_t a, std::size_t b) {
        if (redundancy[a][b] < 0.0) {
            const double v = mutual_information(cols[a], cols[b], bins).value;
            redundancy[a][b] = v;
            redundancy[b][a] = v;
        }
        return redundancy[a][b];
    };

    FeatureRanking ranking;
    std::vector<bool> selected(m, false);
    std::vector<std::size_t> chosen;
    for (std::size_t step = 0; step < m; ++step) {
        double best_score = -std::numeric_limits<double>::infinity();
        std::size_t best = m;
        for (std::size_t f = 0; f < m; ++f) {
            if (selected[f]) continue;
            double score = relevance[f];
            if (!chosen.empty()) {
                double red = 0.0;
                for (std::size_t s : chosen) red += pair_mi(f, s);
                score -= red / static_cast<double>(chosen.size());
            }
            if (score > best_score) { // strict: ties keep the earlier candidate
                best_score = score;
                best = f;
            }
        }
        selected[best] = true;
        chosen.push_back(best);
        ranking.ordered.emplace_back(candidate_features[best], best_score);
    }
    return ranking;
}

int elbow_select(const std::vector<std::pair<int, double>>& performance_curve) {
    if (performance_curve.size() < 3) {
        throw ValidationError("elbow_select requires at least 3 curve points");
    }
    for (std::size_t i = 1; i < performance_curve.size(); ++i) {
        if (performance_curve[i].first <= performance_curve[i - 1].first) {
            throw ValidationError("elbow_select requires strictly increasing k");
        }
    }

    const double x0 = performance_curve.front().first;
    const double y0 = performance_curve.front().second;
    const double x1 = performance_curve.back().first;
    const double y1 = performance_curve.back().second;
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double chord = std::sqrt(dx * dx + dy * dy);

    int best_k = performance_curve[1].first;
    double best_dist = -1.0;
    for (std::size_t i = 1; i + 1 < performance_curve.size(); ++i) {
        const double px = performance_curve[i].first - x0;
        const double py = performance_curve[i].second - y0;
        const double dist = std::abs(dx * py - dy * px) / chord;
        if (dist > best_dist) { // strict: ties keep the smaller k
            best_dist = dist;
            best_k = performance_curve[i].first;
        }
    }
    return best_k;
}

} // namespace ofc
