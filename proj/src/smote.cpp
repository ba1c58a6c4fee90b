#include "ofc/smote.hpp"

#include "ofc/error.hpp"
#include "ofc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ofc {

Table smote_enrich(const Table& train, const SmoteConfig& cfg) {
    require_no_test_rows(train, "smote_enrich");
    if (cfg.k_neighbors < 1) throw ValidationError("k_neighbors must be >= 1");

    const std::vector<int> labels = train.labels01();
    std::size_t n_pass = 0;
    for (int y : labels) n_pass += static_cast<std::size_t>(y);
    const std::size_t n_fail = labels.size() - n_pass;
    if (n_pass == 0 || n_fail == 0) {
        throw ValidationError("smote_enrich requires both classes in the training data");
    }

    const int minority_label = n_pass < n_fail ? 1 : 0;
    std::vector<std::size_t> minority_rows;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] == minority_label) minority_rows.push_back(r);
    }
    const std::size_t need =
        (minority_label == 1) ? n_fail - n_pass : n_pass - n_fail;

    Table out = train.subset([&] {
        std::vector<std::size_t> all(train.n_rows());
        for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
        return all;
    }());
    if (need == 0) return out;

    if (minority_rows.size() < 2) {
        throw ValidationError("smote_enrich requires at least 2 minority samples");
    }

    const std::vector<std::string> features = train.feature_names();
    const std::vector<std::vector<double>> x = train.matrix(features);
    std::vector<std::size_t> feature_cols;
    for (const auto& name : features) feature_cols.push_back(train.column_index(name));

    const std::size_t m = minority_rows.size();
    const int k = std::min<int>(cfg.k_neighbors, static_cast<int>(m) - 1);

    // k nearest minority neighbors per minority row; ties by row index.
    std::vector<std::vector<std::size_t>> neighbors(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(m - 1);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            const auto& a = x[minority_rows[i]];
            const auto& b = x[minority_rows[j]];
            for (std::size_t f = 0; f < a.size(); ++f) {
                const double d = a[f] - b[f];
                d2 += d * d;
            }
            dist.emplace_back(d2, minority_rows[j]);
        }
        std::sort(dist.begin(), dist.end());
        neighbors[i].reserve(static_cast<std::size_t>(k));
        for (int t = 0; t < k; ++t) neighbors[i].push_back(dist[static_cast<std::size_t>(t)].second);
    }

    std::vector<std::size_t> row_of_minority(train.n_rows(), 0);
    for (std::size_t i = 0; i < m; ++i) row_of_minority[minority_rows[i]] = i;

    rng::Stream stream(cfg.seed);
    for (std::size_t s = 0; s < need; ++s) {
        const std::size_t i = s % m; // cycle through minority rows
        const std::size_t base_row = minority_rows[i];
        const std::size_t nn_row =
            neighbors[i][static_cast<std::size_t>(stream.uniform_int(static_cast<std::uint64_t>(k)))];
        const double u = stream.uniform();

        std::vector<Cell> cells = train.row(base_row);
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const double a = x[base_row][f];
            const double b = x[nn_row][f];
            cells[feature_cols[f]] = a + u * (b - a);
        }
        RowMeta meta = train.meta(base_row);
        meta.synthetic = true;
        out.append_row(std::move(cells), meta);
    }
    return out;
}

} // namespace ofc
