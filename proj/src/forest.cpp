#include "model_impl.hpp"
#include "ofc/error.hpp"
#include "ofc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <mutex>
#include <numeric>
#include <vector>

namespace ofc::detail {

namespace {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 1;
};

struct Tree {
    std::vector<TreeNode> nodes;

    int predict(std::span<const double> x) const {
        int at = 0;
        while (nodes[at].feature >= 0) {
            at = x[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
        }
        return nodes[at].label;
    }
};

double impurity(std::size_t n_pass, std::size_t n_total, bool use_gini) {
    if (n_total == 0) return 0.0;
    const double p = static_cast<double>(n_pass) / static_cast<double>(n_total);
    if (use_gini) {
        return 1.0 - p * p - (1.0 - p) * (1.0 - p);
    }
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

int majority_label(const std::vector<std::size_t>& rows, const std::vector<int>& y) {
    std::size_t n_pass = 0;
    for (std::size_t r : rows) n_pass += static_cast<std::size_t>(y[r]);
    const std::size_t n_fail = rows.size() - n_pass;
    return n_pass >= n_fail ? 1 : 0;
}

struct SplitChoice {
    bool valid = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Best threshold on one feature for the rows of a node, or invalid when no
/// threshold separates the rows while keeping both children at min_leaf.
SplitChoice best_split_on_feature(const std::vector<std::vector<double>>& x,
                                  const std::vector<int>& y,
                                  const std::vector<std::size_t>& rows, int feature,
                                  std::size_t min_leaf, bool use_gini,
                                  double parent_impurity) {
    std::vector<std::pair<double, int>> ordered;
    ordered.reserve(rows.size());
    for (std::size_t r : rows) ordered.emplace_back(x[r][feature], y[r]);
    std::sort(ordered.begin(), ordered.end());

    const std::size_t n = ordered.size();
    std::size_t total_pass = 0;
    for (const auto& [v, label] : ordered) total_pass += static_cast<std::size_t>(label);

    SplitChoice choice;
    std::size_t left_pass = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pass += static_cast<std::size_t>(ordered[i].second);
        if (ordered[i].first == ordered[i + 1].first) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const double imp_left = impurity(left_pass, n_left, use_gini);
        const double imp_right = impurity(total_pass - left_pass, n_right, use_gini);
        const double gain = parent_impurity -
                            (static_cast<double>(n_left) * imp_left +
                             static_cast<double>(n_right) * imp_right) /
                                static_cast<double>(n);
        if (!choice.valid || gain > choice.gain) {
            choice.valid = true;
            choice.feature = feature;
            choice.threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
            choice.gain = gain;
        }
    }
    return choice;
}

Tree grow_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
               std::vector<std::size_t> root_rows, std::size_t mtry, std::size_t min_leaf,
               bool use_gini, std::size_t split_budget, rng::Stream& stream) {
    const std::size_t d = x.empty() ? 0 : x.front().size();
    Tree tree;
    struct Pending {
        int node;
        std::vector<std::size_t> rows;
    };
    std::deque<Pending> queue;
    tree.nodes.push_back(TreeNode{});
    queue.push_back({0, std::move(root_rows)});

    std::vector<std::size_t> feature_order(d);
    std::iota(feature_order.begin(), feature_order.end(), 0);

    while (!queue.empty()) {
        Pending item = std::move(queue.front());
        queue.pop_front();
        tree.nodes[item.node].label = majority_label(item.rows, y);

        std::size_t n_pass = 0;
        for (std::size_t r : item.rows) n_pass += static_cast<std::size_t>(y[r]);
        const bool pure = n_pass == 0 || n_pass == item.rows.size();
        if (pure || item.rows.size() < 2 * min_leaf || split_budget == 0) continue;

        const double parent_impurity = impurity(n_pass, item.rows.size(), use_gini);
        stream.shuffle(feature_order);

        // Scan the first mtry candidate features; if none yields a valid
        // split, keep drawing further features until one does or the list is
        // exhausted.
        SplitChoice best;
        std::size_t inspected = 0;
        for (std::size_t f : feature_order) {
            ++inspected;
            SplitChoice candidate = best_split_on_feature(x, y, item.rows, static_cast<int>(f),
                                                          min_leaf, use_gini, parent_impurity);
            if (candidate.valid && (!best.valid || candidate.gain > best.gain)) {
                best = candidate;
            }
            if (inspected >= mtry && best.valid) break;
        }
        if (!best.valid || best.gain <= 0.0) continue;

        --split_budget;
        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : item.rows) {
            (x[r][best.feature] <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        const int left_id = static_cast<int>(tree.nodes.size());
        const int right_id = left_id + 1;
        tree.nodes[item.node].feature = best.feature;
        tree.nodes[item.node].threshold = best.threshold;
        tree.nodes[item.node].left = left_id;
        tree.nodes[item.node].right = right_id;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        queue.push_back({left_id, std::move(left_rows)});
        queue.push_back({right_id, std::move(right_rows)});
    }
    return tree;
}

class ForestModel final : public ModelImpl {
public:
    std::vector<Tree> trees;

    ClassifierKind kind() const override { return ClassifierKind::RandomForest; }
    double threshold() const override { return 0.5; }

    double score(std::span<const double> x) const override {
        std::size_t votes_pass = 0;
        for (const Tree& tree : trees) votes_pass += static_cast<std::size_t>(tree.predict(x));
        return static_cast<double>(votes_pass) / static_cast<double>(trees.size());
    }

    nlohmann::json params_json() const override {
        nlohmann::json out = nlohmann::json::array();
        for (const Tree& tree : trees) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const TreeNode& node : tree.nodes) {
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right},
                                 {"label", node.label}});
            }
            out.push_back(std::move(nodes));
        }
        return {{"trees", std::move(out)}};
    }
};

void warn_mtry_clamped(std::size_t requested, std::size_t available) {
    static std::mutex mutex;
    static bool warned = false;
    std::lock_guard<std::mutex> lock(mutex);
    if (warned) return;
    warned = true;
    std::fprintf(stderr,
                 "warning: random forest variables-per-split %zu exceeds the %zu available "
                 "features; clamping\n",
                 requested, available);
}

} // namespace

std::unique_ptr<ModelImpl> fit_forest(const TrainingData& data, const HyperMap& hyper,
                                      std::uint64_t seed) {
    const std::size_t n = data.x.size();
    const std::size_t d = data.n_features;

    const double trees_value = hyper_number(hyper, "trees", 100.0);
    if (trees_value < 1.0 || trees_value != std::floor(trees_value)) {
        throw ValidationError("random forest requires a positive integer tree count");
    }
    const std::size_t n_trees = static_cast<std::size_t>(trees_value);

    const std::string criterion = hyper_string(hyper, "criterion", "gini");
    if (criterion != "gini" && criterion != "infogain") {
        throw ValidationError("random forest criterion must be 'gini' or 'infogain'");
    }
    const bool use_gini = criterion == "gini";

    const double min_leaf_value = hyper_number(hyper, "min_leaf", 1.0);
    if (min_leaf_value < 1.0 || min_leaf_value != std::floor(min_leaf_value)) {
        throw ValidationError("random forest requires a positive integer min leaf size");
    }
    const std::size_t min_leaf = static_cast<std::size_t>(min_leaf_value);

    double mtry_value = hyper_number(hyper, "mtry", std::ceil(std::sqrt(static_cast<double>(d))));
    if (mtry_value < 1.0 || mtry_value != std::floor(mtry_value)) {
        throw ValidationError("random forest requires a positive integer variables-per-split");
    }
    std::size_t mtry = static_cast<std::size_t>(mtry_value);
    if (mtry > d) {
        warn_mtry_clamped(mtry, d);
        mtry = d;
    }

    const std::string max_splits = hyper_string(hyper, "max_splits", "n");
    std::size_t split_budget;
    if (max_splits == "n") {
        split_budget = n;
    } else if (max_splits == "log2n") {
        split_budget = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n)))));
    } else {
        throw ValidationError("random forest max_splits must be 'n' or 'log2n'");
    }

    auto model = std::make_unique<ForestModel>();
    model->trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        rng::Stream stream(
            rng::SeedChain(seed).mix("forest_tree").mix(static_cast<std::uint64_t>(t)).value());
        std::vector<std::size_t> rows(n);
        if (n_trees == 1) {
            // A single tree fits the full sample so that, fully grown, it can
            // memorize distinct training points.
            std::iota(rows.begin(), rows.end(), 0);
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = stream.uniform_int(n);
        }
        model->trees.push_back(grow_tree(data.x, data.y, std::move(rows), mtry, min_leaf,
                                         use_gini, split_budget, stream));
    }
    return model;
}

std::unique_ptr<ModelImpl> load_forest(const nlohmann::json& params) {
    auto model = std::make_unique<ForestModel>();
    for (const auto& tree_json : params.at("trees")) {
        Tree tree;
        for (const auto& node_json : tree_json) {
            TreeNode node;
            node.feature = node_json.at("feature").get<int>();
            node.threshold = node_json.at("threshold").get<double>();
            node.left = node_json.at("left").get<int>();
            node.right = node_json.at("right").get<int>();
            node.label = node_json.at("label").get<int>();
            tree.nodes.push_back(node);
        }
        model->trees.push_back(std::move(tree));
    }
    return model;
}

} // namespace ofc::detail
