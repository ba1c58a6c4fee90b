#include "ofc/classifiers.hpp"
#include "ofc/error.hpp"
#include "ofc/rng.hpp"
#include "ofc/tabular.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace ofc;

namespace {

Table labeled_table(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    std::vector<ColumnSpec> schema{{"patient_id", ColumnKind::Identifier, ""}};
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
        schema.push_back({"f" + std::to_string(c), ColumnKind::Numeric, ""});
    }
    schema.push_back({"outcome", ColumnKind::Outcome, ""});
    Table t(schema);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<Cell> cells;
        cells.emplace_back("P" + std::to_string(r));
        for (double v : rows[r]) cells.emplace_back(v);
        cells.emplace_back(static_cast<double>(labels[r]));
        RowMeta meta;
        meta.row_id = static_cast<std::int64_t>(r);
        t.append_row(std::move(cells), meta);
    }
    return t;
}

/// Two Gaussian blobs centered at 0 and at `separation` standard
/// deviations along every axis; class 1 is the shifted blob.
Table blob_table(int per_class, int dims, double separation, std::uint64_t seed) {
    rng::Stream stream(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int cls = 0; cls < 2; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> row;
            for (int d = 0; d < dims; ++d) {
                row.push_back(stream.normal() + (cls == 1 ? separation : 0.0));
            }
            rows.push_back(std::move(row));
            labels.push_back(cls);
        }
    }
    return labeled_table(rows, labels);
}

std::vector<std::string> feature_list(int dims) {
    std::vector<std::string> names;
    for (int d = 0; d < dims; ++d) names.push_back("f" + std::to_string(d));
    return names;
}

std::vector<double> table_row(const Table& t, std::size_t r, const std::vector<std::string>& fs) {
    std::vector<double> out;
    for (const auto& name : fs) out.push_back(t.number_at(r, t.column_index(name)));
    return out;
}

double train_accuracy(const TrainedModel& model, const Table& t) {
    const auto fs = model.features();
    int correct = 0;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (model.predict(table_row(t, r, fs)) == static_cast<int>(t.outcome01(r))) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(t.n_rows());
}

} // namespace

TEST_CASE("lucck_kernel closed-form values") {
    CHECK(lucck_kernel(0.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lucck_kernel(1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lucck_kernel(2.0, 0.5, 2.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(lucck_kernel(-1.0, 1.0, 1.0) == lucck_kernel(1.0, 1.0, 1.0));
    CHECK_THROWS_AS(lucck_kernel(1.0, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(lucck_kernel(1.0, 1.0, -0.5), ValidationError);
}

TEST_CASE("lucck_similarity multiplies per-coordinate kernels") {
    const std::vector<double> x{1.0, 2.0};
    const LucckParams p2 = LucckParams::global(1.0, 1.0, 2);
    CHECK(lucck_similarity(x, x, p2) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> y{2.0, 3.0}; // difference (1, 1)
    CHECK(lucck_similarity(x, y, p2) == doctest::Approx(0.25).epsilon(1e-12));

    const LucckParams p3 = LucckParams::global(1.0, 0.5, 3);
    const std::vector<double> a{0.0, 0.0, 5.0};
    const std::vector<double> b{1.0, 2.0, 5.0}; // difference (1, 2, 0)
    CHECK(lucck_similarity(a, b, p3) ==
          doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));

    CHECK_THROWS_AS(lucck_similarity(x, a, p2), ValidationError);
}

TEST_CASE("lucck_class_affinity sums similarities over the stored class") {
    const LucckParams base = LucckParams::global(1.0, 1.0, 2);
    const std::vector<double> x{0.5, -0.5};
    CHECK(lucck_class_affinity(x, {{0.5, -0.5}}, base) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lucck_class_affinity(x, {{0.5, -0.5}, {0.5, -0.5}}, base) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(lucck_class_affinity(x, {}, base), ValidationError);

    rng::Stream stream(81);
    std::vector<std::vector<double>> cls;
    for (int i = 0; i < 5; ++i) cls.push_back({stream.normal(), stream.normal()});
    double direct = 0.0;
    for (const auto& s : cls) direct += lucck_similarity(x, s, base);
    CHECK(lucck_class_affinity(x, cls, base) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("lucck_class_affinity matches direct summation in ten dimensions") {
    rng::Stream stream(83);
    const LucckParams params = LucckParams::global(0.7, 1.3, 10);
    std::vector<std::vector<double>> cls;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> row;
        for (int d = 0; d < 10; ++d) row.push_back(stream.normal());
        cls.push_back(std::move(row));
    }
    for (int probe = 0; probe < 10; ++probe) {
        std::vector<double> x;
        for (int d = 0; d < 10; ++d) x.push_back(stream.normal());
        double direct = 0.0;
        for (const auto& s : cls) {
            double sim = 1.0;
            for (int d = 0; d < 10; ++d) {
                const double diff = x[d] - s[d];
                sim *= std::pow(1.0 + 0.7 * diff * diff, -1.3);
            }
            direct += sim;
        }
        CHECK(lucck_class_affinity(x, cls, params) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("lucck predicts its own training points and resolves exact ties to pass") {
    const Table train = labeled_table(
        {{0.0, 0.0}, {0.2, 0.1}, {5.0, 5.0}, {5.2, 4.9}}, {0, 0, 1, 1});
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Lucck;
    spec.hyperparameters = {{"lambda", 1.0}, {"theta", 1.0}};
    const TrainedModel model = fit(spec, train, feature_list(2));

    auto [label_pass, score_pass] = lucck_predict(model, std::vector<double>{5.0, 5.0});
    CHECK(label_pass == 1);
    CHECK(score_pass > 0.5);
    auto [label_fail, score_fail] = lucck_predict(model, std::vector<double>{0.0, 0.0});
    CHECK(label_fail == 0);
    CHECK(score_fail < 0.5);

    // A mirror-symmetric training set makes the midpoint an exact tie.
    const Table mirrored = labeled_table({{-1.0, 0.0}, {-2.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}},
                                         {0, 0, 1, 1});
    const TrainedModel tied = fit(spec, mirrored, feature_list(2));
    auto [label_tie, score_tie] = lucck_predict(tied, std::vector<double>{0.0, 0.0});
    CHECK(label_tie == 1);
    CHECK(score_tie == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lucck prediction agrees with an affinity argmax oracle") {
    const Table train = blob_table(10, 3, 2.0, 87);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Lucck;
    spec.hyperparameters = {{"lambda", 0.9}, {"theta", 1.1}};
    const auto fs = feature_list(3);
    const TrainedModel model = fit(spec, train, fs);

    const LucckParams params = LucckParams::global(0.9, 1.1, 3);
    std::vector<std::vector<double>> pass, fail;
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        (train.outcome01(r) == 1.0 ? pass : fail).push_back(table_row(train, r, fs));
    }

    rng::Stream stream(89);
    for (int probe = 0; probe < 20; ++probe) {
        const std::vector<double> x{stream.normal() + 1.0, stream.normal() + 1.0,
                                    stream.normal() + 1.0};
        const double r_pass = lucck_class_affinity(x, pass, params);
        const double r_fail = lucck_class_affinity(x, fail, params);
        const int expected = r_pass >= r_fail ? 1 : 0;
        auto [label, score] = lucck_predict(model, x);
        CHECK(label == expected);
        CHECK(model.predict(x) == expected);
        CHECK((score > 0.5) == (r_pass > r_fail));
    }
}

TEST_CASE("lucck rejects non-positive hyperparameters at fit time") {
    const Table train = blob_table(5, 2, 3.0, 91);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Lucck;
    spec.hyperparameters = {{"lambda", -1.0}, {"theta", 1.0}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    spec.hyperparameters = {{"lambda", 1.0}, {"theta", 0.0}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
}

TEST_CASE("naive bayes separates well-separated blobs") {
    const Table train = blob_table(50, 4, 6.0, 93);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::NaiveBayes;
    const TrainedModel model = fit(spec, train, feature_list(4));
    CHECK(train_accuracy(model, train) >= 0.95);

    // Scores sit on the correct side of the probabilistic threshold.
    CHECK(model.threshold() == doctest::Approx(0.5));
    const double far_pass = model.score(std::vector<double>{6.0, 6.0, 6.0, 6.0});
    const double far_fail = model.score(std::vector<double>{0.0, 0.0, 0.0, 0.0});
    CHECK(far_pass > 0.99);
    CHECK(far_fail < 0.01);
}

TEST_CASE("logistic regression stays finite with a constant feature") {
    rng::Stream stream(97);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        labels.push_back(i % 2);
        rows.push_back({1.0, stream.normal() + 2.0 * labels.back()});
    }
    ClassifierSpec spec;
    spec.kind = ClassifierKind::LogisticRegression;
    spec.hyperparameters = {{"c", 1.0}};
    const TrainedModel model = fit(spec, labeled_table(rows, labels), feature_list(2));
    for (const auto& row : rows) {
        const double s = model.score(row);
        CHECK(std::isfinite(s));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("logistic regression satisfies its own optimality condition") {
    const Table train = blob_table(30, 2, 2.0, 101);
    const double c = 0.5;
    ClassifierSpec spec;
    spec.kind = ClassifierKind::LogisticRegression;
    spec.hyperparameters = {{"c", c}};
    const auto fs = feature_list(2);
    const TrainedModel model = fit(spec, train, fs);

    const nlohmann::json params = model.to_json().at("params");
    const std::vector<double> w = params.at("weights").get<std::vector<double>>();
    const double bias = params.at("bias").get<double>();

    // Gradient of the penalized log loss at the reported optimum.
    std::vector<double> grad(w.size() + 1, 0.0);
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        const std::vector<double> x = table_row(train, r, fs);
        double z = bias;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double resid = p - train.outcome01(r);
        for (std::size_t j = 0; j < w.size(); ++j) grad[j] += resid * x[j];
        grad.back() += resid;
    }
    for (std::size_t j = 0; j < w.size(); ++j) grad[j] += w[j] / c;
    for (double g : grad) CHECK(std::abs(g) <= 1e-5);
}

TEST_CASE("logistic scores cross one half at the decision boundary") {
    // One feature, symmetric labels around x = 1.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        const double offset = 0.2 + 0.1 * i;
        rows.push_back({1.0 - offset});
        labels.push_back(0);
        rows.push_back({1.0 + offset});
        labels.push_back(1);
    }
    ClassifierSpec spec;
    spec.kind = ClassifierKind::LogisticRegression;
    const TrainedModel model = fit(spec, labeled_table(rows, labels), feature_list(1));
    CHECK(model.score(std::vector<double>{1.0}) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(model.score(std::vector<double>{3.0}) > 0.9);
    CHECK(model.score(std::vector<double>{-1.0}) < 0.1);
}

TEST_CASE("svm training predictions agree with score signs") {
    const Table train = blob_table(50, 3, 4.0, 103);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Svm;
    spec.hyperparameters = {{"c", 1.0}, {"kernel", std::string("rbf")}, {"gamma", 0.5}};
    const auto fs = feature_list(3);
    const TrainedModel model = fit(spec, train, fs);
    CHECK(model.threshold() == doctest::Approx(0.0));

    int correct = 0;
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        const std::vector<double> x = table_row(train, r, fs);
        const double s = model.score(x);
        const int pred = model.predict(x);
        CHECK(pred == (s >= 0.0 ? 1 : 0));
        if (pred == static_cast<int>(train.outcome01(r))) ++correct;
    }
    CHECK(correct >= 95);
}

TEST_CASE("linear svm separates linearly separable data") {
    const Table train = blob_table(25, 2, 5.0, 107);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Svm;
    spec.hyperparameters = {{"c", 10.0}, {"kernel", std::string("linear")}};
    const TrainedModel model = fit(spec, train, feature_list(2));
    CHECK(train_accuracy(model, train) == doctest::Approx(1.0));
}

TEST_CASE("svm rejects invalid hyperparameters") {
    const Table train = blob_table(5, 2, 3.0, 109);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Svm;
    spec.hyperparameters = {{"c", -2.0}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    spec.hyperparameters = {{"c", 1.0}, {"kernel", std::string("poly")}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    spec.hyperparameters = {{"c", 1.0}, {"kernel", std::string("rbf")}, {"gamma", 0.0}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
}

TEST_CASE("a single fully grown tree memorizes distinct training points") {
    rng::Stream stream(113);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        rows.push_back({stream.normal(), stream.normal(), stream.normal()});
        labels.push_back(stream.uniform() < 0.5 ? 1 : 0);
    }
    if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
    if (std::count(labels.begin(), labels.end(), 0) == 0) labels[0] = 0;
    const Table train = labeled_table(rows, labels);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::RandomForest;
    spec.hyperparameters = {{"trees", 1.0},
                            {"min_leaf", 1.0},
                            {"mtry", 3.0},
                            {"criterion", std::string("gini")},
                            {"max_splits", std::string("n")}};
    const TrainedModel model = fit(spec, train, feature_list(3));
    CHECK(train_accuracy(model, train) == doctest::Approx(1.0));
}

TEST_CASE("forests are deterministic in their seed") {
    const Table train = blob_table(25, 3, 1.0, 127);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::RandomForest;
    spec.hyperparameters = {{"trees", 15.0}, {"min_leaf", 2.0}};
    spec.seed = 5;
    const TrainedModel a = fit(spec, train, feature_list(3));
    const TrainedModel b = fit(spec, train, feature_list(3));
    rng::Stream stream(131);
    bool any_difference = false;
    for (int probe = 0; probe < 20; ++probe) {
        const std::vector<double> x{stream.normal(), stream.normal(), stream.normal()};
        CHECK(a.score(x) == b.score(x));
    }
    spec.seed = 6;
    const TrainedModel c = fit(spec, train, feature_list(3));
    for (int probe = 0; probe < 20; ++probe) {
        const std::vector<double> x{stream.normal(), stream.normal(), stream.normal()};
        if (a.score(x) != c.score(x)) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("forest clamps an oversized mtry instead of failing") {
    const Table train = blob_table(15, 2, 3.0, 137);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::RandomForest;
    spec.hyperparameters = {{"trees", 5.0}, {"mtry", 24.0}};
    const TrainedModel model = fit(spec, train, feature_list(2));
    CHECK(model.fitted());
    CHECK(train_accuracy(model, train) >= 0.9);
}

TEST_CASE("forest rejects invalid hyperparameters") {
    const Table train = blob_table(5, 2, 3.0, 139);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::RandomForest;
    spec.hyperparameters = {{"trees", 0.0}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    spec.hyperparameters = {{"trees", 2.5}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    spec.hyperparameters = {{"trees", 5.0}, {"criterion", std::string("entropy")}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    spec.hyperparameters = {{"trees", 5.0}, {"max_splits", std::string("all")}};
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
}

TEST_CASE("predict always matches score against threshold") {
    const Table train = blob_table(20, 3, 2.5, 149);
    rng::Stream stream(151);
    for (ClassifierKind kind :
         {ClassifierKind::NaiveBayes, ClassifierKind::LogisticRegression, ClassifierKind::Svm,
          ClassifierKind::RandomForest, ClassifierKind::Lucck}) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.seed = 3;
        const TrainedModel model = fit(spec, train, feature_list(3));
        for (int probe = 0; probe < 25; ++probe) {
            const std::vector<double> x{stream.normal() + 1.0, stream.normal() + 1.0,
                                        stream.normal() + 1.0};
            const double s = model.score(x);
            CHECK(model.predict(x) == (s >= model.threshold() ? 1 : 0));
        }
    }
}

TEST_CASE("serialized models score identically after reload") {
    const Table train = blob_table(20, 3, 2.0, 157);
    rng::Stream stream(163);
    for (ClassifierKind kind :
         {ClassifierKind::NaiveBayes, ClassifierKind::LogisticRegression, ClassifierKind::Svm,
          ClassifierKind::RandomForest, ClassifierKind::Lucck}) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.seed = 11;
        if (kind == ClassifierKind::Lucck) {
            spec.hyperparameters = {{"lambda", 0.8}, {"theta", 1.2}};
        }
        const TrainedModel model = fit(spec, train, feature_list(3));
        const TrainedModel reloaded = TrainedModel::from_json(model.to_json());
        CHECK(reloaded.kind() == kind);
        CHECK(reloaded.features() == model.features());
        CHECK(reloaded.training_fingerprint() == model.training_fingerprint());
        for (int probe = 0; probe < 20; ++probe) {
            const std::vector<double> x{stream.normal(), stream.normal(), stream.normal()};
            CHECK(reloaded.score(x) == model.score(x));
            CHECK(reloaded.predict(x) == model.predict(x));
        }
    }
}

TEST_CASE("single-class training data is rejected for every kind") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    rng::Stream stream(167);
    for (int i = 0; i < 10; ++i) {
        rows.push_back({stream.normal(), stream.normal()});
        labels.push_back(1);
    }
    const Table train = labeled_table(rows, labels);
    for (ClassifierKind kind :
         {ClassifierKind::NaiveBayes, ClassifierKind::LogisticRegression, ClassifierKind::Svm,
          ClassifierKind::RandomForest, ClassifierKind::Lucck}) {
        ClassifierSpec spec;
        spec.kind = kind;
        CHECK_THROWS_AS(fit(spec, train, feature_list(2)), ValidationError);
    }
}

TEST_CASE("fit refuses test-tagged rows") {
    Table train = blob_table(10, 2, 3.0, 173);
    train.meta(2).set_tag = SetTag::Test;
    ClassifierSpec spec;
    spec.kind = ClassifierKind::NaiveBayes;
    CHECK_THROWS_AS(fit(spec, train, feature_list(2)), LeakageError);
}

TEST_CASE("classifier kind names round-trip") {
    for (ClassifierKind kind :
         {ClassifierKind::NaiveBayes, ClassifierKind::LogisticRegression, ClassifierKind::Svm,
          ClassifierKind::RandomForest, ClassifierKind::Lucck}) {
        CHECK(classifier_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(classifier_kind_from_string("boosting"), ParseError);
}
