#include "ofc/error.hpp"
#include "ofc/metrics.hpp"
#include "ofc/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace ofc;

namespace {

/// O(n^2) Mann-Whitney recomputation: count positive/negative pairs,
/// ties worth half.
double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double favorable = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) favorable += 1.0;
            else if (scores[i] == scores[j]) favorable += 0.5;
        }
    }
    return favorable / static_cast<double>(pairs);
}

} // namespace

TEST_CASE("perfectly separated scores reach AUC 1") {
    const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
    const std::vector<int> labels{1, 1, 0, 0};
    CHECK(auc(scores, labels) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all-equal scores give AUC one half") {
    const std::vector<double> scores{0.5, 0.5, 0.5, 0.5, 0.5};
    const std::vector<int> labels{1, 0, 1, 0, 1};
    CHECK(auc(scores, labels) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("AUC matches an O(n^2) pairwise-counted oracle on random data") {
    rng::Stream stream(61);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 200; ++i) {
            labels.push_back(stream.uniform() < 0.4 ? 1 : 0);
            // Quantize to force score ties across class boundaries.
            scores.push_back(std::floor(stream.uniform() * 20.0) / 20.0 +
                             0.1 * labels.back());
        }
        CHECK(auc(scores, labels) ==
              doctest::Approx(pairwise_auc(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("AUC is invariant under strictly monotone score transforms") {
    rng::Stream stream(67);
    std::vector<double> scores, transformed;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        labels.push_back(i % 3 == 0 ? 1 : 0);
        scores.push_back(stream.normal());
        transformed.push_back(std::exp(scores.back() * 0.5) + 2.0);
    }
    CHECK(auc(scores, labels) == auc(transformed, labels));
}

TEST_CASE("negating untied scores flips AUC around one half") {
    rng::Stream stream(71);
    std::vector<double> scores, negated;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        labels.push_back(i % 2);
        scores.push_back(stream.uniform());
        negated.push_back(-scores.back());
    }
    CHECK(auc(scores, labels) + auc(negated, labels) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-class label sets make AUC undefined") {
    const std::vector<double> scores{0.2, 0.8};
    const std::vector<int> pass_only{1, 1};
    const std::vector<int> fail_only{0, 0};
    CHECK_THROWS_AS(auc(scores, pass_only), UndefinedMetricError);
    CHECK_THROWS_AS(auc(scores, fail_only), UndefinedMetricError);
}

TEST_CASE("auc validates its inputs") {
    const std::vector<double> scores{0.2, 0.8};
    const std::vector<int> labels{1};
    CHECK_THROWS_AS(auc(scores, labels), ValidationError);
}

TEST_CASE("confusion counts follow the worked example") {
    // 20 instances: tp 9, fn 1, tn 8, fp 2.
    std::vector<int> predictions, labels;
    auto add = [&](int pred, int label, int count) {
        for (int i = 0; i < count; ++i) {
            predictions.push_back(pred);
            labels.push_back(label);
        }
    };
    add(1, 1, 9);
    add(0, 1, 1);
    add(0, 0, 8);
    add(1, 0, 2);
    const ConfusionCounts counts = confusion(predictions, labels);
    CHECK(counts.tp == 9);
    CHECK(counts.fn == 1);
    CHECK(counts.tn == 8);
    CHECK(counts.fp == 2);

    const MetricSet m = derive_metrics(counts);
    CHECK(m.sensitivity.value() == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(m.specificity.value() == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(m.ppv.value() == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
    CHECK(m.accuracy.value() == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(m.f1.value() == doctest::Approx(18.0 / 21.0).epsilon(1e-12));
    CHECK_FALSE(m.auc.has_value());
}

TEST_CASE("ppv is undefined when nothing is predicted positive") {
    ConfusionCounts counts;
    counts.tn = 5;
    counts.fn = 3;
    const MetricSet m = derive_metrics(counts);
    CHECK_FALSE(m.ppv.has_value());
    CHECK(m.specificity.value() == doctest::Approx(1.0));
    CHECK(m.accuracy.value() == doctest::Approx(5.0 / 8.0));
    // f1 = 2tp/(2tp+fp+fn) = 0/3 stays defined at 0.
    CHECK(m.f1.value() == doctest::Approx(0.0));
}

TEST_CASE("perfect predictions score 1 everywhere") {
    ConfusionCounts counts;
    counts.tp = 7;
    counts.tn = 3;
    const MetricSet m = derive_metrics(counts);
    CHECK(m.f1.value() == doctest::Approx(1.0));
    CHECK(m.accuracy.value() == doctest::Approx(1.0));
    CHECK(m.sensitivity.value() == doctest::Approx(1.0));
    CHECK(m.specificity.value() == doctest::Approx(1.0));
    CHECK(m.ppv.value() == doctest::Approx(1.0));
}

TEST_CASE("f1 is zero exactly when there are no true positives") {
    ConfusionCounts counts;
    counts.fp = 2;
    counts.fn = 3;
    counts.tn = 5;
    CHECK(derive_metrics(counts).f1.value() == doctest::Approx(0.0));

    counts.tp = 1;
    CHECK(derive_metrics(counts).f1.value() > 0.0);
}

TEST_CASE("aggregating identical shuffles gives zero spread") {
    MetricSet m;
    m.auc = 0.9;
    m.f1 = 0.8;
    m.accuracy = 0.7;
    m.sensitivity = 0.6;
    m.specificity = 0.5;
    m.ppv = 0.4;
    const MetricAggregate agg = aggregate(std::vector<MetricSet>(10, m));
    for (int i = 0; i < 6; ++i) {
        CHECK(agg[i].stddev == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(agg[i].used == 10);
        CHECK(agg[i].skipped == 0);
        CHECK(agg[i].mean == doctest::Approx(metric_field(m, i).value()).epsilon(1e-12));
    }
    CHECK(agg.per_shuffle.size() == 10);
}

TEST_CASE("aggregate of 0.8 and 1.0 has mean 0.9 and sample std about 0.1414") {
    MetricSet lo, hi;
    lo.auc = 0.8;
    hi.auc = 1.0;
    const MetricAggregate agg = aggregate({lo, hi});
    CHECK(agg[0].mean == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(agg[0].stddev == doctest::Approx(std::sqrt(0.02)).epsilon(1e-9));
    CHECK(agg[0].used == 2);
}

TEST_CASE("one undefined shuffle among ten is skipped, not zeroed") {
    std::vector<MetricSet> shuffles;
    for (int i = 0; i < 10; ++i) {
        MetricSet m;
        if (i != 4) m.ppv = 0.5 + 0.01 * i;
        shuffles.push_back(m);
    }
    const MetricAggregate agg = aggregate(shuffles);
    const int ppv_index = 5;
    CHECK(agg[ppv_index].used == 9);
    CHECK(agg[ppv_index].skipped == 1);
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) {
        if (i != 4) sum += 0.5 + 0.01 * i;
    }
    CHECK(agg[ppv_index].mean == doctest::Approx(sum / 9.0).epsilon(1e-12));
}

TEST_CASE("metric names line up with metric fields") {
    MetricSet m;
    m.auc = 1.0;
    m.f1 = 2.0;
    m.accuracy = 3.0;
    m.sensitivity = 4.0;
    m.specificity = 5.0;
    m.ppv = 6.0;
    CHECK(std::string(kMetricNames[0]) == "auc");
    CHECK(std::string(kMetricNames[5]) == "ppv");
    for (int i = 0; i < 6; ++i) {
        CHECK(metric_field(m, i).value() == doctest::Approx(i + 1.0));
    }
}
