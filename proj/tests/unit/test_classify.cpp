#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "origami/classify.hpp"
#include "origami/error.hpp"

using namespace origami;

namespace {

// Seven-emotion confusion matrix (rows true, columns predicted): anger,
// contempt, disgust, fear, happy, sadness, surprise.
Confusion emotion_confusion() {
    return {{38, 2, 3, 0, 0, 2, 0},  {1, 15, 0, 0, 1, 1, 0}, {5, 0, 54, 0, 0, 0, 0}, {0, 0, 0, 19, 4, 0, 2},
            {0, 2, 0, 1, 66, 0, 0},  {3, 0, 1, 1, 1, 22, 0}, {0, 2, 0, 0, 1, 0, 80}};
}

Dataset xor_data() {
    Dataset d;
    d.features = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    d.labels = {0, 0, 1, 1};
    return d;
}

Dataset blobs(std::mt19937_64& rng, int classes, int per_class, int dim, double spread) {
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset d;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> row(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] = spread * g(rng) + (j % classes == c ? 2.0 : 0.0);
            d.features.push_back(row);
            d.labels.push_back(c * 10);
        }
    return d;
}

}  // namespace

TEST_CASE("kernel names") {
    CHECK(parse_kernel("quadratic") == Kernel::quadratic);
    CHECK(parse_kernel(kernel_name(Kernel::linear)) == Kernel::linear);
    CHECK_FALSE(parse_kernel("rbf").has_value());
}

TEST_CASE("quadratic kernel separates XOR, linear cannot") {
    const Dataset d = xor_data();
    SvmParams q;
    q.c = 10.0;
    const SvmModel m = svm_train(d, q);
    CHECK(svm_predict(m, d.features) == d.labels);
    for (const auto& x : d.features) {
        const auto v = m.decision_values(x);
        CHECK(std::abs(v[0] - v[1]) > 0.5);
    }

    SvmParams lin = q;
    lin.kernel = Kernel::linear;
    const auto predicted = svm_predict(svm_train(d, lin), d.features);
    CHECK(predicted != d.labels);
}

TEST_CASE("decision values equal the direct kernel expansion") {
    std::mt19937_64 rng(21);
    const Dataset d = blobs(rng, 3, 30, 5, 1.0);
    for (Kernel k : {Kernel::quadratic, Kernel::linear}) {
        SvmParams p;
        p.kernel = k;
        const SvmModel m = svm_train(d, p);
        CHECK(m.support_rows > 0);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> x(5);
            for (double& v : x) v = u(rng);
            const auto got = m.decision_values(x);
            const auto expected = oracle::kernel_sum(m, x);
            REQUIRE(got.size() == expected.size());
            std::size_t best = 0;
            for (std::size_t c = 0; c < got.size(); ++c) {
                CHECK(std::abs(got[c] - expected[c]) <= 1e-6);
                if (expected[c] > expected[best]) best = c;
            }
            CHECK(m.predict(x) == m.classes[best]);
        }
    }
    CHECK_THROWS_AS(svm_train(d).decision_values({1.0, 2.0}), InputError);
}

TEST_CASE("well separated blobs are learned exactly") {
    std::mt19937_64 rng(22);
    const Dataset d = blobs(rng, 4, 25, 4, 0.15);
    const SvmModel m = svm_train(d);
    CHECK(m.classes == std::vector<int>{0, 10, 20, 30});
    CHECK(svm_predict(m, d.features) == d.labels);
}

TEST_CASE("metrics of the seven-emotion confusion matrix") {
    const Metrics m = metrics(emotion_confusion());
    CHECK(m.accuracy == doctest::Approx(294.0 / 327.0).epsilon(1e-12));
    CHECK(std::abs(m.accuracy - 0.899) <= 0.001);
    REQUIRE(m.per_class.size() == 7);
    CHECK(std::abs(m.per_class[6].recall - 80.0 / 83.0) <= 1e-6);
    CHECK(m.per_class[6].support == 83);
    CHECK(m.per_class[0].precision == doctest::Approx(38.0 / 47.0));

    // Expand the matrix into pairs and recompute independently.
    std::vector<int> truth, pred, classes{0, 1, 2, 3, 4, 5, 6};
    const Confusion c = emotion_confusion();
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            for (long n = 0; n < c[i][j]; ++n) truth.push_back(i), pred.push_back(j);
    const auto o = oracle::metrics_from_pairs(truth, pred, classes);
    CHECK(m.accuracy == doctest::Approx(o.accuracy));
    CHECK(m.macro_f1 == doctest::Approx(o.macro_f1));
    for (int i = 0; i < 7; ++i) CHECK(m.per_class[i].recall == doctest::Approx(o.recall[i]));
    CHECK(confusion_matrix(truth, pred, classes) == c);
}

TEST_CASE("metrics input errors") {
    CHECK_THROWS_AS(metrics({{1, 2}}), InputError);
    CHECK_THROWS_AS(metrics({{1, -1}, {0, 1}}), InputError);
    CHECK_THROWS_AS(metrics({{0, 0}, {0, 0}}), InputError);
    const Metrics empty_class = metrics({{3, 0, 0}, {0, 2, 0}, {0, 0, 0}});
    CHECK(empty_class.per_class[2].f1 == 0.0);
}

TEST_CASE("stratified folds balance every class") {
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 23 + c; ++i) labels.push_back(c);
    const auto folds = stratified_folds(labels, 5, 7);
    CHECK(folds == stratified_folds(labels, 5, 7));
    CHECK(folds != stratified_folds(labels, 5, 8));
    for (int c = 0; c < 3; ++c) {
        std::vector<int> per(5, 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) ++per[folds[i]];
        CHECK(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
    }
    CHECK_THROWS_AS(stratified_folds({0, 0, 1}, 2, 0), InputError);
}

TEST_CASE("k-fold evaluation does not depend on the worker count") {
    std::mt19937_64 rng(23);
    const Dataset d = blobs(rng, 3, 20, 6, 1.2);
    const EvalReport one = kfold_evaluate(d, 5, {}, 1);
    const EvalReport three = kfold_evaluate(d, 5, {}, 3);
    CHECK(reports_to_json({one}) == reports_to_json({three}));
    CHECK(one.folds.size() == 5);
    long total = 0;
    for (const auto& row : one.confusion)
        for (long v : row) total += v;
    CHECK(total == 60);
    CHECK(one.mean_accuracy > 0.7);
}

TEST_CASE("random labels stay near chance") {
    std::mt19937_64 rng(24);
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset d;
    for (int i = 0; i < 200; ++i) {
        d.features.push_back({g(rng), g(rng), g(rng)});
        d.labels.push_back(static_cast<int>(rng() % 2));
    }
    const EvalReport r = kfold_evaluate(d, 10, {});
    CHECK(r.mean_accuracy < 0.65);
    CHECK(r.mean_accuracy > 0.35);
}

TEST_CASE("block reduction replaces a column range by principal components") {
    std::mt19937_64 rng(25);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> train, test;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> r(10);
        for (double& v : r) v = g(rng);
        (i < 24 ? train : test).push_back(r);
    }
    const auto before = train;
    reduce_block({2, 9, 3}, train, test);
    CHECK(train.front().size() == 6);
    CHECK(test.front().size() == 6);
    for (std::size_t i = 0; i < train.size(); ++i) {
        CHECK(train[i][0] == before[i][0]);
        CHECK(train[i][1] == before[i][1]);
        CHECK(train[i][5] == before[i][9]);
    }
    auto again = before;
    std::vector<std::vector<double>> none;
    CHECK_THROWS_AS(reduce_block({5, 11, 2}, again, none), ConfigError);
    CHECK_THROWS_AS(reduce_block({0, 4, 0}, again, none), ConfigError);

    // More components than training rows: capped at the row count.
    std::vector<std::vector<double>> few(again.begin(), again.begin() + 3);
    reduce_block({0, 10, 8}, few, none);
    CHECK(few.front().size() == 3);

    const Dataset d = blobs(rng, 2, 20, 8, 1.0);
    const EvalReport r = kfold_evaluate(d, 4, {}, 1, BlockReduction{4, 8, 2});
    REQUIRE(r.reduction.has_value());
    CHECK(reports_to_json({r}).find("\"method\": \"pca\"") != std::string::npos);
}

TEST_CASE("dataset validation") {
    Dataset d = xor_data();
    CHECK_NOTHROW(d.validate());
    d.labels = {0, 0, 0, 0};
    CHECK_THROWS_AS(d.validate(), InputError);
    d = xor_data();
    d.features[1].push_back(3.0);
    CHECK_THROWS_AS(d.validate(), InputError);
    d = xor_data();
    d.features[0][0] = std::nan("");
    CHECK_THROWS_AS(d.validate(), InputError);
    d = xor_data();
    d.labels.pop_back();
    CHECK_THROWS_AS(d.validate(), InputError);

    SvmParams bad;
    bad.c = 0.0;
    CHECK_THROWS_AS(svm_train(xor_data(), bad), ConfigError);
}

TEST_CASE("report table has one column per feature set") {
    std::mt19937_64 rng(26);
    const Dataset d = blobs(rng, 2, 10, 3, 1.0);
    EvalReport a = kfold_evaluate(d, 2, {});
    a.feature_set = "alpha";
    EvalReport b = a;
    b.feature_set = "beta";
    const std::string table = reports_to_table({a, b});
    CHECK(table.find("alpha") != std::string::npos);
    CHECK(table.find("beta") != std::string::npos);
    const std::string json = reports_to_json({a, b});
    CHECK(json.find("\"reports\"") != std::string::npos);
    CHECK(json.find("\"mean_macro_f1\"") != std::string::npos);
}
