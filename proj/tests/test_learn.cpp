#include <doctest.h>

#include <cmath>

#include "aisoc/learn.hpp"
#include "oracles.hpp"

using namespace aisoc;

namespace {

SparseVector dense_to_sparse(const std::vector<double>& x) {
    SparseVector v;
    v.dimension = x.size();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) {
            v.indices.push_back(i);
            v.values.push_back(x[i]);
        }
    return v;
}

LogisticModel make_model(std::vector<double> w, double b) {
    LogisticModel m;
    m.weights = std::move(w);
    m.bias = b;
    return m;
}

}  // namespace

TEST_CASE("sigmoid and score_logistic") {
    CHECK(score_logistic(make_model({0.0, 0.0}, 0.0), dense_to_sparse({3.0, -2.0})) == 0.5);
    CHECK(score_logistic(make_model({1.0}, 0.0), dense_to_sparse({0.0})) == 0.5);
    CHECK(score_logistic(make_model({2.0}, -1.0), dense_to_sparse({1.0})) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(sigmoid(1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) <= 1.0);
    CHECK_THROWS_AS(score_logistic(make_model({1.0}, 0.0), dense_to_sparse({1.0, 2.0})), DimensionError);
}

TEST_CASE("logistic: symmetric 1-D data gives 0.5 at the origin") {
    const std::vector<SparseVector> X{dense_to_sparse({-1.0}), dense_to_sparse({1.0})};
    const auto m = train_logistic(X, {0, 1}, LogisticConfig{.lambda = 0.0, .epochs = 2000});
    CHECK(score_logistic(m, dense_to_sparse({0.0})) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(m.meta.final_loss < m.meta.initial_loss);
}

TEST_CASE("logistic: huge lambda shrinks the weights") {
    Rng rng(3);
    std::vector<SparseVector> X;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        X.push_back(dense_to_sparse({rng.uniform(-1, 1), rng.uniform(-1, 1)}));
        y.push_back(i % 2);
    }
    const auto m = train_logistic(X, y, LogisticConfig{.lambda = 1e6});
    double norm = 0.0;
    for (const double w : m.weights) norm += w * w;
    CHECK(std::sqrt(norm) < 1e-2);
}

TEST_CASE("logistic: analytic gradient matches central differences") {
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t d = 4, n = 12;
        std::vector<SparseVector> X;
        std::vector<int> y;
        std::vector<double> sw;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(d);
            for (auto& v : x) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(-2, 2);
            X.push_back(dense_to_sparse(x));
            y.push_back(static_cast<int>(rng.below(2)));
            sw.push_back(rng.uniform(0.5, 2.0));
        }
        std::vector<double> w(d);
        for (auto& v : w) v = rng.uniform(-1, 1);
        const double b = rng.uniform(-1, 1), lambda = 0.1;
        const auto obj = logistic_objective(X, y, sw, w, b, lambda);
        std::vector<double> params = w;
        params.push_back(b);
        const auto f = [&](const std::vector<double>& p) {
            return logistic_objective(X, y, sw, std::vector<double>(p.begin(), p.end() - 1), p.back(), lambda).loss;
        };
        for (std::size_t i = 0; i <= d; ++i) {
            const double numeric = oracle::central_diff(f, params, i, 1e-5);
            const double analytic = i < d ? obj.grad_w[i] : obj.grad_b;
            CHECK(std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric) + std::abs(analytic)) < 1e-5);
        }
    }
}

TEST_CASE("logistic: single class is a training error") {
    const std::vector<SparseVector> X{dense_to_sparse({1.0}), dense_to_sparse({2.0})};
    CHECK_THROWS_AS(train_logistic(X, {1, 1}), TrainingError);
}

TEST_CASE("forest: separating feature gives perfect training accuracy") {
    std::vector<DenseVector> X;
    std::vector<int> y;
    Rng rng(1);
    for (int i = 0; i < 60; ++i) {
        const int label = i % 2;
        X.push_back({label ? rng.uniform(1, 2) : rng.uniform(-2, -1)});
        y.push_back(label);
    }
    const auto m = train_forest(X, y, ForestConfig{.n_trees = 10, .tree = {.max_depth = 3, .min_samples_leaf = 1}, .seed = 2});
    for (std::size_t i = 0; i < X.size(); ++i) CHECK((score_forest(m, X[i]) >= 0.5 ? 1 : 0) == y[i]);
}

TEST_CASE("forest: same seed gives identical forests") {
    const auto samples = generate_malware({.samples = 120, .seed = 9});
    std::vector<DenseVector> X;
    std::vector<int> y;
    for (const auto& s : samples) {
        X.push_back(s.features);
        y.push_back(to_binary(*s.label));
    }
    const ForestConfig cfg{.n_trees = 8, .seed = 5};
    CHECK(train_forest(X, y, cfg) == train_forest(X, y, cfg));
}

TEST_CASE("forest: score is the mean of leaf fractions") {
    // Four single-leaf trees voting 1, 1, 0, 1.
    ForestModel m;
    m.dimension = 1;
    for (const int vote : {1, 1, 0, 1}) {
        DecisionTree t;
        TreeNode leaf;
        leaf.positives = vote ? 3 : 0;
        leaf.negatives = vote ? 0 : 3;
        t.nodes.push_back(leaf);
        m.trees.push_back(t);
    }
    m.n_trees = 4;
    CHECK(score_forest(m, {0.0}) == 0.75);
}

TEST_CASE("tree: depth-1 split matches an exhaustive Gini search") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 8 + rng.below(10), d = 3;
        std::vector<DenseVector> X(n, DenseVector(d));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : X[i]) v = static_cast<double>(rng.below(6));
            y[i] = static_cast<int>(rng.below(2));
        }
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        const auto tree = train_tree(X, y, rows, TreeParams{.max_depth = 1, .min_samples_leaf = 1, .features_per_split = d},
                                     static_cast<std::uint64_t>(trial));

        // Oracle: every feature, every midpoint; weighted child Gini.
        double best = 1e300;
        int best_f = -1;
        double best_t = 0.0;
        double pos = 0;
        for (const int v : y) pos += v;
        const double parent = 1.0 - (pos / n) * (pos / n) - ((n - pos) / n) * ((n - pos) / n);
        for (std::size_t f = 0; f < d; ++f) {
            std::vector<double> vals;
            for (const auto& x : X) vals.push_back(x[f]);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
                const double t = (vals[k] + vals[k + 1]) / 2.0;
                double ln = 0, lp = 0, rn = 0, rp = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (X[i][f] <= t) (y[i] ? lp : ln) += 1;
                    else (y[i] ? rp : rn) += 1;
                }
                const auto g = [](double a, double b) {
                    const double s = a + b;
                    return 1.0 - (a / s) * (a / s) - (b / s) * (b / s);
                };
                const double imp = ((ln + lp) * g(ln, lp) + (rn + rp) * g(rn, rp)) / n;
                if (imp < best - 1e-12) {
                    best = imp;
                    best_f = static_cast<int>(f);
                    best_t = t;
                }
            }
        }
        if (best_f < 0 || !(best < parent - 1e-12)) {
            CHECK(tree.nodes.size() == 1);
        } else {
            REQUIRE(tree.nodes.size() == 3);
            CHECK(tree.nodes[0].feature == best_f);
            CHECK(tree.nodes[0].threshold == best_t);
        }
    }
}
