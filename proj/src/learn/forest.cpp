#include <algorithm>
#include <cmath>
#include <numeric>

#include "aisoc/learn.hpp"
#include "aisoc/rng.hpp"

namespace aisoc {

double gini(double negatives, double positives) {
    const double n = negatives + positives;
    if (n <= 0.0) return 0.0;
    const double p = positives / n;
    return 2.0 * p * (1.0 - p);
}

std::size_t resolve_features_per_split(std::size_t requested, std::size_t dimension) {
    if (requested == 0) requested = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dimension))));
    return std::clamp<std::size_t>(requested, 1, std::max<std::size_t>(dimension, 1));
}

const TreeNode& DecisionTree::leaf_for(const DenseVector& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i];
}

double DecisionTree::positive_fraction(const DenseVector& x) const {
    const auto& leaf = leaf_for(x);
    const double total = static_cast<double>(leaf.negatives) + static_cast<double>(leaf.positives);
    return total > 0.0 ? static_cast<double>(leaf.positives) / total : 0.0;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace {

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const std::vector<DenseVector>& X, const std::vector<int>& y, const TreeParams& params,
                std::uint64_t seed)
        : X_(X), y_(y), params_(params), rng_(seed), dim_(X.front().size()),
          mtry_(resolve_features_per_split(params.features_per_split, X.front().size())) {}

    DecisionTree build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::uint32_t pos = 0;
        for (const auto r : rows) pos += static_cast<std::uint32_t>(y_[r]);
        const auto neg = static_cast<std::uint32_t>(rows.size()) - pos;
        tree_.nodes[static_cast<std::size_t>(id)].negatives = neg;
        tree_.nodes[static_cast<std::size_t>(id)].positives = pos;

        if (depth >= params_.max_depth || pos == 0 || neg == 0 || rows.size() < 2 * params_.min_samples_leaf)
            return id;

        const auto split = best_split(rows, neg, pos);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (const auto r : rows) {
            (X_[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const auto l = grow(std::move(left), depth + 1);
        const auto rr = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = rr;
        return id;
    }

    std::vector<std::size_t> sample_features() {
        std::vector<std::size_t> f(dim_);
        std::iota(f.begin(), f.end(), std::size_t{0});
        for (std::size_t i = 0; i < mtry_; ++i) std::swap(f[i], f[i + rng_.below(dim_ - i)]);
        f.resize(mtry_);
        std::sort(f.begin(), f.end());
        return f;
    }

    Split best_split(const std::vector<std::size_t>& rows, std::uint32_t neg, std::uint32_t pos) {
        const auto m = static_cast<double>(rows.size());
        const double parent = gini(neg, pos);
        Split best;
        best.impurity = parent;
        std::vector<std::pair<double, int>> column(rows.size());
        for (const auto f : sample_features()) {
            for (std::size_t k = 0; k < rows.size(); ++k) column[k] = {X_[rows[k]][f], y_[rows[k]]};
            std::sort(column.begin(), column.end());
            double left_pos = 0.0;
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                left_pos += column[k].second;
                if (column[k].first == column[k + 1].first) continue;
                const auto n_left = static_cast<double>(k + 1);
                const double n_right = m - n_left;
                if (k + 1 < params_.min_samples_leaf || column.size() - k - 1 < params_.min_samples_leaf) continue;
                const double right_pos = pos - left_pos;
                const double impurity =
                    (n_left * gini(n_left - left_pos, left_pos) + n_right * gini(n_right - right_pos, right_pos)) / m;
                if (impurity < best.impurity - 1e-12) {
                    double t = 0.5 * (column[k].first + column[k + 1].first);
                    if (!(t < column[k + 1].first)) t = column[k].first;
                    best = {static_cast<std::int32_t>(f), t, impurity};
                }
            }
        }
        return best;
    }

    const std::vector<DenseVector>& X_;
    const std::vector<int>& y_;
    TreeParams params_;
    Rng rng_;
    std::size_t dim_;
    std::size_t mtry_;
    DecisionTree tree_;
};

void check_inputs(const std::vector<DenseVector>& X, const std::vector<int>& y) {
    if (X.empty() || X.size() != y.size()) throw TrainingError("feature and label counts differ or are empty");
    const std::size_t d = X.front().size();
    if (d == 0) throw TrainingError("forest needs at least one feature");
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != d) throw DimensionError("inconsistent feature dimension in training set");
        if (y[i] != 0 && y[i] != 1) throw TrainingError("labels must be 0 or 1");
        (y[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw TrainingError("training set contains a single class");
}

}  // namespace

DecisionTree train_tree(const std::vector<DenseVector>& X, const std::vector<int>& y,
                        const std::vector<std::size_t>& rows, const TreeParams& params, std::uint64_t seed) {
    if (X.empty() || rows.empty()) throw TrainingError("tree needs at least one row");
    if (params.min_samples_leaf == 0) throw TrainingError("min_samples_leaf must be positive");
    return TreeBuilder(X, y, params, seed).build(rows);
}

ForestModel train_forest(const std::vector<DenseVector>& X, const std::vector<int>& y, const ForestConfig& config) {
    check_inputs(X, y);
    if (config.n_trees == 0) throw TrainingError("n_trees must be >= 1");
    ForestModel model;
    model.dimension = X.front().size();
    model.n_trees = config.n_trees;
    model.max_depth = config.tree.max_depth;
    model.min_samples_leaf = config.tree.min_samples_leaf;
    model.features_per_split = resolve_features_per_split(config.tree.features_per_split, model.dimension);
    model.seed = config.seed;
    TreeParams params = config.tree;
    params.features_per_split = model.features_per_split;

    const std::size_t n = X.size();
    std::vector<std::size_t> rows(n);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        // Per-tree seed: trees are independent of training order.
        const auto tree_seed = derive_seed(config.seed, t);
        Rng boot(tree_seed);
        for (auto& r : rows) r = static_cast<std::size_t>(boot.below(n));
        std::sort(rows.begin(), rows.end());
        model.trees.push_back(train_tree(X, y, rows, params, derive_seed(tree_seed, 1)));
    }
    return model;
}

double score_forest(const ForestModel& model, const DenseVector& x) {
    if (x.size() != model.dimension) {
        throw DimensionError("forest expects dimension " + std::to_string(model.dimension) + ", got " +
                             std::to_string(x.size()));
    }
    if (model.trees.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.positive_fraction(x);
    return sum / static_cast<double>(model.trees.size());
}

}  // namespace aisoc
