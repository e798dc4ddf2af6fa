#pragma once

#include <cstdint>
#include <vector>

#include "aisoc/features.hpp"

namespace aisoc {

double sigmoid(double z);

// ---------------------------------------------------------------------------
// Logistic regression

enum class ClassWeighting { None, InverseFrequency };

struct LogisticConfig {
    double lambda = 1e-3;
    std::size_t epochs = 500;  // maximum gradient steps
    std::uint64_t seed = 0;
    ClassWeighting weighting = ClassWeighting::None;
    double gradient_tolerance = 1e-8;
};

struct LogisticTrainingMeta {
    std::size_t iterations = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
    bool operator==(const LogisticTrainingMeta&) const = default;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
    LogisticTrainingMeta meta;
    bool operator==(const LogisticModel&) const = default;
};

struct LogisticObjective {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

// Weighted mean log-loss plus (lambda/2)*||w||^2; the bias is not penalized.
// `sample_weights` may be empty (all ones).
LogisticObjective logistic_objective(const std::vector<SparseVector>& X, const std::vector<int>& y,
                                     const std::vector<double>& sample_weights,
                                     const std::vector<double>& w, double b, double lambda);

std::vector<double> class_weights(const std::vector<int>& y, ClassWeighting weighting);

/// Full-batch gradient descent with Armijo backtracking from a zero start.
/// Deterministic; every accepted step lowers the objective.
LogisticModel train_logistic(const std::vector<SparseVector>& X, const std::vector<int>& y,
                             const LogisticConfig& config = {});

double score_logistic(const LogisticModel& model, const SparseVector& x);

// ---------------------------------------------------------------------------
// Random forest

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t negatives = 0;  // class counts of training rows reaching the node
    std::uint32_t positives = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const TreeNode& leaf_for(const DenseVector& x) const;
    double positive_fraction(const DenseVector& x) const;
    std::size_t depth() const;
    bool operator==(const DecisionTree&) const = default;
};

struct TreeParams {
    std::size_t max_depth = 12;
    std::size_t min_samples_leaf = 2;
    std::size_t features_per_split = 0;  // 0 selects ceil(sqrt(d))
};

struct ForestConfig {
    std::size_t n_trees = 100;
    TreeParams tree{};
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::size_t dimension = 0;
    std::size_t n_trees = 0;
    std::size_t max_depth = 0;
    std::size_t min_samples_leaf = 0;
    std::size_t features_per_split = 0;
    std::uint64_t seed = 0;
    bool operator==(const ForestModel&) const = default;
};

std::size_t resolve_features_per_split(std::size_t requested, std::size_t dimension);

/// CART on the rows listed in `rows` (repeats allowed). Splits minimize the
/// weighted Gini impurity over a random feature subset; candidate thresholds
/// are midpoints of consecutive distinct values; ties go to the lowest feature
/// index, then the lowest threshold.
DecisionTree train_tree(const std::vector<DenseVector>& X, const std::vector<int>& y,
                        const std::vector<std::size_t>& rows, const TreeParams& params, std::uint64_t seed);

ForestModel train_forest(const std::vector<DenseVector>& X, const std::vector<int>& y,
                         const ForestConfig& config = {});

// Mean over trees of the leaf positive-class fraction.
double score_forest(const ForestModel& model, const DenseVector& x);

double gini(double negatives, double positives);

}  // namespace aisoc
