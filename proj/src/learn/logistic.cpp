#include <algorithm>
#include <cmath>
#include <numeric>

#include "aisoc/learn.hpp"

namespace aisoc {
namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double squared_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x * x;
    return s;
}

void check_inputs(const std::vector<SparseVector>& X, const std::vector<int>& y) {
    if (X.size() != y.size()) throw TrainingError("feature and label counts differ");
    if (X.size() < 2) throw TrainingError("logistic regression needs at least two samples");
    const std::size_t d = X.front().dimension;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].dimension != d) throw DimensionError("inconsistent feature dimension in training set");
        if (y[i] != 0 && y[i] != 1) throw TrainingError("labels must be 0 or 1");
        (y[i] ? pos : neg) = true;
    }
    if (!pos || !neg) throw TrainingError("training set contains a single class");
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> class_weights(const std::vector<int>& y, ClassWeighting weighting) {
    if (weighting == ClassWeighting::None) return {};
    const auto n = static_cast<double>(y.size());
    const auto n_pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double n_neg = n - n_pos;
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = n / (2.0 * (y[i] ? n_pos : n_neg));
    return w;
}

LogisticObjective logistic_objective(const std::vector<SparseVector>& X, const std::vector<int>& y,
                                     const std::vector<double>& sample_weights, const std::vector<double>& w,
                                     double b, double lambda) {
    LogisticObjective out;
    out.grad_w.assign(w.size(), 0.0);
    double total_weight = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double c = sample_weights.empty() ? 1.0 : sample_weights[i];
        const double z = X[i].dot(w) + b;
        loss += c * (softplus(z) - y[i] * z);
        const double g = c * (sigmoid(z) - y[i]);
        for (std::size_t k = 0; k < X[i].indices.size(); ++k) out.grad_w[X[i].indices[k]] += g * X[i].values[k];
        out.grad_b += g;
        total_weight += c;
    }
    for (auto& g : out.grad_w) g /= total_weight;
    out.grad_b /= total_weight;
    for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] += lambda * w[j];
    out.loss = loss / total_weight + 0.5 * lambda * squared_norm(w);
    return out;
}

LogisticModel train_logistic(const std::vector<SparseVector>& X, const std::vector<int>& y,
                             const LogisticConfig& config) {
    check_inputs(X, y);
    if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) throw TrainingError("lambda must be >= 0");
    const std::size_t d = X.front().dimension;
    const auto weights = class_weights(y, config.weighting);

    LogisticModel model;
    model.weights.assign(d, 0.0);
    model.lambda = config.lambda;
    model.meta.seed = config.seed;

    constexpr double kArmijo = 1e-4;
    constexpr int kMaxHalvings = 60;
    double step = 1.0;
    auto current = logistic_objective(X, y, weights, model.weights, model.bias, config.lambda);
    model.meta.initial_loss = current.loss;

    std::vector<double> trial_w(d);
    std::size_t it = 0;
    for (; it < config.epochs; ++it) {
        const double g2 = squared_norm(current.grad_w) + current.grad_b * current.grad_b;
        if (std::sqrt(g2) < config.gradient_tolerance) break;
        bool accepted = false;
        for (int h = 0; h < kMaxHalvings; ++h) {
            for (std::size_t j = 0; j < d; ++j) trial_w[j] = model.weights[j] - step * current.grad_w[j];
            const double trial_b = model.bias - step * current.grad_b;
            auto trial = logistic_objective(X, y, weights, trial_w, trial_b, config.lambda);
            if (trial.loss <= current.loss - kArmijo * step * g2) {
                model.weights.swap(trial_w);
                model.bias = trial_b;
                current = std::move(trial);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        step *= 2.0;
    }
    model.meta.iterations = it;
    model.meta.final_loss = current.loss;
    return model;
}

double score_logistic(const LogisticModel& model, const SparseVector& x) {
    if (x.dimension != model.weights.size()) {
        throw DimensionError("logistic model expects dimension " + std::to_string(model.weights.size()) +
                             ", got " + std::to_string(x.dimension));
    }
    return sigmoid(x.dot(model.weights) + model.bias);
}

}  // namespace aisoc
