#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aisoc/calibrate.hpp"
#include "aisoc/corpus.hpp"
#include "aisoc/eval.hpp"
#include "aisoc/learn.hpp"

namespace aisoc {

std::string_view to_string(CalibrationMethod m) {
    switch (m) {
        case CalibrationMethod::Platt: return "PLATT";
        case CalibrationMethod::Isotonic: return "ISOTONIC";
        case CalibrationMethod::Identity: return "IDENTITY";
    }
    return "IDENTITY";
}

std::optional<CalibrationMethod> parse_calibration_method(std::string_view s) {
    if (s == "PLATT") return CalibrationMethod::Platt;
    if (s == "ISOTONIC") return CalibrationMethod::Isotonic;
    if (s == "IDENTITY") return CalibrationMethod::Identity;
    return std::nullopt;
}

double Calibrator::apply(double raw) const {
    if (std::isnan(raw)) raw = -std::numeric_limits<double>::infinity();
    switch (method) {
        case CalibrationMethod::Platt: {
            const double z = platt.a == 0.0 ? platt.b : platt.a * raw + platt.b;
            return std::clamp(sigmoid(z), 0.0, 1.0);
        }
        case CalibrationMethod::Isotonic: {
            const auto& xs = isotonic.knot_scores;
            const auto& ys = isotonic.knot_values;
            if (xs.empty()) return 0.0;
            if (raw <= xs.front()) return ys.front();
            if (raw >= xs.back()) return ys.back();
            const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), raw) - xs.begin());
            const std::size_t lo = hi - 1;
            const double t = (raw - xs[lo]) / (xs[hi] - xs[lo]);
            const double v = ys[lo] + t * (ys[hi] - ys[lo]);
            return std::clamp(std::max(v, ys[lo]), 0.0, 1.0);
        }
        case CalibrationMethod::Identity:
            return std::clamp(raw, 0.0, 1.0);
    }
    return 0.0;
}

namespace {

CalibrationFitMeta check_binary(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw CalibrationError("score and label counts differ");
    CalibrationFitMeta meta;
    meta.validation_size = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw CalibrationError("non-finite calibration score");
        if (labels[i] != 0 && labels[i] != 1) throw CalibrationError("labels must be 0 or 1");
        (labels[i] ? meta.positives : meta.negatives) += 1;
    }
    if (meta.positives == 0 || meta.negatives == 0) throw CalibrationError("calibration data contains a single class");
    return meta;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double platt_objective(const std::vector<double>& s, const std::vector<double>& t, double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double z = a * s[i] + b;
        f += softplus(z) - t[i] * z;
    }
    return f;
}

// Newton's method with backtracking on the smoothed-target log-loss.
PlattParams newton_platt(const std::vector<double>& s, const std::vector<double>& t, bool fit_slope, double b0) {
    double a = 0.0, b = b0;
    double f = platt_objective(s, t, a, b);
    constexpr double kRidge = 1e-12;
    for (int it = 0; it < 100; ++it) {
        double ga = 0.0, gb = 0.0, haa = kRidge, hab = 0.0, hbb = kRidge;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double p = sigmoid(a * s[i] + b);
            const double d = p - t[i];
            const double w = p * (1.0 - p);
            ga += d * s[i];
            gb += d;
            haa += w * s[i] * s[i];
            hab += w * s[i];
            hbb += w;
        }
        if (!fit_slope) {
            ga = 0.0;
            haa = 1.0;
            hab = 0.0;
        }
        if (std::abs(ga) < 1e-10 && std::abs(gb) < 1e-10) break;
        const double det = haa * hbb - hab * hab;
        const double da = -(hbb * ga - hab * gb) / det;
        const double db = -(-hab * ga + haa * gb) / det;
        const double slope = ga * da + gb * db;
        double step = 1.0;
        bool moved = false;
        while (step >= 1e-10) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = platt_objective(s, t, na, nb);
            if (nf < f + 1e-4 * step * slope) {
                a = na;
                b = nb;
                f = nf;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return {a, b};
}

}  // namespace

std::pair<double, double> platt_targets(std::size_t positives, std::size_t negatives) {
    return {(static_cast<double>(positives) + 1.0) / (static_cast<double>(positives) + 2.0),
            1.0 / (static_cast<double>(negatives) + 2.0)};
}

Calibrator fit_platt(const std::vector<double>& scores, const std::vector<int>& labels) {
    auto meta = check_binary(scores, labels);
    if (scores.size() < 4) throw CalibrationError("Platt scaling needs at least 4 points");
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (*lo == *hi) throw CalibrationError("all calibration scores are equal");

    const auto [t_pos, t_neg] = platt_targets(meta.positives, meta.negatives);
    std::vector<double> targets(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) targets[i] = labels[i] ? t_pos : t_neg;
    const double b0 = std::log((static_cast<double>(meta.positives) + 1.0) / (static_cast<double>(meta.negatives) + 1.0));

    meta.inverted_scores = roc_auc(scores, labels) < 0.5;
    auto params = newton_platt(scores, targets, true, b0);
    if (params.a < 0.0) {
        // Keep the mapping non-decreasing: refit the intercept alone.
        meta.inverted_scores = true;
        params = newton_platt(scores, targets, false, b0);
        params.a = 0.0;
        meta.note = "negative Platt slope; slope held at 0";
    }
    Calibrator c;
    c.method = CalibrationMethod::Platt;
    c.platt = params;
    c.fit_meta = meta;
    return c;
}

std::vector<double> pool_adjacent_violators(const std::vector<double>& values, const std::vector<double>& weights) {
    struct Block {
        double sum;
        double weight;
        std::size_t count;
        double mean() const { return sum / weight; }
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i] * weights[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            const Block top = blocks.back();
            blocks.pop_back();
            blocks.back().sum += top.sum;
            blocks.back().weight += top.weight;
            blocks.back().count += top.count;
        }
    }
    std::vector<double> fitted;
    fitted.reserve(values.size());
    for (const auto& blk : blocks) fitted.insert(fitted.end(), blk.count, blk.mean());
    return fitted;
}

Calibrator fit_isotonic(const std::vector<double>& scores, const std::vector<int>& labels) {
    auto meta = check_binary(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

    // Pre-pool tied scores.
    std::vector<double> xs, means, weights;
    for (const auto i : order) {
        if (!xs.empty() && xs.back() == scores[i]) {
            means.back() += labels[i];
            weights.back() += 1.0;
        } else {
            xs.push_back(scores[i]);
            means.push_back(labels[i]);
            weights.push_back(1.0);
        }
    }
    for (std::size_t k = 0; k < xs.size(); ++k) means[k] /= weights[k];

    auto fitted = pool_adjacent_violators(means, weights);
    for (auto& v : fitted) v = std::clamp(v, 0.0, 1.0);
    // Enforce monotonicity against rounding in block means.
    for (std::size_t k = 1; k < fitted.size(); ++k) fitted[k] = std::max(fitted[k], fitted[k - 1]);

    meta.inverted_scores = roc_auc(scores, labels) < 0.5;
    Calibrator c;
    c.method = CalibrationMethod::Isotonic;
    c.isotonic.knot_scores = std::move(xs);
    c.isotonic.knot_values = std::move(fitted);
    c.fit_meta = meta;
    return c;
}

double log_loss(const std::vector<double>& p, const std::vector<int>& y, double eps) {
    if (p.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], eps, 1.0 - eps);
        s -= y[i] ? std::log(q) : std::log(1.0 - q);
    }
    return s / static_cast<double>(p.size());
}

MethodSelection select_method(const std::vector<double>& scores, const std::vector<int>& labels) {
    const auto meta = check_binary(scores, labels);
    MethodSelection sel;
    constexpr std::size_t kFolds = 3;
    if (scores.size() < kMinSelectionSize || meta.positives < kFolds || meta.negatives < kFolds) return sel;

    std::vector<int> strata(labels.begin(), labels.end());
    const auto folds = stratified_folds(strata, kFolds, 0x5EEDCA11ULL);
    double platt_loss = 0.0, iso_loss = 0.0;
    for (std::size_t f = 0; f < kFolds; ++f) {
        std::vector<double> tr_s, te_s;
        std::vector<int> tr_y, te_y;
        std::vector<bool> held(scores.size(), false);
        for (const auto i : folds[f]) held[i] = true;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            (held[i] ? te_s : tr_s).push_back(scores[i]);
            (held[i] ? te_y : tr_y).push_back(labels[i]);
        }
        const auto held_out_loss = [&](const Calibrator& c) {
            std::vector<double> p;
            for (const double s : te_s) p.push_back(c.apply(s));
            return log_loss(p, te_y) * static_cast<double>(te_s.size());
        };
        Calibrator platt;
        try {
            platt = fit_platt(tr_s, tr_y);
        } catch (const CalibrationError&) {
            return sel;  // degenerate fold: keep the small-data default
        }
        platt_loss += held_out_loss(platt);
        iso_loss += held_out_loss(fit_isotonic(tr_s, tr_y));
    }
    sel.cross_fitted = true;
    sel.platt_log_loss = platt_loss;
    sel.isotonic_log_loss = iso_loss;
    sel.method = iso_loss < platt_loss ? CalibrationMethod::Isotonic : CalibrationMethod::Platt;
    return sel;
}

Calibrator fit_calibrator(const std::vector<double>& scores, const std::vector<int>& labels,
                          CalibrationRequest request) {
    try {
        switch (request) {
            case CalibrationRequest::Platt: return fit_platt(scores, labels);
            case CalibrationRequest::Isotonic: return fit_isotonic(scores, labels);
            case CalibrationRequest::Identity: {
                Calibrator c;
                c.fit_meta.validation_size = scores.size();
                for (const int y : labels) (y ? c.fit_meta.positives : c.fit_meta.negatives) += 1;
                return c;
            }
            case CalibrationRequest::Auto: {
                const auto sel = select_method(scores, labels);
                return sel.method == CalibrationMethod::Isotonic ? fit_isotonic(scores, labels)
                                                                 : fit_platt(scores, labels);
            }
        }
    } catch (const CalibrationError& e) {
        Calibrator c;
        c.fit_meta.validation_size = scores.size();
        for (const int y : labels) (y ? c.fit_meta.positives : c.fit_meta.negatives) += 1;
        c.fit_meta.note = std::string("identity fallback: ") + e.what();
        return c;
    }
    return {};
}

}  // namespace aisoc
