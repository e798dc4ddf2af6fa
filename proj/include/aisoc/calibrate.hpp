#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aisoc/error.hpp"

namespace aisoc {

enum class CalibrationMethod { Platt, Isotonic, Identity };

std::string_view to_string(CalibrationMethod m);
std::optional<CalibrationMethod> parse_calibration_method(std::string_view s);

struct PlattParams {
    double a = 0.0;  // slope, constrained to a >= 0
    double b = 0.0;
    bool operator==(const PlattParams&) const = default;
};

struct IsotonicParams {
    std::vector<double> knot_scores;  // strictly ascending
    std::vector<double> knot_values;  // non-decreasing, within [0,1]
    bool operator==(const IsotonicParams&) const = default;
};

struct CalibrationFitMeta {
    std::size_t validation_size = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    // Raw scores ranked positives below negatives (AUC < 0.5); the Platt slope
    // was then held at zero to keep the mapping non-decreasing.
    bool inverted_scores = false;
    std::string note;
    bool operator==(const CalibrationFitMeta&) const = default;
};

struct Calibrator {
    CalibrationMethod method = CalibrationMethod::Identity;
    PlattParams platt;
    IsotonicParams isotonic;
    CalibrationFitMeta fit_meta;

    // Calibrated probability, non-decreasing in `raw` and within [0,1].
    double apply(double raw) const;
    bool operator==(const Calibrator&) const = default;
};

inline double apply(const Calibrator& c, double raw) { return c.apply(raw); }

// Platt's smoothed regression targets (t+, t-).
std::pair<double, double> platt_targets(std::size_t positives, std::size_t negatives);

Calibrator fit_platt(const std::vector<double>& scores, const std::vector<int>& labels);
Calibrator fit_isotonic(const std::vector<double>& scores, const std::vector<int>& labels);

/// Weighted pool-adjacent-violators: least-squares non-decreasing fit of
/// `values` (already in score order). Returns one fitted value per input.
std::vector<double> pool_adjacent_violators(const std::vector<double>& values,
                                            const std::vector<double>& weights);

// Minimum number of points for cross-fitted method selection.
inline constexpr std::size_t kMinSelectionSize = 12;

struct MethodSelection {
    CalibrationMethod method = CalibrationMethod::Platt;
    double platt_log_loss = 0.0;     // summed held-out log-loss, 3-fold cross-fit
    double isotonic_log_loss = 0.0;
    bool cross_fitted = false;       // false when the small-data default applied
};

/// Picks the method with lower 3-fold cross-fitted log-loss; ties and small
/// inputs (< kMinSelectionSize points) go to Platt.
MethodSelection select_method(const std::vector<double>& scores, const std::vector<int>& labels);

enum class CalibrationRequest { Auto, Platt, Isotonic, Identity };

/// Fits the requested (or selected) method, falling back to IDENTITY with a
/// note in fit_meta when the data cannot support a fit.
Calibrator fit_calibrator(const std::vector<double>& scores, const std::vector<int>& labels,
                          CalibrationRequest request = CalibrationRequest::Auto);

// Mean binary log-loss with probabilities clipped to [eps, 1 - eps].
double log_loss(const std::vector<double>& probabilities, const std::vector<int>& labels, double eps = 1e-6);

}  // namespace aisoc
