#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aisoc/corpus.hpp"

namespace aisoc {

// Severity order: Normal < Suspicious < HighConfidenceAttack.
enum class TriageLabel : int { Normal = 0, Suspicious = 1, HighConfidenceAttack = 2 };

inline constexpr std::array<TriageLabel, 3> kTriageLabels{TriageLabel::Normal, TriageLabel::Suspicious,
                                                          TriageLabel::HighConfidenceAttack};

std::string_view to_string(TriageLabel t);
std::optional<TriageLabel> parse_triage_label(std::string_view s);
inline int severity(TriageLabel t) { return static_cast<int>(t); }

struct CalibratedScorePair {
    double s_m = 0.0;  // calibrated malware probability
    double s_l = 0.0;  // calibrated log probability
    std::string entity_id;
    std::optional<std::int64_t> timestamp;
};

inline constexpr double kDefaultGridStep = 0.01;

struct FusionConfig {
    double t_m = 0.5;
    double t_l = 0.5;
    double grid_step = kDefaultGridStep;
    std::string tuned_on;
    std::string version;

    void validate() const;
    bool operator==(const FusionConfig&) const = default;
};

/// Dual-threshold triage with inclusive comparisons:
/// HIGH_CONFIDENCE_ATTACK when both scores reach their thresholds, SUSPICIOUS
/// when exactly one does, NORMAL otherwise.
TriageLabel fuse(double s_m, double s_l, const FusionConfig& config);
inline TriageLabel fuse(const CalibratedScorePair& pair, const FusionConfig& config) {
    return fuse(pair.s_m, pair.s_l, config);
}

// Ground-truth triage from component labels, mirroring the fusion structure.
TriageLabel derive_truth_triage(Label malware_label, Label log_label);
TriageLabel derive_truth_triage(const std::optional<Label>& malware_label, const std::optional<Label>& log_label);

// Grid values {0, step, 2*step, ..., 1}; steps that do not divide 1 stop at the
// last multiple below 1.
std::vector<double> threshold_grid(double grid_step);

struct TuningResult {
    FusionConfig config;
    double macro_f1 = 0.0;
    std::size_t cells_evaluated = 0;
};

/// Exhaustive joint search over threshold_grid(step)^2 maximizing 3-class
/// macro-F1; ties resolve to the lexicographically smallest (t_m, t_l).
TuningResult tune_thresholds(const std::vector<CalibratedScorePair>& validation,
                             const std::vector<TriageLabel>& truth, double grid_step = kDefaultGridStep,
                             std::string tuned_on = "validation", std::string version = "");

nlohmann::json fusion_config_to_json(const FusionConfig& config);
FusionConfig fusion_config_from_json(const nlohmann::json& j);

}  // namespace aisoc
