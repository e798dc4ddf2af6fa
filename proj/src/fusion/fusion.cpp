#include <cmath>
#include <set>

#include "aisoc/eval.hpp"
#include "aisoc/fusion.hpp"

namespace aisoc {

std::string_view to_string(TriageLabel t) {
    switch (t) {
        case TriageLabel::Normal: return "NORMAL";
        case TriageLabel::Suspicious: return "SUSPICIOUS";
        case TriageLabel::HighConfidenceAttack: return "HIGH_CONFIDENCE_ATTACK";
    }
    return "NORMAL";
}

std::optional<TriageLabel> parse_triage_label(std::string_view s) {
    if (s == "NORMAL") return TriageLabel::Normal;
    if (s == "SUSPICIOUS") return TriageLabel::Suspicious;
    if (s == "HIGH_CONFIDENCE_ATTACK") return TriageLabel::HighConfidenceAttack;
    return std::nullopt;
}

void FusionConfig::validate() const {
    if (!(t_m >= 0.0 && t_m <= 1.0) || !(t_l >= 0.0 && t_l <= 1.0))
        throw ConfigError("fusion thresholds must be in [0,1]");
    if (!(grid_step > 0.0 && grid_step <= 0.5)) throw ConfigError("grid_step must be in (0, 0.5]");
}

TriageLabel fuse(double s_m, double s_l, const FusionConfig& config) {
    const bool malware = s_m >= config.t_m;
    const bool logs = s_l >= config.t_l;
    if (malware && logs) return TriageLabel::HighConfidenceAttack;
    if (malware || logs) return TriageLabel::Suspicious;
    return TriageLabel::Normal;
}

TriageLabel derive_truth_triage(Label malware_label, Label log_label) {
    const int n = to_binary(malware_label) + to_binary(log_label);
    return static_cast<TriageLabel>(n);
}

TriageLabel derive_truth_triage(const std::optional<Label>& malware_label, const std::optional<Label>& log_label) {
    if (!malware_label || !log_label) throw ConfigError("truth triage needs both component labels");
    return derive_truth_triage(*malware_label, *log_label);
}

std::vector<double> threshold_grid(double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 0.5)) throw ConfigError("grid_step must be in (0, 0.5]");
    const double inv = 1.0 / grid_step;
    const double k_round = std::round(inv);
    std::vector<double> grid;
    if (std::abs(inv - k_round) < 1e-9) {
        // k/K keeps values such as 0.42 bit-identical to their literals.
        const auto k_max = static_cast<long>(k_round);
        for (long k = 0; k <= k_max; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(k_max));
    } else {
        const auto k_max = static_cast<long>(std::floor(inv));
        for (long k = 0; k <= k_max; ++k) grid.push_back(static_cast<double>(k) * grid_step);
    }
    return grid;
}

TuningResult tune_thresholds(const std::vector<CalibratedScorePair>& validation, const std::vector<TriageLabel>& truth,
                             double grid_step, std::string tuned_on, std::string version) {
    if (validation.empty()) throw TuningError("threshold tuning needs a non-empty validation set");
    if (validation.size() != truth.size()) throw TuningError("validation pairs and truth differ in length");
    std::set<TriageLabel> distinct(truth.begin(), truth.end());
    if (distinct.size() < 2) throw TuningError("threshold tuning needs at least two distinct truth classes");
    const auto grid = threshold_grid(grid_step);

    const std::size_t n = validation.size();
    std::vector<int> truth_idx(n);
    for (std::size_t i = 0; i < n; ++i) truth_idx[i] = severity(truth[i]);

    TuningResult best;
    best.macro_f1 = -1.0;
    std::vector<char> m_hit(n);
    Confusion confusion(3);
    for (const double tm : grid) {
        for (std::size_t i = 0; i < n; ++i) m_hit[i] = validation[i].s_m >= tm;
        for (const double tl : grid) {
            confusion.reset();
            for (std::size_t i = 0; i < n; ++i) {
                const int pred = static_cast<int>(m_hit[i]) + static_cast<int>(validation[i].s_l >= tl);
                confusion.add(truth_idx[i], pred);
            }
            ++best.cells_evaluated;
            const double f1 = confusion.macro_f1();
            if (f1 > best.macro_f1 + 1e-12) {
                best.macro_f1 = f1;
                best.config.t_m = tm;
                best.config.t_l = tl;
            }
        }
    }
    best.config.grid_step = grid_step;
    best.config.tuned_on = std::move(tuned_on);
    best.config.version = std::move(version);
    return best;
}

nlohmann::json fusion_config_to_json(const FusionConfig& c) {
    return nlohmann::json{{"t_m", c.t_m}, {"t_l", c.t_l}, {"grid_step", c.grid_step}, {"tuned_on", c.tuned_on},
                          {"version", c.version}};
}

FusionConfig fusion_config_from_json(const nlohmann::json& j) {
    FusionConfig c;
    try {
        c.t_m = j.at("t_m").get<double>();
        c.t_l = j.at("t_l").get<double>();
        c.grid_step = j.value("grid_step", kDefaultGridStep);
        c.tuned_on = j.value("tuned_on", std::string{});
        c.version = j.value("version", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid fusion config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace aisoc
