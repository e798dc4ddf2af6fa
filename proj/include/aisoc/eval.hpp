#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisoc/corpus.hpp"
#include "aisoc/features.hpp"
#include "aisoc/fusion.hpp"

namespace aisoc {

class Scorer;

// k-class confusion counts, rows = truth, columns = prediction.
class Confusion {
public:
    explicit Confusion(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {}

    void add(int truth, int prediction) {
        ++counts_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(prediction)];
    }
    void reset() { std::fill(counts_.begin(), counts_.end(), 0); }
    std::size_t classes() const { return k_; }
    std::uint64_t at(std::size_t truth, std::size_t prediction) const { return counts_[truth * k_ + prediction]; }
    std::uint64_t support(std::size_t c) const;
    std::uint64_t predicted(std::size_t c) const;

    // Zero-denominator conventions: precision/recall 0, F1 0 when P + R = 0.
    double precision(std::size_t c) const;
    double recall(std::size_t c) const;
    double f1(std::size_t c) const;
    double macro_f1() const;

private:
    std::size_t k_;
    std::vector<std::uint64_t> counts_;
};

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    bool operator==(const ClassMetrics&) const = default;
};

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool operator==(const MacroMetrics&) const = default;
};

struct AucMetrics {
    double roc = 0.0;
    double pr = 0.0;
    bool operator==(const AucMetrics&) const = default;
};

struct EvalReport {
    std::string setting;
    std::string split;
    std::vector<ClassMetrics> classes;
    MacroMetrics macro;
    std::optional<AucMetrics> auc;
    std::vector<std::vector<std::uint64_t>> confusion;
    // Class names whose precision or recall had a zero denominator.
    std::vector<std::string> zero_division;
    std::vector<std::uint64_t> seeds;
    std::optional<std::uint64_t> median_seed;
    std::map<std::string, std::string> fingerprints;
    bool operator==(const EvalReport&) const = default;
};

/// Per-class and macro precision/recall/F1 over `class_names` (indices into
/// that list). Macro values are unweighted means over every listed class.
EvalReport classification_report(const std::vector<int>& predictions, const std::vector<int>& truth,
                                  const std::vector<std::string>& class_names);

// Mann-Whitney statistic with ties counted 0.5.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& truth);
// Average precision: sum over recall increments of the precision there.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& truth);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
std::string render_report_table(const EvalReport& report);

// ---------------------------------------------------------------------------
// Evaluation items: one malware sample paired with one log line per entity.

struct EvalItem {
    std::string entity_id;
    std::optional<std::string> log_message;
    std::optional<DenseVector> malware_features;
    std::optional<Label> log_label;
    std::optional<Label> malware_label;
    bool operator==(const EvalItem&) const = default;
};

nlohmann::json eval_item_to_json(const EvalItem& item);
EvalItem eval_item_from_json(const nlohmann::json& j);
void write_items_ndjson(const std::filesystem::path& path, const std::vector<EvalItem>& items);
std::vector<EvalItem> load_items_ndjson(const std::filesystem::path& path);

// Target triage mix for built manifests, as fractions of NORMAL, SUSPICIOUS
// and HIGH_CONFIDENCE_ATTACK items.
struct ItemMix {
    double normal = 14.0 / 152.0;
    double suspicious = 76.0 / 152.0;
    double high = 62.0 / 152.0;
};

/// Pairs log lines with malware samples so the truth triage classes follow
/// `mix`. Item count is `count` when given, otherwise the largest count the
/// labeled pools support without reusing a log line.
std::vector<EvalItem> build_eval_items(const std::vector<LogRecord>& logs, const std::vector<MalwareSample>& malware,
                                       const ItemMix& mix, std::uint64_t seed,
                                       std::optional<std::size_t> count = std::nullopt,
                                       const std::string& id_prefix = "item");

std::vector<TriageLabel> truth_triage(const std::vector<EvalItem>& items);
std::vector<CalibratedScorePair> score_items(const Scorer& scorer, const std::vector<EvalItem>& items);

// ---------------------------------------------------------------------------
// Baselines and probes

struct BaselineReports {
    EvalReport logs_only;
    EvalReport malware_only;
    EvalReport fused;
};

// Binary truth for the single-modality reports is "attack in either modality".
EvalReport evaluate_logs_only(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items,
                              const FusionConfig& config, const std::string& split);
EvalReport evaluate_malware_only(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items,
                                 const FusionConfig& config, const std::string& split);
EvalReport evaluate_fused(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items,
                          const FusionConfig& config, const std::string& split);

/// Logs-only (binary, T_l on s_l), malware-only (binary, T_m on s_m) and
/// fused (3-class) reports on the same items.
BaselineReports run_baselines(const std::vector<EvalItem>& items, const Scorer& scorer,
                              const std::string& split = "test");

struct ProbeReport {
    std::string ops;
    double rate = 0.0;
    std::size_t items = 0;
    std::size_t mutated = 0;
    double log_macro_f1_before = 0.0;
    double log_macro_f1_after = 0.0;
    double fused_macro_f1_before = 0.0;
    double fused_macro_f1_after = 0.0;
    double log_delta() const { return log_macro_f1_after - log_macro_f1_before; }
    double fused_delta() const { return fused_macro_f1_after - fused_macro_f1_before; }
    // Truth x prediction restricted to {NORMAL, SUSPICIOUS}.
    std::array<std::array<std::uint64_t, 2>, 2> normal_suspicious_before{};
    std::array<std::array<std::uint64_t, 2>, 2> normal_suspicious_after{};
    // Items predicted HIGH on the original whose variant keeps s_m >= T_m.
    std::size_t high_with_malware_evidence = 0;
    std::size_t high_to_suspicious = 0;
    std::size_t high_to_normal = 0;
    EvalReport fused_after;
    EvalReport logs_after;
};

/// Scores items before and after mutating their log lines with `augment`
/// (replace mode; `config.rate` selects the mutated items).
ProbeReport robustness_probe(const std::vector<EvalItem>& items, const AugmentConfig& config, const Scorer& scorer);

nlohmann::json probe_to_json(const ProbeReport& report);

struct AggregateReport {
    std::vector<std::uint64_t> seeds;
    std::vector<double> macro_f1;  // per seed, same order as seeds
    MacroMetrics mean;
    MacroMetrics stddev;  // population standard deviation
    std::uint64_t median_seed = 0;
    EvalReport median_report;
};

/// Runs `run` once per seed; the median seed is the lower median of macro-F1
/// (ties broken by seed value) and its report is attached.
AggregateReport multi_seed(const std::function<EvalReport(std::uint64_t)>& run,
                           const std::vector<std::uint64_t>& seeds);

nlohmann::json aggregate_to_json(const AggregateReport& report);

}  // namespace aisoc
