#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "aisoc/artifact.hpp"
#include "aisoc/calibrate.hpp"
#include "aisoc/corpus.hpp"
#include "aisoc/eval.hpp"
#include "aisoc/features.hpp"
#include "aisoc/fusion.hpp"
#include "aisoc/learn.hpp"

namespace aisoc {

struct LogModel {
    Vocabulary vocabulary;
    LogisticModel model;
};

struct MalwareModel {
    StandardizerParams standardizer;
    ForestModel forest;
};

LogModel train_log_model(const std::vector<LogRecord>& train, const VocabularyConfig& vocab,
                         const LogisticConfig& config);
MalwareModel train_malware_model(const std::vector<MalwareSample>& train, const ForestConfig& config);

std::vector<double> raw_log_scores(const LogModel& m, const std::vector<LogRecord>& records);
std::vector<double> raw_malware_scores(const MalwareModel& m, const std::vector<MalwareSample>& samples);
std::vector<int> binary_labels(const std::vector<LogRecord>& records);
std::vector<int> binary_labels(const std::vector<MalwareSample>& samples);

struct CrossValidationResult {
    std::vector<double> fold_macro_f1;
    double pooled_macro_f1 = 0.0;  // over out-of-fold predictions of every record
    EvalReport pooled;
};

/// Stratified k-fold CV of TF-IDF + logistic regression; the vocabulary is
/// refit on each training fold. Predictions threshold the raw probability at 0.5.
CrossValidationResult log_cross_validation(const std::vector<LogRecord>& records, std::size_t folds,
                                           std::uint64_t seed, const VocabularyConfig& vocab,
                                           const LogisticConfig& config);

struct PipelineConfig {
    std::uint64_t seed = 7;
    ScenarioConfig scenario{.benign_hosts = 4, .attack_sessions = 40, .duration_s = 3600};
    MalwareScenarioConfig malware{.samples = 1200, .malicious_fraction = 0.5, .overlap = 0.0};
    double dedup_threshold = kDefaultDedupThreshold;
    bool augment_training = true;
    AugmentConfig augmentation{.ops = {AugmentOp::CharNoise, AugmentOp::KeywordObfuscation, AugmentOp::SynonymReplacement},
                               .rate = 0.5};
    VocabularyConfig vocabulary{};
    LogisticConfig logistic{.lambda = 1e-3, .epochs = 300, .weighting = ClassWeighting::InverseFrequency};
    ForestConfig forest{.n_trees = 50, .tree = {}};
    CalibrationRequest calibration = CalibrationRequest::Auto;
    double grid_step = kDefaultGridStep;
    ItemMix mix{};
    std::string version;  // artifact version label; empty derives one from the checksum

    // Applies `seed` to every seeded stage.
    void apply_seed(std::uint64_t s);
};

struct PipelineData {
    DatasetSplit<LogRecord> logs;
    DatasetSplit<MalwareSample> malware;
    std::vector<LogRecord> augmented_train;  // logs.train plus variants
    std::vector<EvalItem> validation_items;
    std::vector<EvalItem> test_items;
};

struct PipelineResult {
    PipelineData data;
    ModelArtifact artifact;
    TuningResult tuning;
    BaselineReports reports;
};

// generate -> dedup -> split -> augment -> train -> calibrate -> tune -> evaluate
PipelineData prepare_data(const PipelineConfig& config);
PipelineResult run_pipeline(const PipelineConfig& config);

std::string fingerprint_logs(const std::vector<LogRecord>& records);
std::string fingerprint_samples(const std::vector<MalwareSample>& samples);

}  // namespace aisoc
