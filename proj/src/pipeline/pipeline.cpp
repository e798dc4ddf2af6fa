#include <sstream>

#include "aisoc/pipeline.hpp"

namespace aisoc {

LogModel train_log_model(const std::vector<LogRecord>& train, const VocabularyConfig& vocab,
                         const LogisticConfig& config) {
    LogModel m;
    m.vocabulary = fit_vocabulary(train, vocab);
    std::vector<SparseVector> X;
    X.reserve(train.size());
    for (const auto& r : train) X.push_back(transform_text(r.message, m.vocabulary));
    m.model = train_logistic(X, binary_labels(train), config);
    return m;
}

MalwareModel train_malware_model(const std::vector<MalwareSample>& train, const ForestConfig& config) {
    MalwareModel m;
    m.standardizer = fit_standardizer(train);
    std::vector<DenseVector> X;
    X.reserve(train.size());
    for (const auto& s : train) X.push_back(transform_dense(s, m.standardizer));
    m.forest = train_forest(X, binary_labels(train), config);
    return m;
}

std::vector<double> raw_log_scores(const LogModel& m, const std::vector<LogRecord>& records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(score_logistic(m.model, transform_text(r.message, m.vocabulary)));
    return out;
}

std::vector<double> raw_malware_scores(const MalwareModel& m, const std::vector<MalwareSample>& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(score_forest(m.forest, transform_dense(s, m.standardizer)));
    return out;
}

std::vector<int> binary_labels(const std::vector<LogRecord>& records) {
    std::vector<int> y;
    y.reserve(records.size());
    for (const auto& r : records) {
        if (!r.label) throw TrainingError("unlabeled log record in a labeled stage");
        y.push_back(to_binary(*r.label));
    }
    return y;
}

std::vector<int> binary_labels(const std::vector<MalwareSample>& samples) {
    std::vector<int> y;
    y.reserve(samples.size());
    for (const auto& s : samples) {
        if (!s.label) throw TrainingError("unlabeled malware sample '" + s.sample_id + "' in a labeled stage");
        y.push_back(to_binary(*s.label));
    }
    return y;
}

CrossValidationResult log_cross_validation(const std::vector<LogRecord>& records, std::size_t folds,
                                           std::uint64_t seed, const VocabularyConfig& vocab,
                                           const LogisticConfig& config) {
    const auto y = binary_labels(records);
    const auto fold_sets = stratified_folds(std::vector<int>(y.begin(), y.end()), folds, seed);
    CrossValidationResult res;
    std::vector<int> oof(records.size(), 0);
    for (const auto& held : fold_sets) {
        std::vector<char> is_held(records.size(), 0);
        for (const auto i : held) is_held[i] = 1;
        std::vector<LogRecord> train;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (!is_held[i]) train.push_back(records[i]);
        const auto m = train_log_model(train, vocab, config);
        std::vector<int> pred, truth;
        for (const auto i : held) {
            const int p = score_logistic(m.model, transform_text(records[i].message, m.vocabulary)) >= 0.5 ? 1 : 0;
            oof[i] = p;
            pred.push_back(p);
            truth.push_back(y[i]);
        }
        res.fold_macro_f1.push_back(classification_report(pred, truth, {"BENIGN", "MALICIOUS"}).macro.f1);
    }
    res.pooled = classification_report(oof, y, {"BENIGN", "MALICIOUS"});
    res.pooled.setting = "logs_only/cv";
    res.pooled.split = std::to_string(folds) + "-fold";
    res.pooled.seeds = {seed};
    res.pooled_macro_f1 = res.pooled.macro.f1;
    return res;
}

void PipelineConfig::apply_seed(std::uint64_t s) {
    seed = s;
    scenario.seed = derive_seed(s, 1);
    malware.seed = derive_seed(s, 2);
    augmentation.seed = derive_seed(s, 3);
    logistic.seed = derive_seed(s, 4);
    forest.seed = derive_seed(s, 5);
}

std::string fingerprint_logs(const std::vector<LogRecord>& records) {
    std::ostringstream out;
    write_log_ndjson(out, records);
    return "sha256:" + sha256_hex(out.str());
}

std::string fingerprint_samples(const std::vector<MalwareSample>& samples) {
    std::ostringstream out;
    write_malware_csv(out, samples, malware_feature_names());
    return "sha256:" + sha256_hex(out.str());
}

PipelineData prepare_data(const PipelineConfig& cfg) {
    PipelineData d;
    const auto logs = dedup_near_identical(generate_corpus(cfg.scenario), cfg.dedup_threshold);
    d.logs = split(logs, SplitSpec{.kind = SplitKind::TimeOrdered});
    d.malware = split(generate_malware(cfg.malware),
                      SplitSpec{.kind = SplitKind::StratifiedRandom, .seed = derive_seed(cfg.seed, 6)});
    d.augmented_train = d.logs.train;
    if (cfg.augment_training) {
        auto aug = cfg.augmentation;
        aug.replace = false;
        d.augmented_train = augment(d.logs.train, aug);
    }
    d.validation_items = build_eval_items(d.logs.validation, d.malware.validation, cfg.mix, derive_seed(cfg.seed, 7),
                                          std::nullopt, "val");
    d.test_items = build_eval_items(d.logs.test, d.malware.test, cfg.mix, derive_seed(cfg.seed, 8), std::nullopt, "test");
    return d;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult res;
    res.data = prepare_data(cfg);
    const auto& d = res.data;

    const auto log_model = train_log_model(d.augmented_train, cfg.vocabulary, cfg.logistic);
    const auto mw_model = train_malware_model(d.malware.train, cfg.forest);
    const auto log_cal =
        fit_calibrator(raw_log_scores(log_model, d.logs.validation), binary_labels(d.logs.validation), cfg.calibration);
    const auto mw_cal = fit_calibrator(raw_malware_scores(mw_model, d.malware.validation),
                                       binary_labels(d.malware.validation), cfg.calibration);

    auto& a = res.artifact;
    a.created_at = cfg.scenario.start_ms + cfg.scenario.duration_s * 1000;
    a.version = cfg.version;
    a.vocabulary = log_model.vocabulary;
    a.logistic = log_model.model;
    a.standardizer = mw_model.standardizer;
    a.forest = mw_model.forest;
    a.log_calibrator = log_cal;
    a.malware_calibrator = mw_cal;
    // Provisional fusion config so the scorer can produce calibrated pairs.
    a.fusion = FusionConfig{};
    a.fingerprints = {{"seed", std::to_string(cfg.seed)},
                      {"logs.train", fingerprint_logs(d.augmented_train)},
                      {"logs.validation", fingerprint_logs(d.logs.validation)},
                      {"logs.test", fingerprint_logs(d.logs.test)},
                      {"malware.train", fingerprint_samples(d.malware.train)},
                      {"malware.validation", fingerprint_samples(d.malware.validation)},
                      {"malware.test", fingerprint_samples(d.malware.test)}};
    {
        const Scorer provisional(a);
        const auto pairs = score_items(provisional, d.validation_items);
        res.tuning = tune_thresholds(pairs, truth_triage(d.validation_items), cfg.grid_step, "validation", cfg.version);
    }
    a.fusion = res.tuning.config;
    const Scorer scorer(a);
    res.reports = run_baselines(d.test_items, scorer, "test");
    for (auto* r : {&res.reports.logs_only, &res.reports.malware_only, &res.reports.fused}) r->seeds = {cfg.seed};
    return res;
}

}  // namespace aisoc
