// aisoc command-line entry point. Every subcommand accepts --config FILE (flat
// key = value, keys are flag names without dashes) and --seed; flags given on
// the command line override the file.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aisoc/artifact.hpp"
#include "aisoc/pipeline.hpp"
#include "aisoc/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aisoc;

namespace {

// argv with config-file entries spliced in right after the subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.size() < 2) return args;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    const auto items = CLI::ConfigTOML().from_config(in);
    std::vector<std::string> injected;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--" || !item.parents.empty()) continue;
        if (item.inputs.size() == 1) {
            injected.push_back("--" + item.name + "=" + item.inputs.front());
        } else {
            injected.push_back("--" + item.name);
            injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
        }
    }
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    return args;
}

void add_common(CLI::App* sub, std::uint64_t& seed) {
    sub->add_option("--config", "Flat key = value config file; flags override it");
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
}

std::set<AugmentOp> parse_ops(const std::vector<std::string>& names) {
    std::set<AugmentOp> ops;
    for (const auto& n : names) {
        std::stringstream ss(n);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            const auto op = parse_augment_op(tok);
            if (!op) throw ConfigError("unknown augmentation op '" + tok + "'");
            ops.insert(*op);
        }
    }
    return ops;
}

CalibrationRequest parse_request(const std::string& s) {
    if (s == "auto" || s == "AUTO") return CalibrationRequest::Auto;
    if (s == "platt" || s == "PLATT") return CalibrationRequest::Platt;
    if (s == "isotonic" || s == "ISOTONIC") return CalibrationRequest::Isotonic;
    if (s == "identity" || s == "IDENTITY") return CalibrationRequest::Identity;
    throw ConfigError("unknown calibration method '" + s + "'");
}

std::vector<LogRecord> read_logs(const fs::path& p) {
    auto res = load_log_ndjson(p);
    if (res.skipped) std::cerr << "warning: skipped " << res.skipped << " malformed line(s) in " << p << '\n';
    return std::move(res.records);
}

std::vector<MalwareSample> read_malware(const fs::path& p) {
    auto res = load_malware_csv(p, "label", std::string("sample_id"));
    if (res.rejected) std::cerr << "warning: rejected " << res.rejected << " row(s) in " << p << '\n';
    return std::move(res.samples);
}

ModelArtifact merged(const std::vector<std::string>& paths) {
    ModelArtifact a;
    for (const auto& p : paths) {
        const auto b = load_artifact(p);
        if (b.vocabulary) a.vocabulary = b.vocabulary;
        if (b.standardizer) a.standardizer = b.standardizer;
        if (b.logistic) a.logistic = b.logistic;
        if (b.forest) a.forest = b.forest;
        if (b.log_calibrator) a.log_calibrator = b.log_calibrator;
        if (b.malware_calibrator) a.malware_calibrator = b.malware_calibrator;
        if (b.fusion) a.fusion = b.fusion;
        if (!b.version.empty()) a.version = b.version;
        a.created_at = std::max(a.created_at, b.created_at);
        for (const auto& [k, v] : b.fingerprints) a.fingerprints[k] = v;
    }
    return a;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << s;
}

std::string pretty(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

ScoringServer* g_server = nullptr;
void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aisoc - log + malware triage toolkit"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::uint64_t seed = 7;

    // generate ---------------------------------------------------------------
    ScenarioConfig scenario;
    MalwareScenarioConfig mw_scenario;
    std::string out_logs = "logs.ndjson", out_malware;
    auto* gen = app.add_subcommand("generate", "Generate a labeled log corpus and malware feature table");
    add_common(gen, seed);
    gen->add_option("--hosts", scenario.benign_hosts)->capture_default_str();
    gen->add_option("--attacks", scenario.attack_sessions)->capture_default_str();
    gen->add_option("--duration", scenario.duration_s, "Seconds")->capture_default_str();
    gen->add_option("--out", out_logs, "Log NDJSON output")->capture_default_str();
    gen->add_option("--malware-out", out_malware, "Malware CSV output (optional)");
    gen->add_option("--samples", mw_scenario.samples)->capture_default_str();
    gen->add_option("--malicious-fraction", mw_scenario.malicious_fraction)->capture_default_str();
    gen->add_option("--overlap", mw_scenario.overlap)->capture_default_str();
    gen->add_option("--dedup", "Near-duplicate Jaccard threshold (0 disables)");

    // augment ----------------------------------------------------------------
    std::string in_path, out_path;
    std::vector<std::string> ops_names{"CHAR_NOISE,KEYWORD_OBFUSCATION,SYNONYM_REPLACEMENT"};
    AugmentConfig aug_cfg;
    auto* aug = app.add_subcommand("augment", "Add adversarial variants of log records");
    add_common(aug, seed);
    aug->add_option("--in", in_path)->required();
    aug->add_option("--out", out_path)->required();
    aug->add_option("--ops", ops_names, "Comma-separated ops")->capture_default_str();
    aug->add_option("--rate", aug_cfg.rate)->capture_default_str();
    aug->add_option("--noise-rate", aug_cfg.char_noise_rate)->capture_default_str();
    aug->add_option("--synonym-rate", aug_cfg.synonym_rate)->capture_default_str();
    aug->add_flag("--replace", aug_cfg.replace, "Replace originals instead of appending variants");

    // split ------------------------------------------------------------------
    std::string split_kind = "time", out_dir = ".", malware_in;
    SplitSpec spec;
    auto* spl = app.add_subcommand("split", "Split a log corpus or malware table");
    add_common(spl, seed);
    spl->add_option("--in", in_path, "Log NDJSON input");
    spl->add_option("--malware", malware_in, "Malware CSV input");
    spl->add_option("--kind", split_kind, "time | stratified | kfold")->capture_default_str();
    spl->add_option("--train", spec.train)->capture_default_str();
    spl->add_option("--validation", spec.validation)->capture_default_str();
    spl->add_option("--test", spec.test)->capture_default_str();
    spl->add_option("--folds", spec.folds)->capture_default_str();
    spl->add_option("--out-dir", out_dir)->capture_default_str();

    // items ------------------------------------------------------------------
    std::string logs_in;
    ItemMix mix;
    std::size_t item_count = 0;
    std::string id_prefix = "item";
    auto* items_cmd = app.add_subcommand("items", "Pair log lines and malware samples into an evaluation manifest");
    add_common(items_cmd, seed);
    items_cmd->add_option("--logs", logs_in)->required();
    items_cmd->add_option("--malware", malware_in)->required();
    items_cmd->add_option("--out", out_path)->required();
    items_cmd->add_option("--count", item_count, "0 = as many as the pools allow");
    items_cmd->add_option("--normal", mix.normal);
    items_cmd->add_option("--suspicious", mix.suspicious);
    items_cmd->add_option("--high", mix.high);
    items_cmd->add_option("--prefix", id_prefix);

    // train-log --------------------------------------------------------------
    std::vector<std::string> artifacts;
    VocabularyConfig vocab_cfg;
    LogisticConfig lr_cfg{.weighting = ClassWeighting::InverseFrequency};
    std::string weighting = "inverse";
    std::size_t max_features = *vocab_cfg.max_features;
    auto* tl = app.add_subcommand("train-log", "Fit TF-IDF + logistic regression");
    add_common(tl, seed);
    tl->add_option("--train", in_path, "Training log NDJSON")->required();
    tl->add_option("--out", out_path, "Output artifact (PARTIAL allowed)")->required();
    tl->add_option("--min-df", vocab_cfg.min_df)->capture_default_str();
    tl->add_option("--max-features", max_features, "0 = unlimited")->capture_default_str();
    tl->add_option("--lambda", lr_cfg.lambda)->capture_default_str();
    tl->add_option("--epochs", lr_cfg.epochs)->capture_default_str();
    tl->add_option("--weighting", weighting, "none | inverse")->capture_default_str();

    // train-malware ----------------------------------------------------------
    ForestConfig rf_cfg;
    auto* tm = app.add_subcommand("train-malware", "Fit the random forest on static features");
    add_common(tm, seed);
    tm->add_option("--train", in_path, "Training malware CSV")->required();
    tm->add_option("--out", out_path)->required();
    tm->add_option("--trees", rf_cfg.n_trees)->capture_default_str();
    tm->add_option("--max-depth", rf_cfg.tree.max_depth)->capture_default_str();
    tm->add_option("--min-leaf", rf_cfg.tree.min_samples_leaf)->capture_default_str();
    tm->add_option("--features-per-split", rf_cfg.tree.features_per_split, "0 = ceil(sqrt(d))");

    // calibrate --------------------------------------------------------------
    std::string method = "auto";
    auto* cal = app.add_subcommand("calibrate", "Fit calibrators on validation data");
    add_common(cal, seed);
    cal->add_option("--artifact", artifacts, "Input artifact(s), merged in order")->required();
    cal->add_option("--log-validation", logs_in);
    cal->add_option("--malware-validation", malware_in);
    cal->add_option("--method", method, "auto | platt | isotonic | identity")->capture_default_str();
    cal->add_option("--out", out_path)->required();

    // tune -------------------------------------------------------------------
    double grid_step = kDefaultGridStep;
    std::string fusion_out, version;
    auto* tun = app.add_subcommand("tune", "Grid-search fusion thresholds on validation items");
    add_common(tun, seed);
    tun->add_option("--artifact", artifacts)->required();
    tun->add_option("--items", in_path, "Validation item manifest")->required();
    tun->add_option("--grid-step", grid_step)->capture_default_str();
    tun->add_option("--out", out_path, "Artifact with the tuned fusion config");
    tun->add_option("--fusion-out", fusion_out, "Standalone fusion config JSON");
    tun->add_option("--version", version);

    // evaluate ---------------------------------------------------------------
    std::string setting = "all", split_name = "test", report_out;
    auto* ev = app.add_subcommand("evaluate", "Evaluate logs-only, malware-only and fused settings");
    add_common(ev, seed);
    ev->add_option("--artifact", artifacts)->required();
    ev->add_option("--items", in_path)->required();
    ev->add_option("--setting", setting, "fused | logs_only | malware_only | all")->capture_default_str();
    ev->add_option("--split", split_name)->capture_default_str();
    ev->add_option("--report-out", report_out, "Write report JSON here");

    // probe ------------------------------------------------------------------
    std::vector<std::string> probe_ops{"CHAR_NOISE,KEYWORD_OBFUSCATION"};
    AugmentConfig probe_cfg;
    auto* prb = app.add_subcommand("probe", "Robustness probe with adversarial log variants");
    add_common(prb, seed);
    prb->add_option("--artifact", artifacts)->required();
    prb->add_option("--items", in_path)->required();
    prb->add_option("--ops", probe_ops)->capture_default_str();
    prb->add_option("--rate", probe_cfg.rate)->capture_default_str();
    prb->add_option("--noise-rate", probe_cfg.char_noise_rate)->capture_default_str();
    prb->add_option("--report-out", report_out);

    // save -------------------------------------------------------------------
    bool allow_partial = false;
    std::int64_t created_at = -1;
    auto* sav = app.add_subcommand("save", "Merge components into one artifact file");
    add_common(sav, seed);
    sav->add_option("--artifact", artifacts, "Component artifacts, later ones win")->required();
    sav->add_option("--fusion", fusion_out, "Fusion config JSON");
    sav->add_option("--out", out_path)->required();
    sav->add_option("--version", version);
    sav->add_option("--created-at", created_at, "Epoch ms recorded in the artifact");
    sav->add_flag("--partial", allow_partial, "Allow saving an incomplete (PARTIAL) artifact");

    // serve ------------------------------------------------------------------
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* srv = app.add_subcommand("serve", "Serve /v1/score, /v1/health, /v1/model-info");
    add_common(srv, seed);
    srv->add_option("--artifact", artifacts)->required();
    srv->add_option("--host", host)->capture_default_str();
    srv->add_option("--port", port, "0 picks a free port")->capture_default_str();

    // score-batch ------------------------------------------------------------
    auto* sb = app.add_subcommand("score-batch", "Score NDJSON requests offline");
    add_common(sb, seed);
    sb->add_option("--artifact", artifacts)->required();
    sb->add_option("--in", in_path, "Input NDJSON ('-' = stdin)")->capture_default_str();
    sb->add_option("--out", out_path, "Output NDJSON ('-' = stdout)");

    // pipeline ---------------------------------------------------------------
    PipelineConfig pcfg;
    std::vector<std::uint64_t> seeds;
    auto* pip = app.add_subcommand("pipeline", "generate -> train -> calibrate -> tune -> evaluate in one run");
    add_common(pip, seed);
    pip->add_option("--out-dir", out_dir)->capture_default_str();
    pip->add_option("--hosts", pcfg.scenario.benign_hosts)->capture_default_str();
    pip->add_option("--attacks", pcfg.scenario.attack_sessions)->capture_default_str();
    pip->add_option("--duration", pcfg.scenario.duration_s)->capture_default_str();
    pip->add_option("--samples", pcfg.malware.samples)->capture_default_str();
    pip->add_option("--overlap", pcfg.malware.overlap)->capture_default_str();
    pip->add_option("--trees", pcfg.forest.n_trees)->capture_default_str();
    pip->add_option("--grid-step", pcfg.grid_step)->capture_default_str();
    pip->add_option("--method", method)->capture_default_str();
    pip->add_option("--version", pcfg.version);
    pip->add_option("--seeds", seeds, "Run once per seed and aggregate (multi-seed)")->delimiter(',');

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(std::move(rev));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            scenario.seed = derive_seed(seed, 1);
            mw_scenario.seed = derive_seed(seed, 2);
            double threshold = kDefaultDedupThreshold;
            if (gen->count("--dedup")) threshold = gen->get_option("--dedup")->as<double>();
            auto logs = generate_corpus(scenario);
            if (threshold > 0.0) logs = dedup_near_identical(std::move(logs), threshold);
            write_log_ndjson(fs::path(out_logs), logs);
            std::size_t attack = 0;
            for (const auto& r : logs) attack += r.label == Label::Malicious;
            std::cout << "wrote " << logs.size() << " log records (" << attack << " malicious) to " << out_logs << '\n';
            if (!out_malware.empty()) {
                const auto mw = generate_malware(mw_scenario);
                write_malware_csv(fs::path(out_malware), mw, malware_feature_names());
                std::cout << "wrote " << mw.size() << " malware samples to " << out_malware << '\n';
            }
        } else if (*aug) {
            aug_cfg.ops = parse_ops(ops_names);
            aug_cfg.seed = seed;
            const auto out = augment(read_logs(in_path), aug_cfg);
            write_log_ndjson(fs::path(out_path), out);
            std::cout << "wrote " << out.size() << " records to " << out_path << '\n';
        } else if (*spl) {
            if (split_kind == "time") spec.kind = SplitKind::TimeOrdered;
            else if (split_kind == "stratified") spec.kind = SplitKind::StratifiedRandom;
            else if (split_kind == "kfold") spec.kind = SplitKind::KFold;
            else throw ConfigError("unknown split kind '" + split_kind + "'");
            spec.seed = seed;
            fs::create_directories(out_dir);
            if (!in_path.empty()) {
                const auto s = split(read_logs(in_path), spec);
                if (spec.kind == SplitKind::KFold) {
                    for (std::size_t k = 0; k < s.folds.size(); ++k)
                        write_log_ndjson(fs::path(out_dir) / ("logs_fold" + std::to_string(k) + ".ndjson"), s.folds[k]);
                } else {
                    write_log_ndjson(fs::path(out_dir) / "logs_train.ndjson", s.train);
                    write_log_ndjson(fs::path(out_dir) / "logs_validation.ndjson", s.validation);
                    write_log_ndjson(fs::path(out_dir) / "logs_test.ndjson", s.test);
                    std::cout << "logs: train " << s.train.size() << ", validation " << s.validation.size()
                              << ", test " << s.test.size() << '\n';
                }
            }
            if (!malware_in.empty()) {
                const auto s = split(read_malware(malware_in), spec);
                const auto& names = malware_feature_names();
                if (spec.kind == SplitKind::KFold) {
                    for (std::size_t k = 0; k < s.folds.size(); ++k)
                        write_malware_csv(fs::path(out_dir) / ("malware_fold" + std::to_string(k) + ".csv"), s.folds[k], names);
                } else {
                    write_malware_csv(fs::path(out_dir) / "malware_train.csv", s.train, names);
                    write_malware_csv(fs::path(out_dir) / "malware_validation.csv", s.validation, names);
                    write_malware_csv(fs::path(out_dir) / "malware_test.csv", s.test, names);
                    std::cout << "malware: train " << s.train.size() << ", validation " << s.validation.size()
                              << ", test " << s.test.size() << '\n';
                }
            }
            if (in_path.empty() && malware_in.empty()) throw ConfigError("split needs --in and/or --malware");
        } else if (*items_cmd) {
            const auto items = build_eval_items(read_logs(logs_in), read_malware(malware_in), mix, seed,
                                                item_count ? std::optional<std::size_t>(item_count) : std::nullopt,
                                                id_prefix);
            write_items_ndjson(out_path, items);
            std::cout << "wrote " << items.size() << " items to " << out_path << '\n';
        } else if (*tl) {
            if (weighting == "none") lr_cfg.weighting = ClassWeighting::None;
            else if (weighting == "inverse") lr_cfg.weighting = ClassWeighting::InverseFrequency;
            else throw ConfigError("unknown weighting '" + weighting + "'");
            vocab_cfg.max_features = max_features ? std::optional<std::size_t>(max_features) : std::nullopt;
            lr_cfg.seed = seed;
            const auto train = read_logs(in_path);
            const auto m = train_log_model(train, vocab_cfg, lr_cfg);
            ModelArtifact a;
            a.vocabulary = m.vocabulary;
            a.logistic = m.model;
            a.fingerprints["logs.train"] = fingerprint_logs(train);
            a.fingerprints["seed.logistic"] = std::to_string(seed);
            save_artifact(a, out_path, ArtifactStatus::Partial);
            std::cout << "vocabulary " << m.vocabulary.size() << " terms, " << m.model.meta.iterations
                      << " iterations, loss " << m.model.meta.final_loss << '\n';
        } else if (*tm) {
            rf_cfg.seed = seed;
            const auto train = read_malware(in_path);
            const auto m = train_malware_model(train, rf_cfg);
            ModelArtifact a;
            a.standardizer = m.standardizer;
            a.forest = m.forest;
            a.fingerprints["malware.train"] = fingerprint_samples(train);
            a.fingerprints["seed.forest"] = std::to_string(seed);
            save_artifact(a, out_path, ArtifactStatus::Partial);
            std::cout << "forest of " << m.forest.trees.size() << " trees on " << train.size() << " samples\n";
        } else if (*cal) {
            auto a = merged(artifacts);
            const auto req = parse_request(method);
            if (!logs_in.empty()) {
                if (!a.vocabulary || !a.logistic) throw ArtifactError("missing component 'logistic' for log calibration");
                const auto val = read_logs(logs_in);
                const LogModel m{*a.vocabulary, *a.logistic};
                a.log_calibrator = fit_calibrator(raw_log_scores(m, val), binary_labels(val), req);
                std::cout << "log calibrator: " << to_string(a.log_calibrator->method) << '\n';
            }
            if (!malware_in.empty()) {
                if (!a.standardizer || !a.forest) throw ArtifactError("missing component 'forest' for malware calibration");
                const auto val = read_malware(malware_in);
                const MalwareModel m{*a.standardizer, *a.forest};
                a.malware_calibrator = fit_calibrator(raw_malware_scores(m, val), binary_labels(val), req);
                std::cout << "malware calibrator: " << to_string(a.malware_calibrator->method) << '\n';
            }
            save_artifact(a, out_path, ArtifactStatus::Partial);
        } else if (*tun) {
            auto a = merged(artifacts);
            if (!a.fusion) a.fusion = FusionConfig{};
            const Scorer scorer(a);
            const auto items = load_items_ndjson(in_path);
            const auto res = tune_thresholds(score_items(scorer, items), truth_triage(items), grid_step, "validation", version);
            std::printf("T_m=%.4g T_l=%.4g validation_macro_f1=%.6f (%zu cells)\n", res.config.t_m, res.config.t_l,
                        res.macro_f1, res.cells_evaluated);
            a.fusion = res.config;
            if (!out_path.empty()) save_artifact(a, out_path, ArtifactStatus::Partial);
            if (!fusion_out.empty()) write_text(fusion_out, pretty(fusion_config_to_json(res.config)));
        } else if (*ev) {
            const Scorer scorer(merged(artifacts));
            const auto items = load_items_ndjson(in_path);
            const auto reports = run_baselines(items, scorer, split_name);
            json out;
            std::string table;
            const auto add = [&](const EvalReport& r) {
                out[r.setting] = report_to_json(r);
                table += render_report_table(r) + "\n";
            };
            if (setting == "all" || setting == "logs_only") add(reports.logs_only);
            if (setting == "all" || setting == "malware_only") add(reports.malware_only);
            if (setting == "all" || setting == "fused") add(reports.fused);
            if (out.empty()) throw ConfigError("unknown setting '" + setting + "'");
            const json doc = setting == "all" ? out : out.begin().value();
            // JSON goes to stdout only when no report file was requested
            if (report_out.empty()) std::cout << pretty(doc);
            else write_text(report_out, pretty(doc));
            std::cout << table;
        } else if (*prb) {
            const Scorer scorer(merged(artifacts));
            probe_cfg.ops = parse_ops(probe_ops);
            probe_cfg.seed = seed;
            const auto rep = robustness_probe(load_items_ndjson(in_path), probe_cfg, scorer);
            const auto doc = probe_to_json(rep);
            std::printf("log macro-F1 %.4f -> %.4f (delta %+.4f); fused macro-F1 %.4f -> %.4f (delta %+.4f)\n",
                        rep.log_macro_f1_before, rep.log_macro_f1_after, rep.log_delta(), rep.fused_macro_f1_before,
                        rep.fused_macro_f1_after, rep.fused_delta());
            std::printf("NORMAL/SUSPICIOUS before [[%llu,%llu],[%llu,%llu]] after [[%llu,%llu],[%llu,%llu]]\n",
                        (unsigned long long)rep.normal_suspicious_before[0][0], (unsigned long long)rep.normal_suspicious_before[0][1],
                        (unsigned long long)rep.normal_suspicious_before[1][0], (unsigned long long)rep.normal_suspicious_before[1][1],
                        (unsigned long long)rep.normal_suspicious_after[0][0], (unsigned long long)rep.normal_suspicious_after[0][1],
                        (unsigned long long)rep.normal_suspicious_after[1][0], (unsigned long long)rep.normal_suspicious_after[1][1]);
            if (!report_out.empty()) write_text(report_out, pretty(doc));
        } else if (*sav) {
            auto a = merged(artifacts);
            if (!fusion_out.empty()) {
                std::ifstream in(fusion_out);
                if (!in) throw ConfigError("cannot read " + fusion_out);
                a.fusion = fusion_config_from_json(json::parse(in));
            }
            if (!version.empty()) a.version = version;
            if (created_at >= 0) a.created_at = created_at;
            const auto sum = save_artifact(a, out_path, allow_partial ? ArtifactStatus::Partial : ArtifactStatus::Serving);
            std::cout << to_string(a.status()) << " artifact " << out_path << " sha256 " << sum << '\n';
        } else if (*srv) {
            auto scorer = make_serving_scorer(merged(artifacts));
            ScoringServer server(scorer);
            const int bound = server.bind(host, port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "serving " << scorer->version() << " on http://" << host << ':' << bound << std::endl;
            server.run();
            g_server = nullptr;
        } else if (*sb) {
            const Scorer scorer(merged(artifacts));
            std::ifstream fin;
            std::ofstream fout;
            if (!in_path.empty() && in_path != "-") {
                fin.open(in_path, std::ios::binary);
                if (!fin) throw LoadError("cannot read " + in_path);
            }
            if (!out_path.empty() && out_path != "-") {
                fout.open(out_path, std::ios::binary | std::ios::trunc);
                if (!fout) throw Error("cannot write " + out_path);
            }
            score_batch(scorer, fin.is_open() ? static_cast<std::istream&>(fin) : std::cin,
                        fout.is_open() ? static_cast<std::ostream&>(fout) : std::cout);
        } else if (*pip) {
            pcfg.calibration = parse_request(method);
            fs::create_directories(out_dir);
            const fs::path dir(out_dir);
            if (!seeds.empty()) {
                const auto agg = multi_seed(
                    [&](std::uint64_t s) {
                        auto c = pcfg;
                        c.apply_seed(s);
                        return run_pipeline(c).reports.fused;
                    },
                    seeds);
                write_text(dir / "aggregate.json", pretty(aggregate_to_json(agg)));
                std::printf("macro-F1 mean %.4f std %.4f; median seed %llu\n", agg.mean.f1, agg.stddev.f1,
                            static_cast<unsigned long long>(agg.median_seed));
                std::cout << render_report_table(agg.median_report);
            } else {
                pcfg.apply_seed(seed);
                const auto res = run_pipeline(pcfg);
                const auto sum = save_artifact(res.artifact, dir / "artifact.bin");
                write_items_ndjson(dir / "validation_items.ndjson", res.data.validation_items);
                write_items_ndjson(dir / "test_items.ndjson", res.data.test_items);
                write_text(dir / "fusion.json", pretty(fusion_config_to_json(res.tuning.config)));
                json reports{{"logs_only", report_to_json(res.reports.logs_only)},
                             {"malware_only", report_to_json(res.reports.malware_only)},
                             {"fused", report_to_json(res.reports.fused)}};
                write_text(dir / "reports.json", pretty(reports));
                std::printf("artifact sha256 %s\nT_m=%.4g T_l=%.4g validation macro-F1 %.4f\n", sum.c_str(),
                            res.tuning.config.t_m, res.tuning.config.t_l, res.tuning.macro_f1);
                std::cout << render_report_table(res.reports.logs_only) << '\n'
                          << render_report_table(res.reports.malware_only) << '\n'
                          << render_report_table(res.reports.fused);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
