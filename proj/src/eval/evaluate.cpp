#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aisoc/artifact.hpp"
#include "aisoc/eval.hpp"

namespace aisoc {

using nlohmann::json;

json eval_item_to_json(const EvalItem& item) {
    json j{{"entity_id", item.entity_id}};
    if (item.log_message) j["log_message"] = *item.log_message;
    if (item.log_label) j["log_label"] = to_string(*item.log_label);
    if (item.malware_features) j["malware_features"] = *item.malware_features;
    if (item.malware_label) j["malware_label"] = to_string(*item.malware_label);
    return j;
}

EvalItem eval_item_from_json(const json& j) {
    if (!j.is_object()) throw LoadError("item must be a JSON object");
    EvalItem item;
    try {
        item.entity_id = j.at("entity_id").get<std::string>();
        if (j.contains("log_message") && !j["log_message"].is_null()) item.log_message = j["log_message"].get<std::string>();
        if (j.contains("malware_features") && !j["malware_features"].is_null())
            item.malware_features = j["malware_features"].get<DenseVector>();
        for (const char* key : {"log_label", "malware_label"}) {
            if (!j.contains(key) || j[key].is_null()) continue;
            const auto label = parse_label(j[key].get<std::string>());
            if (!label) throw LoadError(std::string("unknown ") + key);
            (std::string_view(key) == "log_label" ? item.log_label : item.malware_label) = *label;
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("invalid item: ") + e.what());
    }
    if (!item.log_message && !item.malware_features) throw LoadError("item carries neither modality");
    return item;
}

void write_items_ndjson(const std::filesystem::path& path, const std::vector<EvalItem>& items) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + path.string());
    for (const auto& item : items) out << eval_item_to_json(item).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

std::vector<EvalItem> load_items_ndjson(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot read " + path.string());
    std::vector<EvalItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            items.push_back(eval_item_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw LoadError(std::string("malformed item: ") + e.what(), line_no);
        } catch (const LoadError& e) {
            throw LoadError(e.what(), line_no);
        }
    }
    return items;
}

namespace {

// Largest-remainder apportionment of n over fractions (ties to the earlier slot).
std::vector<std::size_t> apportion_counts(std::size_t n, const std::vector<double>& fractions) {
    double total = 0.0;
    for (const double f : fractions) total += f;
    if (!(total > 0.0)) throw ConfigError("item mix must have a positive fraction");
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (fractions[i] < 0.0) throw ConfigError("item mix fractions must be non-negative");
        const double exact = static_cast<double>(n) * fractions[i] / total;
        counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        used += counts[i];
        rem.emplace_back(exact - static_cast<double>(counts[i]), i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; used < n; ++k, ++used) ++counts[rem[k % rem.size()].second];
    return counts;
}

struct MixCounts {
    std::size_t normal, malware_only, log_only, high;
    std::size_t benign_logs() const { return normal + malware_only; }
    std::size_t malicious_logs() const { return log_only + high; }
    std::size_t benign_malware() const { return normal + log_only; }
    std::size_t malicious_malware() const { return malware_only + high; }
};

MixCounts mix_counts(std::size_t n, const ItemMix& mix) {
    const auto c = apportion_counts(n, {mix.normal, mix.suspicious, mix.high});
    return {c[0], (c[1] + 1) / 2, c[1] / 2, c[2]};
}

}  // namespace

std::vector<EvalItem> build_eval_items(const std::vector<LogRecord>& logs, const std::vector<MalwareSample>& malware,
                                       const ItemMix& mix, std::uint64_t seed, std::optional<std::size_t> count,
                                       const std::string& id_prefix) {
    std::vector<const LogRecord*> benign_logs, malicious_logs;
    for (const auto& r : logs)
        if (r.label) (*r.label == Label::Malicious ? malicious_logs : benign_logs).push_back(&r);
    std::vector<const MalwareSample*> benign_mw, malicious_mw;
    for (const auto& s : malware)
        if (s.label) (*s.label == Label::Malicious ? malicious_mw : benign_mw).push_back(&s);

    const auto fits = [&](const MixCounts& m) {
        return m.benign_logs() <= benign_logs.size() && m.malicious_logs() <= malicious_logs.size() &&
               m.benign_malware() <= benign_mw.size() && m.malicious_malware() <= malicious_mw.size();
    };
    std::size_t n = 0;
    if (count) {
        n = *count;
        if (!fits(mix_counts(n, mix))) throw ConfigError("labeled pools too small for the requested item count");
    } else {
        n = std::min(logs.size(), malware.size());
        while (n > 0 && !fits(mix_counts(n, mix))) --n;
    }
    const auto m = mix_counts(n, mix);

    Rng rng(derive_seed(seed, 0x17E5));
    rng.shuffle(std::span(benign_logs));
    rng.shuffle(std::span(malicious_logs));
    rng.shuffle(std::span(benign_mw));
    rng.shuffle(std::span(malicious_mw));

    std::size_t bl = 0, ml = 0, bm = 0, mm = 0;
    std::vector<EvalItem> items;
    items.reserve(n);
    const auto emit = [&](const LogRecord* log, const MalwareSample* sample) {
        EvalItem item;
        item.log_message = log->message;
        item.log_label = log->label;
        item.malware_features = sample->features;
        item.malware_label = sample->label;
        items.push_back(std::move(item));
    };
    for (std::size_t i = 0; i < m.normal; ++i) emit(benign_logs[bl++], benign_mw[bm++]);
    for (std::size_t i = 0; i < m.malware_only; ++i) emit(benign_logs[bl++], malicious_mw[mm++]);
    for (std::size_t i = 0; i < m.log_only; ++i) emit(malicious_logs[ml++], benign_mw[bm++]);
    for (std::size_t i = 0; i < m.high; ++i) emit(malicious_logs[ml++], malicious_mw[mm++]);
    rng.shuffle(std::span(items));
    char buf[32];
    for (std::size_t i = 0; i < items.size(); ++i) {
        std::snprintf(buf, sizeof buf, "-%05zu", i);
        items[i].entity_id = id_prefix + buf;
    }
    return items;
}

std::vector<TriageLabel> truth_triage(const std::vector<EvalItem>& items) {
    std::vector<TriageLabel> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        try {
            out.push_back(derive_truth_triage(item.malware_label, item.log_label));
        } catch (const ConfigError&) {
            throw ConfigError("item '" + item.entity_id + "' lacks a component label");
        }
    }
    return out;
}

std::vector<CalibratedScorePair> score_items(const Scorer& scorer, const std::vector<EvalItem>& items) {
    std::vector<CalibratedScorePair> pairs;
    pairs.reserve(items.size());
    for (const auto& item : items) {
        CalibratedScorePair p;
        p.entity_id = item.entity_id;
        if (item.malware_features) {
            if (item.malware_features->size() != scorer.malware_dimension())
                throw DimensionError("item '" + item.entity_id + "' has the wrong malware feature count");
            p.s_m = scorer.malware_score(*item.malware_features);
        }
        if (item.log_message) p.s_l = scorer.log_score(*item.log_message);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

namespace {

void check_lengths(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items) {
    if (pairs.size() != items.size()) throw MetricError("score pairs and items differ in length");
    if (items.empty()) throw MetricError("evaluation set is empty");
}

EvalReport binary_report(const std::vector<double>& scores, const std::vector<int>& truth, double threshold,
                         const std::string& setting, const std::string& split) {
    std::vector<int> pred(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= threshold ? 1 : 0;
    auto r = classification_report(pred, truth, {"BENIGN", "MALICIOUS"});
    r.setting = setting;
    r.split = split;
    const bool both = std::count(truth.begin(), truth.end(), 1) > 0 && std::count(truth.begin(), truth.end(), 0) > 0;
    if (both) r.auc = AucMetrics{roc_auc(scores, truth), pr_auc(scores, truth)};
    return r;
}

std::string fmt_threshold(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

// Binary baselines are judged on the entity: an attack in either modality
// counts, so a single detector misses what only the other modality shows.
int attack_truth(const EvalItem& item) {
    return derive_truth_triage(item.malware_label, item.log_label) != TriageLabel::Normal ? 1 : 0;
}

}  // namespace

EvalReport evaluate_logs_only(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items,
                              const FusionConfig& config, const std::string& split) {
    check_lengths(pairs, items);
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].log_message)
            throw ConfigError("item '" + items[i].entity_id + "' lacks a log line");
        s.push_back(pairs[i].s_l);
        y.push_back(attack_truth(items[i]));
    }
    auto r = binary_report(s, y, config.t_l, "logs_only", split);
    r.fingerprints["threshold.t_l"] = fmt_threshold(config.t_l);
    return r;
}

EvalReport evaluate_malware_only(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items,
                                 const FusionConfig& config, const std::string& split) {
    check_lengths(pairs, items);
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].malware_features)
            throw ConfigError("item '" + items[i].entity_id + "' lacks a malware sample");
        s.push_back(pairs[i].s_m);
        y.push_back(attack_truth(items[i]));
    }
    auto r = binary_report(s, y, config.t_m, "malware_only", split);
    r.fingerprints["threshold.t_m"] = fmt_threshold(config.t_m);
    return r;
}

EvalReport evaluate_fused(const std::vector<CalibratedScorePair>& pairs, const std::vector<EvalItem>& items,
                          const FusionConfig& config, const std::string& split) {
    check_lengths(pairs, items);
    const auto truth = truth_triage(items);
    std::vector<int> t(items.size()), p(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        t[i] = severity(truth[i]);
        p[i] = severity(fuse(pairs[i], config));
    }
    std::vector<std::string> names;
    for (const auto c : kTriageLabels) names.emplace_back(to_string(c));
    auto r = classification_report(p, t, names);
    r.setting = "fused";
    r.split = split;
    r.fingerprints["threshold.t_m"] = fmt_threshold(config.t_m);
    r.fingerprints["threshold.t_l"] = fmt_threshold(config.t_l);
    return r;
}

namespace {

std::string items_fingerprint(const std::vector<EvalItem>& items) {
    std::string blob;
    for (const auto& item : items) {
        blob += eval_item_to_json(item).dump(-1, ' ', false, json::error_handler_t::replace);
        blob += '\n';
    }
    return "sha256:" + sha256_hex(blob);
}

void stamp(EvalReport& r, const Scorer& scorer, const std::string& items_fp) {
    r.fingerprints["artifact_version"] = scorer.version();
    r.fingerprints["items"] = items_fp;
    for (const auto& [k, v] : scorer.artifact().fingerprints) r.fingerprints["train." + k] = v;
}

}  // namespace

BaselineReports run_baselines(const std::vector<EvalItem>& items, const Scorer& scorer, const std::string& split) {
    const auto pairs = score_items(scorer, items);
    BaselineReports out{evaluate_logs_only(pairs, items, scorer.fusion(), split),
                        evaluate_malware_only(pairs, items, scorer.fusion(), split),
                        evaluate_fused(pairs, items, scorer.fusion(), split)};
    const auto fp = items_fingerprint(items);
    stamp(out.logs_only, scorer, fp);
    stamp(out.malware_only, scorer, fp);
    stamp(out.fused, scorer, fp);
    return out;
}

ProbeReport robustness_probe(const std::vector<EvalItem>& items, const AugmentConfig& config, const Scorer& scorer) {
    ProbeReport rep;
    rep.items = items.size();
    rep.rate = config.rate;
    for (const auto op : config.ops) {
        if (!rep.ops.empty()) rep.ops += '+';
        rep.ops += to_string(op);
    }

    std::vector<LogRecord> records;
    records.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].log_message) throw ConfigError("item '" + items[i].entity_id + "' lacks a log line");
        LogRecord r;
        r.timestamp = static_cast<std::int64_t>(i);
        r.host = items[i].entity_id;
        r.channel = Channel::Process;
        r.message = *items[i].log_message;
        r.label = items[i].log_label;
        records.push_back(std::move(r));
    }
    auto cfg = config;
    cfg.replace = true;
    const auto variants = augment(records, cfg);

    auto mutated_items = items;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (variants[i].origin == Origin::Augmented) ++rep.mutated;
        mutated_items[i].log_message = variants[i].message;
    }

    const auto& fusion = scorer.fusion();
    const auto before = score_items(scorer, items);
    const auto after = score_items(scorer, mutated_items);
    const auto logs_before = evaluate_logs_only(before, items, fusion, "probe");
    rep.logs_after = evaluate_logs_only(after, mutated_items, fusion, "probe");
    const auto fused_before = evaluate_fused(before, items, fusion, "probe");
    rep.fused_after = evaluate_fused(after, mutated_items, fusion, "probe");
    rep.logs_after.setting = "logs_only/adversarial";
    rep.fused_after.setting = "fused/adversarial";
    rep.log_macro_f1_before = logs_before.macro.f1;
    rep.log_macro_f1_after = rep.logs_after.macro.f1;
    rep.fused_macro_f1_before = fused_before.macro.f1;
    rep.fused_macro_f1_after = rep.fused_after.macro.f1;
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t p = 0; p < 2; ++p) {
            rep.normal_suspicious_before[t][p] = fused_before.confusion[t][p];
            rep.normal_suspicious_after[t][p] = rep.fused_after.confusion[t][p];
        }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (fuse(before[i], fusion) != TriageLabel::HighConfidenceAttack) continue;
        if (!(after[i].s_m >= fusion.t_m)) continue;
        ++rep.high_with_malware_evidence;
        const auto now = fuse(after[i], fusion);
        if (now == TriageLabel::Suspicious) ++rep.high_to_suspicious;
        if (now == TriageLabel::Normal) ++rep.high_to_normal;
    }
    const auto fp = items_fingerprint(items);
    stamp(rep.logs_after, scorer, fp);
    stamp(rep.fused_after, scorer, fp);
    return rep;
}

json probe_to_json(const ProbeReport& r) {
    const auto sub = [](const std::array<std::array<std::uint64_t, 2>, 2>& m) {
        return json::array({json::array({m[0][0], m[0][1]}), json::array({m[1][0], m[1][1]})});
    };
    return json{{"ops", r.ops},
                {"rate", r.rate},
                {"items", r.items},
                {"mutated", r.mutated},
                {"log_macro_f1", {{"before", r.log_macro_f1_before}, {"after", r.log_macro_f1_after}, {"delta", r.log_delta()}}},
                {"fused_macro_f1",
                 {{"before", r.fused_macro_f1_before}, {"after", r.fused_macro_f1_after}, {"delta", r.fused_delta()}}},
                {"normal_suspicious", {{"classes", {"NORMAL", "SUSPICIOUS"}}, {"before", sub(r.normal_suspicious_before)},
                                       {"after", sub(r.normal_suspicious_after)}}},
                {"high_with_malware_evidence",
                 {{"count", r.high_with_malware_evidence},
                  {"to_suspicious", r.high_to_suspicious},
                  {"to_normal", r.high_to_normal}}},
                {"logs_after", report_to_json(r.logs_after)},
                {"fused_after", report_to_json(r.fused_after)}};
}

AggregateReport multi_seed(const std::function<EvalReport(std::uint64_t)>& run, const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("multi_seed needs at least one seed");
    AggregateReport agg;
    agg.seeds = seeds;
    std::vector<EvalReport> reports;
    reports.reserve(seeds.size());
    for (const auto s : seeds) reports.push_back(run(s));
    const double n = static_cast<double>(seeds.size());
    for (const auto& r : reports) {
        agg.macro_f1.push_back(r.macro.f1);
        agg.mean.precision += r.macro.precision / n;
        agg.mean.recall += r.macro.recall / n;
        agg.mean.f1 += r.macro.f1 / n;
    }
    for (const auto& r : reports) {
        agg.stddev.precision += std::pow(r.macro.precision - agg.mean.precision, 2) / n;
        agg.stddev.recall += std::pow(r.macro.recall - agg.mean.recall, 2) / n;
        agg.stddev.f1 += std::pow(r.macro.f1 - agg.mean.f1, 2) / n;
    }
    agg.stddev.precision = std::sqrt(agg.stddev.precision);
    agg.stddev.recall = std::sqrt(agg.stddev.recall);
    agg.stddev.f1 = std::sqrt(agg.stddev.f1);

    std::vector<std::size_t> order(seeds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (agg.macro_f1[a] != agg.macro_f1[b]) return agg.macro_f1[a] < agg.macro_f1[b];
        return seeds[a] < seeds[b];
    });
    const std::size_t mid = order[(order.size() - 1) / 2];
    agg.median_seed = seeds[mid];
    agg.median_report = reports[mid];
    agg.median_report.seeds = seeds;
    agg.median_report.median_seed = agg.median_seed;
    return agg;
}

json aggregate_to_json(const AggregateReport& r) {
    const auto macro = [](const MacroMetrics& m) {
        return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    return json{{"seeds", r.seeds},
                {"macro_f1", r.macro_f1},
                {"mean", macro(r.mean)},
                {"std", macro(r.stddev)},
                {"median_seed", r.median_seed},
                {"median_report", report_to_json(r.median_report)}};
}

}  // namespace aisoc
