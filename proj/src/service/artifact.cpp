#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "aisoc/artifact.hpp"

namespace aisoc {

using nlohmann::json;

std::string_view to_string(ArtifactStatus s) { return s == ArtifactStatus::Serving ? "SERVING" : "PARTIAL"; }

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::Fused: return "fused";
        case Modality::LogsOnly: return "logs_only";
        case Modality::MalwareOnly: return "malware_only";
    }
    return "fused";
}

std::vector<std::string> ModelArtifact::missing_components() const {
    std::vector<std::string> missing;
    if (!vocabulary) missing.emplace_back("vocabulary");
    if (!standardizer) missing.emplace_back("standardizer");
    if (!logistic) missing.emplace_back("logistic");
    if (!forest) missing.emplace_back("forest");
    if (!log_calibrator) missing.emplace_back("log_calibrator");
    if (!malware_calibrator) missing.emplace_back("malware_calibrator");
    if (!fusion) missing.emplace_back("fusion");
    return missing;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
    return sha256_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

namespace {

// --- component codecs -----------------------------------------------------

json vocab_json(const Vocabulary& v) {
    json j{{"terms", v.terms()}, {"idf", v.idf()}, {"document_count", v.document_count()},
           {"min_df", v.config().min_df}};
    j["max_features"] = v.config().max_features ? json(*v.config().max_features) : json(nullptr);
    return j;
}

Vocabulary vocab_from(const json& j) {
    VocabularyConfig cfg;
    cfg.min_df = j.at("min_df").get<std::size_t>();
    if (j.at("max_features").is_null()) cfg.max_features.reset();
    else cfg.max_features = j.at("max_features").get<std::size_t>();
    return Vocabulary(j.at("terms").get<std::vector<std::string>>(), j.at("idf").get<std::vector<double>>(),
                      j.at("document_count").get<std::size_t>(), cfg);
}

json standardizer_json(const StandardizerParams& p) {
    return json{{"mean", p.mean}, {"stddev", p.stddev}, {"zero_variance", p.zero_variance}};
}

StandardizerParams standardizer_from(const json& j) {
    StandardizerParams p;
    p.mean = j.at("mean").get<std::vector<double>>();
    p.stddev = j.at("stddev").get<std::vector<double>>();
    p.zero_variance = j.at("zero_variance").get<std::vector<bool>>();
    if (p.stddev.size() != p.mean.size() || p.zero_variance.size() != p.mean.size())
        throw ArtifactError("standardizer vectors differ in length");
    return p;
}

json logistic_json(const LogisticModel& m) {
    return json{{"weights", m.weights},
                {"bias", m.bias},
                {"lambda", m.lambda},
                {"meta",
                 {{"iterations", m.meta.iterations},
                  {"initial_loss", m.meta.initial_loss},
                  {"final_loss", m.meta.final_loss},
                  {"seed", m.meta.seed}}}};
}

LogisticModel logistic_from(const json& j) {
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.lambda = j.at("lambda").get<double>();
    const auto& meta = j.at("meta");
    m.meta.iterations = meta.at("iterations").get<std::size_t>();
    m.meta.initial_loss = meta.at("initial_loss").get<double>();
    m.meta.final_loss = meta.at("final_loss").get<double>();
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    return m;
}

// Trees are stored column-wise to keep the payload compact.
json tree_json(const DecisionTree& t) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         neg = json::array(), pos = json::array();
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        neg.push_back(n.negatives);
        pos.push_back(n.positives);
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left},
                {"right", right},     {"negatives", neg},       {"positives", pos}};
}

DecisionTree tree_from(const json& j) {
    const auto feature = j.at("feature").get<std::vector<std::int32_t>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<std::int32_t>>();
    const auto right = j.at("right").get<std::vector<std::int32_t>>();
    const auto neg = j.at("negatives").get<std::vector<std::uint32_t>>();
    const auto pos = j.at("positives").get<std::vector<std::uint32_t>>();
    const std::size_t n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || neg.size() != n || pos.size() != n)
        throw ArtifactError("malformed tree in forest component");
    DecisionTree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = t.nodes[i];
        node.feature = feature[i];
        node.threshold = threshold[i];
        node.left = left[i];
        node.right = right[i];
        node.negatives = neg[i];
        node.positives = pos[i];
        if (!node.is_leaf()) {
            const auto in_range = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(n); };
            if (!in_range(node.left) || !in_range(node.right)) throw ArtifactError("malformed tree in forest component");
        }
    }
    return t;
}

json forest_json(const ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_json(t));
    return json{{"dimension", m.dimension},
                {"n_trees", m.n_trees},
                {"max_depth", m.max_depth},
                {"min_samples_leaf", m.min_samples_leaf},
                {"features_per_split", m.features_per_split},
                {"seed", m.seed},
                {"trees", trees}};
}

ForestModel forest_from(const json& j) {
    ForestModel m;
    m.dimension = j.at("dimension").get<std::size_t>();
    m.n_trees = j.at("n_trees").get<std::size_t>();
    m.max_depth = j.at("max_depth").get<std::size_t>();
    m.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
    m.features_per_split = j.at("features_per_split").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
    for (const auto& t : m.trees)
        for (const auto& n : t.nodes)
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= m.dimension)
                throw ArtifactError("forest split feature out of range");
    return m;
}

json calibrator_json(const Calibrator& c) {
    return json{{"method", to_string(c.method)},
                {"platt", {{"a", c.platt.a}, {"b", c.platt.b}}},
                {"isotonic", {{"knot_scores", c.isotonic.knot_scores}, {"knot_values", c.isotonic.knot_values}}},
                {"fit_meta",
                 {{"validation_size", c.fit_meta.validation_size},
                  {"positives", c.fit_meta.positives},
                  {"negatives", c.fit_meta.negatives},
                  {"inverted_scores", c.fit_meta.inverted_scores},
                  {"note", c.fit_meta.note}}}};
}

Calibrator calibrator_from(const json& j) {
    Calibrator c;
    const auto method = parse_calibration_method(j.at("method").get<std::string>());
    if (!method) throw ArtifactError("unknown calibration method tag");
    c.method = *method;
    c.platt.a = j.at("platt").at("a").get<double>();
    c.platt.b = j.at("platt").at("b").get<double>();
    c.isotonic.knot_scores = j.at("isotonic").at("knot_scores").get<std::vector<double>>();
    c.isotonic.knot_values = j.at("isotonic").at("knot_values").get<std::vector<double>>();
    if (c.isotonic.knot_scores.size() != c.isotonic.knot_values.size())
        throw ArtifactError("isotonic knots differ in length");
    const auto& meta = j.at("fit_meta");
    c.fit_meta.validation_size = meta.at("validation_size").get<std::size_t>();
    c.fit_meta.positives = meta.at("positives").get<std::size_t>();
    c.fit_meta.negatives = meta.at("negatives").get<std::size_t>();
    c.fit_meta.inverted_scores = meta.at("inverted_scores").get<bool>();
    c.fit_meta.note = meta.at("note").get<std::string>();
    return c;
}

template <typename T, typename F>
void decode_component(const json& components, const char* name, std::optional<T>& slot, F&& decode) {
    if (!components.contains(name)) return;
    try {
        slot = decode(components.at(name));
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("invalid component '") + name + "': " + e.what());
    } catch (const ArtifactError& e) {
        throw ArtifactError(std::string("invalid component '") + name + "': " + e.what());
    } catch (const Error& e) {
        throw ArtifactError(std::string("invalid component '") + name + "': " + e.what());
    }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint64_t get_le(const std::uint8_t* p, int n) {
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

constexpr std::size_t kHeaderSize = 8 + 4 + 8 + 32;

std::vector<std::uint8_t> hex_to_bytes(const std::string& hex) {
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
    return out;
}

}  // namespace

json artifact_to_json(const ModelArtifact& a) {
    json components = json::object();
    if (a.vocabulary) components["vocabulary"] = vocab_json(*a.vocabulary);
    if (a.standardizer) components["standardizer"] = standardizer_json(*a.standardizer);
    if (a.logistic) components["logistic"] = logistic_json(*a.logistic);
    if (a.forest) components["forest"] = forest_json(*a.forest);
    if (a.log_calibrator) components["log_calibrator"] = calibrator_json(*a.log_calibrator);
    if (a.malware_calibrator) components["malware_calibrator"] = calibrator_json(*a.malware_calibrator);
    if (a.fusion) components["fusion"] = fusion_config_to_json(*a.fusion);
    return json{{"format_version", a.format_version},
                {"created_at", a.created_at},
                {"version", a.version},
                {"status", to_string(a.status())},
                {"components", components},
                {"fingerprints", a.fingerprints}};
}

ModelArtifact artifact_from_json(const json& j) {
    ModelArtifact a;
    try {
        a.format_version = j.at("format_version").get<std::string>();
    } catch (const json::exception&) {
        throw ArtifactError("artifact payload lacks format_version");
    }
    if (a.format_version != kArtifactFormatVersion)
        throw ArtifactError("unknown format_version '" + a.format_version + "'");
    std::string status;
    try {
        a.created_at = j.at("created_at").get<std::int64_t>();
        a.version = j.at("version").get<std::string>();
        status = j.at("status").get<std::string>();
        a.fingerprints = j.at("fingerprints").get<std::map<std::string, std::string>>();
        (void)j.at("components");
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("invalid artifact header: ") + e.what());
    }
    const auto& c = j.at("components");
    decode_component(c, "vocabulary", a.vocabulary, vocab_from);
    decode_component(c, "standardizer", a.standardizer, standardizer_from);
    decode_component(c, "logistic", a.logistic, logistic_from);
    decode_component(c, "forest", a.forest, forest_from);
    decode_component(c, "log_calibrator", a.log_calibrator, calibrator_from);
    decode_component(c, "malware_calibrator", a.malware_calibrator, calibrator_from);
    decode_component(c, "fusion", a.fusion, fusion_config_from_json);
    if (status == "SERVING") {
        const auto missing = a.missing_components();
        if (!missing.empty()) throw ArtifactError("missing component '" + missing.front() + "'");
    } else if (status != "PARTIAL") {
        throw ArtifactError("unknown artifact status '" + status + "'");
    }
    return a;
}

std::vector<std::uint8_t> encode_artifact(const ModelArtifact& a) {
    const auto payload = json::to_cbor(artifact_to_json(a));
    std::vector<std::uint8_t> out(kArtifactMagic.begin(), kArtifactMagic.end());
    put_u32(out, kContainerVersion);
    put_u64(out, payload.size());
    const auto digest = hex_to_bytes(sha256_hex(payload));
    out.insert(out.end(), digest.begin(), digest.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

ModelArtifact decode_artifact(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kArtifactMagic.size() ||
        std::memcmp(bytes.data(), kArtifactMagic.data(), kArtifactMagic.size()) != 0)
        throw ArtifactError("not an artifact file (bad magic)");
    if (bytes.size() < kHeaderSize) throw ArtifactError("checksum mismatch: truncated header");
    const auto container = static_cast<std::uint32_t>(get_le(bytes.data() + 8, 4));
    if (container != kContainerVersion)
        throw ArtifactError("unknown format_version: container version " + std::to_string(container));
    const std::uint64_t length = get_le(bytes.data() + 12, 8);
    const std::vector<std::uint8_t> stored(bytes.begin() + 20, bytes.begin() + 52);
    const std::vector<std::uint8_t> payload(bytes.begin() + kHeaderSize, bytes.end());
    if (payload.size() != length || hex_to_bytes(sha256_hex(payload)) != stored)
        throw ArtifactError("checksum mismatch");
    json j;
    try {
        j = json::from_cbor(payload);
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("undecodable payload: ") + e.what());
    }
    return artifact_from_json(j);
}

std::string save_artifact(const ModelArtifact& a, const std::filesystem::path& path, ArtifactStatus required) {
    if (required == ArtifactStatus::Serving) {
        const auto missing = a.missing_components();
        if (!missing.empty()) throw ArtifactError("cannot save SERVING artifact: missing component '" + missing.front() + "'");
    }
    const auto bytes = encode_artifact(a);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ArtifactError("cannot write artifact: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ArtifactError("cannot write artifact: " + path.string());
    return sha256_hex(std::vector<std::uint8_t>(bytes.begin() + kHeaderSize, bytes.end()));
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot read artifact: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_artifact(bytes);
}

std::string artifact_version(const ModelArtifact& a) {
    if (!a.version.empty()) return a.version;
    return "sha256:" + sha256_hex(json::to_cbor(artifact_to_json(a))).substr(0, 16);
}

// ---------------------------------------------------------------------------

ScoreRequest parse_score_request(const json& j) {
    if (!j.is_object()) throw RequestError("request must be a JSON object");
    ScoreRequest r;
    if (j.contains("entity_id") && !j["entity_id"].is_null()) {
        if (!j["entity_id"].is_string()) throw RequestError("entity_id must be a string");
        r.entity_id = j["entity_id"].get<std::string>();
    }
    if (j.contains("log_message") && !j["log_message"].is_null()) {
        if (!j["log_message"].is_string()) throw RequestError("log_message must be a string");
        r.log_message = j["log_message"].get<std::string>();
    }
    if (j.contains("malware_features") && !j["malware_features"].is_null()) {
        const auto& f = j["malware_features"];
        if (!f.is_array()) throw RequestError("malware_features must be an array of numbers");
        DenseVector v;
        v.reserve(f.size());
        for (const auto& x : f) {
            if (!x.is_number()) throw RequestError("malware_features must be an array of numbers");
            const double d = x.get<double>();
            if (!std::isfinite(d)) throw RequestError("malware_features must be finite");
            v.push_back(d);
        }
        r.malware_features = std::move(v);
    }
    if (!r.log_message && !r.malware_features)
        throw RequestError("request needs log_message and/or malware_features");
    return r;
}

json score_response_to_json(const ScoreResponse& r) {
    json j{{"label", to_string(r.label)}, {"modality", to_string(r.modality)}, {"artifact_version", r.artifact_version}};
    if (r.entity_id) j["entity_id"] = *r.entity_id;
    if (r.s_m) j["s_m"] = *r.s_m;
    if (r.s_l) j["s_l"] = *r.s_l;
    return j;
}

Scorer::Scorer(ModelArtifact artifact) : artifact_(std::move(artifact)) {
    const auto missing = artifact_.missing_components();
    if (!missing.empty())
        throw ArtifactError("artifact is PARTIAL and cannot serve: missing component '" + missing.front() + "'");
    if (artifact_.logistic->weights.size() != artifact_.vocabulary->size())
        throw ArtifactError("logistic model and vocabulary disagree on dimension");
    if (artifact_.standardizer->dimension() != artifact_.forest->dimension)
        throw ArtifactError("forest and standardizer disagree on dimension");
    version_ = artifact_version(artifact_);
}

double Scorer::raw_log_score(std::string_view message) const {
    return score_logistic(*artifact_.logistic, transform_text(message, *artifact_.vocabulary));
}

double Scorer::log_score(std::string_view message) const { return artifact_.log_calibrator->apply(raw_log_score(message)); }

double Scorer::raw_malware_score(const DenseVector& features) const {
    return score_forest(*artifact_.forest, transform_dense(features, *artifact_.standardizer));
}

double Scorer::malware_score(const DenseVector& features) const {
    return artifact_.malware_calibrator->apply(raw_malware_score(features));
}

ScoreResponse Scorer::score(const ScoreRequest& req) const {
    ScoreResponse r;
    r.entity_id = req.entity_id;
    r.artifact_version = version_;
    if (req.malware_features) {
        if (req.malware_features->size() != malware_dimension())
            throw RequestError("malware_features must have " + std::to_string(malware_dimension()) + " values, got " +
                               std::to_string(req.malware_features->size()));
        r.s_m = malware_score(*req.malware_features);
    }
    if (req.log_message) r.s_l = log_score(*req.log_message);
    r.modality = r.s_m && r.s_l ? Modality::Fused : (r.s_l ? Modality::LogsOnly : Modality::MalwareOnly);
    r.label = fuse(r.s_m.value_or(0.0), r.s_l.value_or(0.0), fusion());
    return r;
}

json model_info(const Scorer& s) {
    const auto& a = s.artifact();
    return json{{"format_version", a.format_version},
                {"artifact_version", s.version()},
                {"created_at", a.created_at},
                {"thresholds", {{"t_m", s.fusion().t_m}, {"t_l", s.fusion().t_l}}},
                {"fusion", fusion_config_to_json(s.fusion())},
                {"calibrators",
                 {{"malware", to_string(a.malware_calibrator->method)}, {"logs", to_string(a.log_calibrator->method)}}},
                {"fingerprints", a.fingerprints}};
}

std::string score_line(const Scorer& scorer, std::string_view line) {
    json in;
    try {
        in = json::parse(line);
    } catch (const json::exception& e) {
        return json{{"error", std::string("malformed JSON: ") + e.what()}}.dump(-1, ' ', false, json::error_handler_t::replace);
    }
    try {
        return score_response_to_json(scorer.score(parse_score_request(in))).dump(-1, ' ', false, json::error_handler_t::replace);
    } catch (const Error& e) {
        json err{{"error", e.what()}};
        if (in.is_object() && in.contains("entity_id") && in["entity_id"].is_string()) err["entity_id"] = in["entity_id"];
        return err.dump(-1, ' ', false, json::error_handler_t::replace);
    }
}

void score_batch(const Scorer& scorer, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << score_line(scorer, line) << '\n';
    }
    if (in.bad()) throw LoadError("unreadable batch input");
}

}  // namespace aisoc
