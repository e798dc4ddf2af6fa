#include <doctest.h>

#include <set>
#include <sstream>

#include "aisoc/corpus.hpp"

using namespace aisoc;

namespace {

LogRecord rec(std::int64_t ts, std::string msg, Label label = Label::Benign) {
    return LogRecord{ts, "h1", Channel::Auth, std::move(msg), label, Origin::Generated};
}

bool is_shell_spawn(const LogRecord& r) {
    return r.channel == Channel::Process &&
           (r.message.find("/bin/sh") != std::string::npos || r.message.find("exe=/bin/bash") != std::string::npos || r.message.find("pty.spawn") != std::string::npos ||
            r.message.find("bash -i") != std::string::npos);
}

}  // namespace

TEST_CASE("generate: no attacks means all benign") {
    const auto logs = generate_corpus({.benign_hosts = 1, .attack_sessions = 0, .duration_s = 60, .seed = 7});
    REQUIRE_FALSE(logs.empty());
    for (const auto& r : logs) CHECK(r.label == Label::Benign);
}

TEST_CASE("generate: fixed seed is deterministic") {
    const ScenarioConfig cfg{.benign_hosts = 2, .attack_sessions = 3, .duration_s = 600, .seed = 7};
    CHECK(generate_corpus(cfg) == generate_corpus(cfg));
    auto other = cfg;
    other.seed = 8;
    CHECK(generate_corpus(cfg) != generate_corpus(other));
}

TEST_CASE("generate: one maximal malicious run per session, each with a shell spawn") {
    const auto logs = generate_corpus({.benign_hosts = 2, .attack_sessions = 3, .duration_s = 600, .seed = 7});
    std::vector<std::vector<LogRecord>> runs;
    bool in_run = false;
    for (const auto& r : logs) {
        const bool mal = r.label == Label::Malicious;
        if (mal && !in_run) runs.emplace_back();
        if (mal) runs.back().push_back(r);
        in_run = mal;
    }
    REQUIRE(runs.size() == 3);
    for (const auto& run : runs) CHECK(std::any_of(run.begin(), run.end(), is_shell_spawn));
    for (std::size_t i = 1; i < logs.size(); ++i) CHECK(logs[i - 1].timestamp <= logs[i].timestamp);
}

TEST_CASE("generate: invalid scenarios") {
    CHECK_THROWS_AS(generate_corpus({.benign_hosts = 0}), ConfigError);
    CHECK_THROWS_AS(generate_corpus({.duration_s = 0}), ConfigError);
    CHECK_THROWS_AS(generate_corpus({.attack_sessions = -1}), ConfigError);
}

TEST_CASE("generate: malware table shape and determinism") {
    const auto a = generate_malware({.samples = 100, .malicious_fraction = 0.3, .seed = 3});
    REQUIRE(a.size() == 100);
    std::size_t mal = 0;
    for (const auto& s : a) {
        CHECK(s.features.size() == malware_feature_names().size());
        mal += s.label == Label::Malicious;
    }
    CHECK(mal == 30);
    CHECK(a == generate_malware({.samples = 100, .malicious_fraction = 0.3, .seed = 3}));
}

TEST_CASE("dedup: exact duplicates at threshold 1.0") {
    const auto out = dedup_near_identical({rec(0, "same message here"), rec(1, "same message here")}, 1.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].timestamp == 0);
}

TEST_CASE("dedup: Jaccard 3/5 keeps both") {
    const auto a = dedup_tokens("Accepted password for root");
    const auto b = dedup_tokens("Accepted password for admin");
    CHECK(jaccard(a, b) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(dedup_near_identical({rec(0, "Accepted password for root"), rec(1, "Accepted password for admin")}, 0.9).size() == 2);
}

TEST_CASE("dedup: empty input and label awareness") {
    CHECK(dedup_near_identical({}, 0.9).empty());
    const auto out = dedup_near_identical({rec(0, "x y z"), rec(1, "x y z", Label::Malicious)}, 0.9);
    CHECK(out.size() == 2);
}

TEST_CASE("split: time ordered 10 records -> 6/2/2 with increasing ranges") {
    std::vector<LogRecord> logs;
    for (int i = 0; i < 10; ++i) logs.push_back(rec(100 + i * 10, "m" + std::to_string(i)));
    const auto s = split(logs, SplitSpec{.kind = SplitKind::TimeOrdered});
    REQUIRE(s.train.size() == 6);
    REQUIRE(s.validation.size() == 2);
    REQUIRE(s.test.size() == 2);
    CHECK(s.train.back().timestamp < s.validation.front().timestamp);
    CHECK(s.validation.back().timestamp < s.test.front().timestamp);
}

TEST_CASE("split: time ordered ties never straddle a boundary") {
    std::vector<LogRecord> logs;
    // the cut at index 5 lands inside the timestamp-9 group, which moves whole to test
    for (int i = 0; i < 10; ++i) logs.push_back(rec(i < 3 ? 5 : 9, "m" + std::to_string(i)));
    const auto s = split(logs, SplitSpec{.kind = SplitKind::TimeOrdered, .train = 0.5, .validation = 0.0, .test = 0.5});
    CHECK(s.train.size() == 3);
    CHECK(s.test.size() == 7);
    CHECK(s.train.back().timestamp < s.test.front().timestamp);
}

TEST_CASE("split: stratified k-fold 100 balanced records") {
    std::vector<int> strata(100);
    for (int i = 0; i < 100; ++i) strata[i] = i % 2;
    const auto a = split_indices(strata, nullptr, SplitSpec{.kind = SplitKind::KFold, .folds = 5, .seed = 11});
    REQUIRE(a.folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& fold : a.folds) {
        int mal = 0;
        for (const auto i : fold) {
            mal += strata[i];
            seen.insert(i);
        }
        CHECK(fold.size() == 20);
        CHECK(mal == 10);
    }
    CHECK(seen.size() == 100);
    const auto b = split_indices(strata, nullptr, SplitSpec{.kind = SplitKind::KFold, .folds = 5, .seed = 11});
    CHECK(a.folds == b.folds);
}

TEST_CASE("split: invalid fractions and too few records") {
    std::vector<int> strata(3, 0);
    CHECK_THROWS_AS(split_indices(strata, nullptr, SplitSpec{.kind = SplitKind::StratifiedRandom, .train = 0.7}), SplitError);
    CHECK_THROWS_AS(split_indices(strata, nullptr, SplitSpec{.kind = SplitKind::KFold, .folds = 5}), SplitError);
}

TEST_CASE("augment: rate 0 is the identity") {
    std::vector<LogRecord> logs{rec(0, "bash -i reverse shell", Label::Malicious), rec(1, "Accepted password for root")};
    AugmentConfig cfg{.ops = {AugmentOp::CharNoise, AugmentOp::KeywordObfuscation}, .rate = 0.0, .seed = 4};
    CHECK(augment(logs, cfg) == logs);
}

TEST_CASE("augment: char noise stays within the edit budget") {
    const std::string msg = "Failed password for invalid user admin12";  // 40 characters
    REQUIRE(msg.size() == 40);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        AugmentConfig cfg{.ops = {AugmentOp::CharNoise}, .rate = 1.0, .char_noise_rate = 0.15, .replace = true, .seed = seed};
        const auto out = augment({rec(0, msg)}, cfg);
        REQUIRE(out.size() == 1);
        CHECK(out[0].origin == Origin::Augmented);
        CHECK(levenshtein(decode_utf8(msg), decode_utf8(out[0].message)) <= 6);
        CHECK(levenshtein(decode_utf8(msg), decode_utf8(out[0].message)) >= 1);
    }
}

TEST_CASE("augment: keyword obfuscation keeps the label") {
    AugmentConfig cfg{.ops = {AugmentOp::KeywordObfuscation}, .rate = 1.0, .seed = 1};
    const auto out = augment({rec(0, "bash -i reverse shell", Label::Malicious)}, cfg);
    REQUIRE(out.size() == 2);  // original kept, variant appended
    CHECK(out[1].message != "bash -i reverse shell");
    CHECK(out[1].label == Label::Malicious);
    CHECK(out[1].origin == Origin::Augmented);
}

TEST_CASE("augment: empty op set is rejected") {
    CHECK_THROWS_AS(augment({rec(0, "x")}, AugmentConfig{}), ConfigError);
}

TEST_CASE("io: NDJSON schema echo") {
    std::istringstream in(
        R"({"timestamp":0,"host":"h1","channel":"AUTH","message":"Failed password","label":"MALICIOUS"})"
        "\n");
    const auto res = parse_log_ndjson(in);
    REQUIRE(res.records.size() == 1);
    CHECK(res.skipped == 0);
    const auto& r = res.records[0];
    CHECK(r.timestamp == 0);
    CHECK(r.host == "h1");
    CHECK(r.channel == Channel::Auth);
    CHECK(r.message == "Failed password");
    CHECK(r.label == Label::Malicious);
    CHECK(r.origin == Origin::Loaded);
}

TEST_CASE("io: malformed NDJSON lines are counted, not fatal") {
    std::istringstream in(
        "{\"timestamp\":1,\"host\":\"h\",\"channel\":\"AUTH\",\"message\":\"ok\"}\n"
        "not json\n"
        "{\"timestamp\":-5,\"host\":\"h\",\"channel\":\"AUTH\",\"message\":\"neg\"}\n"
        "{\"timestamp\":2,\"host\":\"h\",\"channel\":\"NOPE\",\"message\":\"bad channel\"}\n");
    const auto res = parse_log_ndjson(in);
    CHECK(res.records.size() == 1);
    CHECK(res.skipped == 3);
    REQUIRE(res.issues.size() == 3);
    CHECK(res.issues[0].line == 2);
}

TEST_CASE("io: NDJSON round trip") {
    const auto logs = generate_corpus({.benign_hosts = 1, .attack_sessions = 1, .duration_s = 120, .seed = 2});
    std::stringstream buf;
    write_log_ndjson(buf, logs);
    auto back = parse_log_ndjson(buf).records;
    REQUIRE(back.size() == logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
        CHECK(back[i].message == logs[i].message);
        CHECK(back[i].timestamp == logs[i].timestamp);
        CHECK(back[i].label == logs[i].label);
    }
}

TEST_CASE("io: CSV with 3 features and 2 rows") {
    std::istringstream in("a,b,c,label\n1,2,3,MALICIOUS\n4.5,5,6,BENIGN\n");
    const auto res = parse_malware_csv(in, "label");
    REQUIRE(res.samples.size() == 2);
    CHECK(res.samples[0].features.size() == 3);
    CHECK(res.samples[1].features == std::vector<double>{4.5, 5, 6});
    CHECK(res.feature_names == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("io: CSV NaN row rejected") {
    std::istringstream in("a,b,c,label\n1,NaN,3,MALICIOUS\n4,5,6,BENIGN\n");
    const auto res = parse_malware_csv(in, "label");
    CHECK(res.samples.size() == 1);
    CHECK(res.rejected == 1);
}

TEST_CASE("io: CSV missing label column") {
    std::istringstream in("a,b\n1,2\n");
    CHECK_THROWS_AS(parse_malware_csv(in, "label"), LoadError);
}
