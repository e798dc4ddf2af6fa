#include <doctest.h>
#include <httplib.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "aisoc/service.hpp"
#include "fixtures.hpp"

using namespace aisoc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("aisoc_test_" + name); }

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

template <typename E>
std::string thrown_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("artifact: save -> load -> save is byte identical and scores are exact") {
    const auto& run = fixture::small_run();
    const auto p1 = tmp("a1.bin"), p2 = tmp("a2.bin");
    const auto sum1 = save_artifact(run.artifact, p1);
    const auto loaded = load_artifact(p1);
    CHECK(loaded == run.artifact);
    const auto sum2 = save_artifact(loaded, p2);
    CHECK(sum1 == sum2);
    CHECK(read_bytes(p1) == read_bytes(p2));

    const Scorer before(run.artifact), after(loaded);
    for (const auto& item : run.data.test_items) {
        CHECK(before.log_score(*item.log_message) == after.log_score(*item.log_message));
        CHECK(before.malware_score(*item.malware_features) == after.malware_score(*item.malware_features));
    }
    CHECK(before.version() == after.version());
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("artifact: reference thresholds 0.10/0.42 survive verbatim") {
    auto a = fixture::small_run().artifact;
    a.fusion->t_m = 0.10;
    a.fusion->t_l = 0.42;
    const auto p = tmp("ref.bin");
    save_artifact(a, p);
    const auto b = load_artifact(p);
    CHECK(b.fusion->t_m == 0.10);
    CHECK(b.fusion->t_l == 0.42);
    fs::remove(p);
}

TEST_CASE("artifact: truncation and corruption are checksum errors") {
    const auto p = tmp("trunc.bin");
    save_artifact(fixture::small_run().artifact, p);
    auto bytes = read_bytes(p);
    auto cut = bytes;
    cut.resize(cut.size() / 2);
    write_bytes(p, cut);
    CHECK(thrown_message<ArtifactError>([&] { load_artifact(p); }).find("checksum") != std::string::npos);
    auto flipped = bytes;
    flipped[flipped.size() - 3] ^= 0x40;
    write_bytes(p, flipped);
    CHECK(thrown_message<ArtifactError>([&] { load_artifact(p); }).find("checksum") != std::string::npos);
    auto version = bytes;
    version[8] = 99;
    write_bytes(p, version);
    CHECK(thrown_message<ArtifactError>([&] { load_artifact(p); }).find("format_version") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("artifact: unknown payload format_version and missing components") {
    auto j = artifact_to_json(fixture::small_run().artifact);
    j["format_version"] = "9.9";
    CHECK(thrown_message<ArtifactError>([&] { artifact_from_json(j); }).find("format_version") != std::string::npos);

    auto k = artifact_to_json(fixture::small_run().artifact);
    k["components"].erase("forest");
    CHECK(thrown_message<ArtifactError>([&] { artifact_from_json(k); }).find("forest") != std::string::npos);

    auto partial = fixture::small_run().artifact;
    partial.log_calibrator.reset();
    CHECK(partial.status() == ArtifactStatus::Partial);
    CHECK(thrown_message<ArtifactError>([&] { save_artifact(partial, tmp("p.bin")); }).find("log_calibrator") !=
          std::string::npos);
    const auto p = tmp("partial.bin");
    save_artifact(partial, p, ArtifactStatus::Partial);
    const auto back = load_artifact(p);
    CHECK(back.status() == ArtifactStatus::Partial);
    CHECK_THROWS_AS(Scorer{back}, ArtifactError);
    CHECK_THROWS_AS(make_serving_scorer(back), ArtifactError);
    fs::remove(p);
}

TEST_CASE("scorer: modalities and label consistency") {
    const Scorer scorer(fixture::small_run().artifact);
    const auto& item = fixture::small_run().data.test_items.front();
    const auto both = scorer.score({item.entity_id, item.log_message, item.malware_features});
    REQUIRE(both.s_m.has_value());
    REQUIRE(both.s_l.has_value());
    CHECK(both.modality == Modality::Fused);
    CHECK(both.label == fuse(*both.s_m, *both.s_l, scorer.fusion()));

    const auto logs = scorer.score({std::nullopt, item.log_message, std::nullopt});
    CHECK(logs.modality == Modality::LogsOnly);
    CHECK_FALSE(logs.s_m.has_value());
    CHECK(logs.label != TriageLabel::HighConfidenceAttack);
    CHECK(logs.label == fuse(0.0, *logs.s_l, scorer.fusion()));

    CHECK_THROWS_AS(scorer.score({std::nullopt, std::nullopt, DenseVector{1.0}}), RequestError);
    CHECK_THROWS_AS(parse_score_request(json::object()), RequestError);
    CHECK_THROWS_AS(parse_score_request(json{{"log_message", 5}}), RequestError);
}

TEST_CASE("score_batch: empty, order-preserving, errors in place") {
    const Scorer scorer(fixture::small_run().artifact);
    {
        std::istringstream in;
        std::ostringstream out;
        score_batch(scorer, in, out);
        CHECK(out.str().empty());
    }
    std::ostringstream input;
    const auto& items = fixture::small_run().data.test_items;
    for (std::size_t i = 0; i < 5; ++i)
        input << json{{"entity_id", items[i].entity_id}, {"log_message", *items[i].log_message}}.dump() << '\n';
    input << "{broken\n";
    input << json{{"entity_id", "x"}, {"malware_features", json::array({1, 2})}}.dump() << '\n';
    std::istringstream in(input.str());
    std::ostringstream out;
    score_batch(scorer, in, out);
    std::istringstream lines(out.str());
    std::vector<json> rows;
    for (std::string line; std::getline(lines, line);) rows.push_back(json::parse(line));
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 0; i < 5; ++i) CHECK(rows[i]["entity_id"] == items[i].entity_id);
    CHECK(rows[5].contains("error"));
    CHECK(rows[6].contains("error"));
    CHECK(rows[6]["entity_id"] == "x");
}

TEST_CASE("http: score, health, model-info and 400s on an ephemeral port") {
    auto scorer = make_serving_scorer(fixture::small_run().artifact);
    ScoringServer server(scorer);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.run(); });
    httplib::Client cli("127.0.0.1", port);
    for (int i = 0; i < 100 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));

    const auto health = cli.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["status"] == "ok");
    CHECK(json::parse(health->body)["artifact_version"] == scorer->version());

    const auto info = cli.Get("/v1/model-info");
    REQUIRE(info);
    const auto ij = json::parse(info->body);
    CHECK(ij["thresholds"]["t_m"] == scorer->fusion().t_m);
    CHECK(ij.contains("calibrators"));

    const auto& item = fixture::small_run().data.test_items.front();
    const json req{{"log_message", *item.log_message}, {"malware_features", *item.malware_features}, {"entity_id", "e1"}};
    const auto res = cli.Post("/v1/score", req.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    const std::string line = score_line(*scorer, req.dump());
    CHECK(json::parse(line) == body);
    CHECK(body["label"] == std::string(to_string(fuse(body["s_m"].get<double>(), body["s_l"].get<double>(), scorer->fusion()))));

    const auto bad = cli.Post("/v1/score", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    const auto empty = cli.Post("/v1/score", "{}", "application/json");
    REQUIRE(empty);
    CHECK(empty->status == 400);
    CHECK(json::parse(empty->body).contains("error"));

    server.stop();
    t.join();
}
