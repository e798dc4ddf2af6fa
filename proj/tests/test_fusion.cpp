#include <doctest.h>

#include "aisoc/fusion.hpp"
#include "oracles.hpp"

using namespace aisoc;

namespace {

FusionConfig reference() {
    FusionConfig c;
    c.t_m = 0.10;
    c.t_l = 0.42;
    return c;
}

}  // namespace

TEST_CASE("fuse: reference thresholds 0.10/0.42") {
    CHECK(fuse(0.50, 0.50, reference()) == TriageLabel::HighConfidenceAttack);
    CHECK(fuse(0.00, 0.00, reference()) == TriageLabel::Normal);
    CHECK(fuse(0.10, 0.41, reference()) == TriageLabel::Suspicious);
    CHECK(fuse(0.09, 0.42, reference()) == TriageLabel::Suspicious);
    CHECK(fuse(0.10, 0.42, reference()) == TriageLabel::HighConfidenceAttack);
}

TEST_CASE("fuse: agrees with the predicate oracle on a grid") {
    for (const auto& [tm, tl] : std::vector<std::pair<double, double>>{{0.1, 0.42}, {0.5, 0.5}, {0.0, 1.0}}) {
        FusionConfig c;
        c.t_m = tm;
        c.t_l = tl;
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                const double sm = i / 100.0, sl = j / 100.0;
                CHECK(severity(fuse(sm, sl, c)) == oracle::triage(sm, sl, tm, tl));
            }
    }
}

TEST_CASE("truth triage mirrors fusion") {
    CHECK(derive_truth_triage(Label::Malicious, Label::Malicious) == TriageLabel::HighConfidenceAttack);
    CHECK(derive_truth_triage(Label::Benign, Label::Benign) == TriageLabel::Normal);
    CHECK(derive_truth_triage(Label::Malicious, Label::Benign) == TriageLabel::Suspicious);
    CHECK(derive_truth_triage(Label::Benign, Label::Malicious) == TriageLabel::Suspicious);
    CHECK_THROWS_AS(derive_truth_triage(std::optional<Label>{}, std::optional<Label>{Label::Benign}), ConfigError);
}

TEST_CASE("grid: 0.5 step has 3 values, 0.01 hits 0.42 exactly") {
    CHECK(threshold_grid(0.5) == std::vector<double>{0.0, 0.5, 1.0});
    const auto g = threshold_grid(0.01);
    REQUIRE(g.size() == 101);
    CHECK(g[42] == 0.42);
    CHECK(g[10] == 0.10);
    CHECK_THROWS_AS(threshold_grid(0.0), ConfigError);
}

TEST_CASE("tune: separable set picks the smallest corner of the separating rectangle") {
    std::vector<CalibratedScorePair> v;
    std::vector<TriageLabel> truth;
    for (const double sm : {0.2, 0.8})
        for (const double sl : {0.3, 0.7}) {
            v.push_back({sm, sl, "", std::nullopt});
            truth.push_back(static_cast<TriageLabel>((sm > 0.5) + (sl > 0.5)));
        }
    const auto r = tune_thresholds(v, truth, 0.5);
    CHECK(r.cells_evaluated == 9);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.config.t_m == 0.5);
    CHECK(r.config.t_l == 0.5);
    const auto fine = tune_thresholds(v, truth, 0.01);
    CHECK(fine.macro_f1 == 1.0);
    CHECK(fine.config.t_m == 0.21);  // first grid value above 0.2
    CHECK(fine.config.t_l == 0.31);
}

TEST_CASE("tune: optimum equals full-grid recomputation") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CalibratedScorePair> v;
        std::vector<TriageLabel> truth;
        std::vector<int> t;
        for (int i = 0; i < 60; ++i) {
            v.push_back({rng.uniform(), rng.uniform(), "", std::nullopt});
            truth.push_back(static_cast<TriageLabel>(rng.below(3)));
            t.push_back(severity(truth.back()));
        }
        const auto r = tune_thresholds(v, truth, 0.05);
        double best = -1.0;
        for (int a = 0; a <= 20; ++a)
            for (int b = 0; b <= 20; ++b) {
                std::vector<int> p;
                for (const auto& s : v) p.push_back(oracle::triage(s.s_m, s.s_l, a / 20.0, b / 20.0));
                best = std::max(best, oracle::macro_f1(t, p, 3));
            }
        CHECK(r.macro_f1 == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("tune: degenerate inputs") {
    std::vector<CalibratedScorePair> v{{0.1, 0.1, "", std::nullopt}, {0.2, 0.2, "", std::nullopt}};
    CHECK_THROWS_AS(tune_thresholds(v, {TriageLabel::Normal, TriageLabel::Normal}), TuningError);
    CHECK_THROWS_AS(tune_thresholds({}, {}), TuningError);
    CHECK_THROWS_AS(tune_thresholds(v, {TriageLabel::Normal}), TuningError);
}

TEST_CASE("fusion config JSON round trip") {
    auto c = reference();
    c.tuned_on = "validation";
    c.version = "v1";
    const auto back = fusion_config_from_json(fusion_config_to_json(c));
    CHECK(back == c);
    CHECK(back.t_l == 0.42);
    CHECK_THROWS_AS(fusion_config_from_json(nlohmann::json{{"t_m", 2.0}, {"t_l", 0.1}}), ConfigError);
}
