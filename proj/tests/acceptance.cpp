// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <thread>

#include "aisoc/pipeline.hpp"
#include "aisoc/service.hpp"
#include "oracles.hpp"

using namespace aisoc;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void guarded(int id, const char* title, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, title, ok, detail);
    } catch (const std::exception& e) {
        report(id, title, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const PipelineResult& default_run() {
    static const PipelineResult r = [] {
        PipelineConfig c;
        c.apply_seed(7);
        return run_pipeline(c);
    }();
    return r;
}

// Items with both modalities whose calibrated scores sit inside the region
// their triage class demands: s_m >= t_m iff malware is malicious, s_l >= t_l
// iff the log line is malicious.
struct Constructed {
    std::vector<EvalItem> items;
    std::vector<CalibratedScorePair> pairs;
};

Constructed separable(std::size_t normal, std::size_t suspicious, std::size_t high, double t_m, double t_l,
                      std::uint64_t seed) {
    Rng rng(seed);
    Constructed c;
    const auto below = [&](double t) { return rng.uniform() * t * 0.999; };
    const auto above = [&](double t) { return t + rng.uniform() * (1.0 - t); };
    const auto add = [&](Label m, Label l) {
        EvalItem it;
        it.entity_id = fmt("c-%05zu", c.items.size());
        it.log_message = "constructed";
        it.malware_features = DenseVector{0.0};
        it.malware_label = m;
        it.log_label = l;
        const double sm = m == Label::Malicious ? above(t_m) : below(t_m);
        const double sl = l == Label::Malicious ? above(t_l) : below(t_l);
        c.items.push_back(it);
        c.pairs.push_back({sm, sl, it.entity_id, std::nullopt});
    };
    for (std::size_t i = 0; i < normal; ++i) add(Label::Benign, Label::Benign);
    for (std::size_t i = 0; i < suspicious; ++i)
        add(i % 2 == 0 ? Label::Malicious : Label::Benign, i % 2 == 0 ? Label::Benign : Label::Malicious);
    for (std::size_t i = 0; i < high; ++i) add(Label::Malicious, Label::Malicious);
    return c;
}

void criterion1() {
    guarded(1, "fusion rule vs predicate oracle", [] {
        const std::vector<std::pair<double, double>> pairs{{0.10, 0.42}, {0.5, 0.5}, {0.0, 0.0}, {1.0, 1.0}, {0.37, 0.83}};
        const auto t0 = Clock::now();
        std::size_t agree = 0, total = 0;
        for (const auto& [tm, tl] : pairs) {
            FusionConfig c;
            c.t_m = tm;
            c.t_l = tl;
            for (int i = 0; i <= 100; ++i)
                for (int j = 0; j <= 100; ++j) {
                    const double sm = i / 100.0, sl = j / 100.0;
                    agree += severity(fuse(sm, sl, c)) == oracle::triage(sm, sl, tm, tl);
                    ++total;
                }
        }
        const double dt = seconds_since(t0);
        return std::make_pair(agree == total && dt < 1.0,
                              fmt("%zu/%zu agree, %.4f s (limit 1 s)", agree, total, dt));
    });
}

void criterion2() {
    guarded(2, "reference thresholds 0.10/0.42 on separable 14/76/62 set", [] {
        FusionConfig ref;
        ref.t_m = 0.10;
        ref.t_l = 0.42;
        const auto c = separable(14, 76, 62, ref.t_m, ref.t_l, 2);
        const auto r = evaluate_fused(c.pairs, c.items, ref, "test");
        const bool ok = r.macro.f1 == 1.0 && r.classes[0].support == 14 && r.classes[1].support == 76 &&
                        r.classes[2].support == 62;
        return std::make_pair(ok, fmt("macro-F1 = %.17g, supports %llu/%llu/%llu", r.macro.f1,
                                      static_cast<unsigned long long>(r.classes[0].support),
                                      static_cast<unsigned long long>(r.classes[1].support),
                                      static_cast<unsigned long long>(r.classes[2].support)));
    });
}

void criterion3() {
    guarded(3, "log model 5-fold CV on generated+augmented corpus", [] {
        const PipelineConfig pc = [] {
            PipelineConfig c;
            c.apply_seed(7);
            return c;
        }();
        const auto t0 = Clock::now();
        const auto corpus = dedup_near_identical(generate_corpus(pc.scenario), pc.dedup_threshold);
        AugmentConfig aug = pc.augmentation;
        aug.ops = {AugmentOp::KeywordObfuscation, AugmentOp::CharNoise, AugmentOp::SynonymReplacement};
        const auto records = augment(corpus, aug);
        const auto cv = log_cross_validation(records, 5, pc.seed, pc.vocabulary, pc.logistic);
        const double dt = seconds_since(t0);
        std::string folds;
        for (const double f : cv.fold_macro_f1) folds += fmt("%.3f ", f);
        return std::make_pair(cv.pooled_macro_f1 >= 0.85 && dt < 60.0,
                              fmt("pooled macro-F1 = %.4f (>= 0.85, target 0.91), folds [ %s], %zu records, %.2f s",
                                  cv.pooled_macro_f1, folds.c_str(), records.size(), dt));
    });
}

void criterion4() {
    guarded(4, "fusion dominance over single modalities", [] {
        // Complementary errors: each detector is blind to the attacks that only
        // the other modality shows.
        const auto validation = separable(40, 120, 80, 0.3, 0.6, 41);
        const auto tuned = tune_thresholds(validation.pairs, truth_triage(validation.items), 0.01).config;
        const auto test = separable(40, 120, 80, 0.3, 0.6, 42);
        const auto l = evaluate_logs_only(test.pairs, test.items, tuned, "test");
        const auto m = evaluate_malware_only(test.pairs, test.items, tuned, "test");
        const auto f = evaluate_fused(test.pairs, test.items, tuned, "test");
        const bool synth = f.macro.f1 >= std::max(l.macro.f1, m.macro.f1);

        const auto& b = default_run().reports;
        const bool pipe = b.fused.macro.f1 >= std::max(b.logs_only.macro.f1, b.malware_only.macro.f1);
        return std::make_pair(synth && pipe,
                              fmt("synthetic fused %.4f vs logs %.4f / malware %.4f; pipeline fused %.4f vs logs %.4f / "
                                  "malware %.4f",
                                  f.macro.f1, l.macro.f1, m.macro.f1, b.fused.macro.f1, b.logs_only.macro.f1,
                                  b.malware_only.macro.f1));
    });
}

bool monotone_bounded(const Calibrator& c) {
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double p = c.apply(i / 1000.0);
        if (!(p >= 0.0 && p <= 1.0 && p >= prev)) return false;
        prev = p;
    }
    return true;
}

void criterion5() {
    guarded(5, "isotonic oracle agreement and calibrator sweeps", [] {
        Rng rng(505);
        std::size_t trials = 0, exact = 0, swept = 0, sweep_ok = 0;
        double worst = 0.0;
        while (trials < 1000) {
            const std::size_t n = 2 + rng.below(11);
            std::vector<double> s(n);
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = static_cast<double>(rng.below(16)) / 16.0;
                y[i] = static_cast<int>(rng.below(2));
            }
            if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) continue;
            ++trials;
            std::vector<double> xs = s;
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            std::vector<double> mean(xs.size(), 0.0), w(xs.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), s[i]) - xs.begin());
                mean[k] += y[i];
                w[k] += 1.0;
            }
            for (std::size_t k = 0; k < xs.size(); ++k) mean[k] /= w[k];
            const auto expect = oracle::monotone_fit(mean, w);
            const auto iso = fit_isotonic(s, y);
            bool same = iso.isotonic.knot_scores == xs;
            for (std::size_t k = 0; same && k < xs.size(); ++k) {
                const double d = std::abs(iso.isotonic.knot_values[k] - expect[k]);
                worst = std::max(worst, d);
                same = d <= 1e-9;
            }
            exact += same;
            for (const auto& c : {iso, fit_calibrator(s, y, CalibrationRequest::Platt),
                                  fit_calibrator(s, y, CalibrationRequest::Auto)}) {
                ++swept;
                sweep_ok += monotone_bounded(c);
            }
        }
        const auto& a = default_run().artifact;
        for (const auto* c : {&*a.log_calibrator, &*a.malware_calibrator}) {
            ++swept;
            sweep_ok += monotone_bounded(*c);
        }
        return std::make_pair(exact == trials && sweep_ok == swept,
                              fmt("%zu/%zu trials match (max |diff| %.3g); %zu/%zu calibrators monotone and in [0,1]",
                                  exact, trials, worst, sweep_ok, swept));
    });
}

void criterion6() {
    guarded(6, "logistic gradient vs central differences", [] {
        Rng rng(606);
        double worst = 0.0;
        for (int inst = 0; inst < 20; ++inst) {
            const std::size_t d = 3 + rng.below(8), n = 5 + rng.below(20);
            std::vector<SparseVector> X(n);
            std::vector<int> y(n);
            std::vector<double> sw(n);
            for (std::size_t i = 0; i < n; ++i) {
                X[i].dimension = d;
                for (std::size_t j = 0; j < d; ++j)
                    if (rng.uniform() < 0.6) {
                        X[i].indices.push_back(j);
                        X[i].values.push_back(rng.uniform() * 2.0 - 1.0 + (rng.uniform() < 0.5 ? 0.05 : -0.05));
                    }
                y[i] = static_cast<int>(rng.below(2));
                sw[i] = 0.5 + rng.uniform();
            }
            std::vector<double> theta(d + 1);
            for (auto& t : theta) t = rng.uniform() * 2.0 - 1.0;
            const double lambda = inst % 2 == 0 ? 1e-3 : 0.1 * rng.uniform();
            const auto loss = [&](const std::vector<double>& th) {
                const std::vector<double> w(th.begin(), th.end() - 1);
                return logistic_objective(X, y, sw, w, th.back(), lambda).loss;
            };
            const std::vector<double> w(theta.begin(), theta.end() - 1);
            const auto obj = logistic_objective(X, y, sw, w, theta.back(), lambda);
            double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
            for (std::size_t k = 0; k <= d; ++k) {
                const double analytic = k < d ? obj.grad_w[k] : obj.grad_b;
                const double numeric = oracle::central_diff(loss, theta, k, 1e-6);
                diff2 += (analytic - numeric) * (analytic - numeric);
                a2 += analytic * analytic;
                n2 += numeric * numeric;
            }
            const double rel = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
            worst = std::max(worst, rel);
        }
        return std::make_pair(worst < 1e-5, fmt("max relative error %.3g over 20 instances (limit 1e-5)", worst));
    });
}

void criterion7() {
    guarded(7, "ROC AUC vs pairwise counting", [] {
        Rng rng(707);
        double worst = 0.0;
        for (int inst = 0; inst < 500; ++inst) {
            const std::size_t n = 2 + rng.below(49);
            std::vector<double> s(n);
            std::vector<int> y(n);
            const bool coarse = inst % 2 == 0;  // half the instances carry many ties
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = coarse ? static_cast<double>(rng.below(6)) / 5.0 : rng.uniform();
                y[i] = static_cast<int>(rng.below(2));
            }
            if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
            if (std::count(y.begin(), y.end(), 0) == 0) y[n - 1] = 0;
            worst = std::max(worst, std::abs(roc_auc(s, y) - oracle::pairwise_auc(s, y)));
        }
        return std::make_pair(worst <= 1e-12, fmt("max |diff| %.3g over 500 instances (limit 1e-12)", worst));
    });
}

void criterion8() {
    guarded(8, "threshold tuning attains the grid maximum", [] {
        Rng rng(808);
        const double step = 0.025;  // 41 grid values per axis
        std::size_t ok = 0;
        const std::size_t instances = 12;
        for (std::size_t inst = 0; inst < instances; ++inst) {
            std::vector<CalibratedScorePair> v;
            std::vector<TriageLabel> truth;
            std::vector<int> t;
            for (int i = 0; i < 200; ++i) {
                const int cls = static_cast<int>(rng.below(3));
                // scores loosely follow the class so the optimum is interior
                const double sm = std::clamp(0.3 * cls + 0.35 * rng.uniform() + (inst % 3) * 0.05, 0.0, 1.0);
                const double sl = std::clamp(0.25 * cls + 0.5 * rng.uniform(), 0.0, 1.0);
                v.push_back({sm, sl, "", std::nullopt});
                truth.push_back(static_cast<TriageLabel>(cls));
                t.push_back(cls);
            }
            const auto r = tune_thresholds(v, truth, step);
            double best = -1.0;
            for (int a = 0; a <= 40; ++a)
                for (int b = 0; b <= 40; ++b) {
                    std::vector<int> p;
                    for (const auto& s : v) p.push_back(oracle::triage(s.s_m, s.s_l, a / 40.0, b / 40.0));
                    best = std::max(best, oracle::macro_f1(t, p, 3));
                }
            std::vector<int> p;
            for (const auto& s : v) p.push_back(oracle::triage(s.s_m, s.s_l, r.config.t_m, r.config.t_l));
            const double attained = oracle::macro_f1(t, p, 3);
            ok += r.cells_evaluated == 41 * 41 && std::abs(attained - best) <= 1e-12 &&
                  std::abs(r.macro_f1 - best) <= 1e-12;
        }
        return std::make_pair(ok == instances, fmt("%zu/%zu instances optimal (41x41 cells, 200 points)", ok, instances));
    });
}

void criterion9() {
    guarded(9, "robustness probe direction", [] {
        const auto& run = default_run();
        const Scorer scorer(run.artifact);
        AugmentConfig cfg{.ops = {AugmentOp::CharNoise, AugmentOp::KeywordObfuscation}, .rate = 0.5, .seed = 909};
        const auto p = robustness_probe(run.data.test_items, cfg, scorer);
        const bool ok = p.fused_macro_f1_after >= p.log_macro_f1_after && p.high_to_normal == 0;
        return std::make_pair(
            ok, fmt("fused %.4f >= logs %.4f after mutation (%zu/%zu mutated; log delta %+.4f, fused delta %+.4f); "
                    "HIGH with malware evidence %zu: ->SUSPICIOUS %zu, ->NORMAL %zu",
                    p.fused_macro_f1_after, p.log_macro_f1_after, p.mutated, p.items, p.log_delta(), p.fused_delta(),
                    p.high_with_malware_evidence, p.high_to_suspicious, p.high_to_normal));
    });
}

void criterion10() {
    guarded(10, "pipeline reproducibility", [] {
        PipelineConfig c;
        c.apply_seed(7);
        const auto& a = default_run();
        const auto b = run_pipeline(c);
        const bool art = encode_artifact(a.artifact) == encode_artifact(b.artifact);
        const auto dump = [](const BaselineReports& r) {
            return report_to_json(r.logs_only).dump() + report_to_json(r.malware_only).dump() +
                   report_to_json(r.fused).dump();
        };
        const bool rep = dump(a.reports) == dump(b.reports);
        return std::make_pair(art && rep, fmt("artifact bytes %s (%zu bytes, %s), reports %s",
                                              art ? "identical" : "differ", encode_artifact(a.artifact).size(),
                                              artifact_version(a.artifact).c_str(), rep ? "identical" : "differ"));
    });
}

void criterion11() {
    guarded(11, "HTTP vs batch scoring and save/load exactness", [] {
        const auto& run = default_run();
        const auto& items = run.data.test_items;
        std::vector<std::string> requests;
        for (std::size_t i = 0; i < 1000; ++i) {
            const auto& it = items[i % items.size()];
            json r{{"entity_id", fmt("req-%04zu", i)}};
            switch (i % 3) {
                case 0: r["log_message"] = *it.log_message; r["malware_features"] = *it.malware_features; break;
                case 1: r["log_message"] = *it.log_message; break;
                default: r["malware_features"] = *it.malware_features; break;
            }
            requests.push_back(r.dump());
        }

        const auto path = std::filesystem::temp_directory_path() / "aisoc_acceptance_artifact.bin";
        save_artifact(run.artifact, path);
        auto scorer = make_serving_scorer(load_artifact(path));
        std::filesystem::remove(path);
        const Scorer original(run.artifact);

        std::ostringstream batch_out;
        {
            std::string joined;
            for (const auto& r : requests) joined += r + "\n";
            std::istringstream in(joined);
            score_batch(*scorer, in, batch_out);
        }
        std::vector<std::string> batch;
        {
            std::istringstream lines(batch_out.str());
            for (std::string l; std::getline(lines, l);) batch.push_back(l);
        }

        ScoringServer server(scorer);
        const int port = server.bind("127.0.0.1", 0);
        std::thread t([&] { server.run(); });
        for (int i = 0; i < 200 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
        httplib::Client cli("127.0.0.1", port);
        cli.set_keep_alive(true);
        cli.set_tcp_nodelay(true);
        std::size_t agree = 0, exact = 0;
        for (std::size_t i = 0; i < requests.size(); ++i) {
            const auto res = cli.Post("/v1/score", requests[i], "application/json");
            if (res && res->status == 200 && i < batch.size() && json::parse(res->body) == json::parse(batch[i]))
                ++agree;
            const auto before = original.score(parse_score_request(json::parse(requests[i])));
            const auto after = scorer->score(parse_score_request(json::parse(requests[i])));
            exact += before.s_m == after.s_m && before.s_l == after.s_l && before.label == after.label;
        }
        server.stop();
        t.join();
        const bool ok = batch.size() == requests.size() && agree == requests.size() && exact == requests.size();
        return std::make_pair(ok, fmt("%zu/%zu HTTP responses equal batch lines; %zu/%zu scores bit-exact after "
                                      "save/load",
                                      agree, requests.size(), exact, requests.size()));
    });
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    std::printf("%d of 11 criteria failed (%.2f s)\n", failures, seconds_since(t0));
    return failures;
}
