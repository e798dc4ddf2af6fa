#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "aisoc/eval.hpp"

namespace aisoc {

using nlohmann::json;

std::uint64_t Confusion::support(std::size_t c) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < k_; ++p) s += at(c, p);
    return s;
}

std::uint64_t Confusion::predicted(std::size_t c) const {
    std::uint64_t s = 0;
    for (std::size_t t = 0; t < k_; ++t) s += at(t, c);
    return s;
}

double Confusion::precision(std::size_t c) const {
    const auto d = predicted(c);
    return d == 0 ? 0.0 : static_cast<double>(at(c, c)) / static_cast<double>(d);
}

double Confusion::recall(std::size_t c) const {
    const auto d = support(c);
    return d == 0 ? 0.0 : static_cast<double>(at(c, c)) / static_cast<double>(d);
}

double Confusion::f1(std::size_t c) const {
    const double p = precision(c), r = recall(c);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double Confusion::macro_f1() const {
    double s = 0.0;
    for (std::size_t c = 0; c < k_; ++c) s += f1(c);
    return s / static_cast<double>(k_);
}

EvalReport classification_report(const std::vector<int>& predictions, const std::vector<int>& truth,
                                  const std::vector<std::string>& class_names) {
    if (predictions.size() != truth.size()) throw MetricError("predictions and truth differ in length");
    if (class_names.empty()) throw MetricError("class set is empty");
    const int k = static_cast<int>(class_names.size());
    Confusion cm(class_names.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= k || predictions[i] < 0 || predictions[i] >= k)
            throw MetricError("label outside the class set");
        cm.add(truth[i], predictions[i]);
    }
    EvalReport r;
    r.confusion.assign(class_names.size(), std::vector<std::uint64_t>(class_names.size(), 0));
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        ClassMetrics m;
        m.name = class_names[c];
        m.precision = cm.precision(c);
        m.recall = cm.recall(c);
        m.f1 = cm.f1(c);
        m.support = cm.support(c);
        if (cm.predicted(c) == 0 || cm.support(c) == 0) r.zero_division.push_back(m.name);
        r.macro.precision += m.precision;
        r.macro.recall += m.recall;
        r.macro.f1 += m.f1;
        r.classes.push_back(m);
        for (std::size_t p = 0; p < class_names.size(); ++p) r.confusion[c][p] = cm.at(c, p);
    }
    const double kd = static_cast<double>(k);
    r.macro.precision /= kd;
    r.macro.recall /= kd;
    r.macro.f1 /= kd;
    return r;
}

namespace {

void check_binary(const std::vector<double>& scores, const std::vector<int>& truth, std::size_t& pos, std::size_t& neg) {
    if (scores.size() != truth.size()) throw MetricError("scores and truth differ in length");
    pos = neg = 0;
    for (const int y : truth) {
        if (y == 1) ++pos;
        else if (y == 0) ++neg;
        else throw MetricError("binary truth must be 0 or 1");
    }
    if (pos == 0 || neg == 0) throw MetricError("metric undefined: truth contains a single class");
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& truth) {
    std::size_t pos = 0, neg = 0;
    check_binary(scores, truth, pos, neg);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Doubled midranks keep every quantity integral.
    std::uint64_t pos_rank2 = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::uint64_t midrank2 = (i + 1) + j;  // 2 * average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (truth[order[t]] == 1) pos_rank2 += midrank2;
        i = j;
    }
    const std::uint64_t u2 = pos_rank2 - static_cast<std::uint64_t>(pos) * (pos + 1);
    return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& truth) {
    std::size_t pos = 0, neg = 0;
    check_binary(scores, truth, pos, neg);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0, prev_recall = 0.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (truth[order[j]] == 1 ? tp : fp) += 1;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

json report_to_json(const EvalReport& r) {
    json classes = json::array();
    for (const auto& c : r.classes)
        classes.push_back({{"name", c.name}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                           {"support", c.support}});
    json j{{"setting", r.setting},
           {"split", r.split},
           {"classes", classes},
           {"macro", {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f1", r.macro.f1}}},
           {"confusion", r.confusion},
           {"zero_division", r.zero_division},
           {"seeds", r.seeds},
           {"fingerprints", r.fingerprints}};
    j["auc"] = r.auc ? json{{"roc", r.auc->roc}, {"pr", r.auc->pr}} : json(nullptr);
    j["median_seed"] = r.median_seed ? json(*r.median_seed) : json(nullptr);
    return j;
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    try {
        r.setting = j.at("setting").get<std::string>();
        r.split = j.at("split").get<std::string>();
        for (const auto& c : j.at("classes"))
            r.classes.push_back({c.at("name").get<std::string>(), c.at("precision").get<double>(),
                                 c.at("recall").get<double>(), c.at("f1").get<double>(),
                                 c.at("support").get<std::uint64_t>()});
        const auto& m = j.at("macro");
        r.macro = {m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>()};
        if (!j.at("auc").is_null()) r.auc = AucMetrics{j["auc"].at("roc").get<double>(), j["auc"].at("pr").get<double>()};
        r.confusion = j.at("confusion").get<std::vector<std::vector<std::uint64_t>>>();
        r.zero_division = j.value("zero_division", std::vector<std::string>{});
        r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (!j.at("median_seed").is_null()) r.median_seed = j["median_seed"].get<std::uint64_t>();
        r.fingerprints = j.at("fingerprints").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw LoadError(std::string("invalid report: ") + e.what());
    }
    return r;
}

std::string render_report_table(const EvalReport& r) {
    std::ostringstream out;
    char buf[256];
    out << "Setting: " << r.setting << "   Split: " << r.split << '\n';
    std::size_t width = 13;
    for (const auto& c : r.classes) width = std::max(width, c.name.size());
    const int w = static_cast<int>(width);
    std::snprintf(buf, sizeof buf, "%-*s  %9s  %6s  %6s  %7s\n", w, "Class", "Precision", "Recall", "F1", "Support");
    out << buf;
    std::uint64_t total = 0;
    for (const auto& c : r.classes) {
        std::snprintf(buf, sizeof buf, "%-*s  %9.2f  %6.2f  %6.2f  %7llu\n", w, c.name.c_str(), c.precision, c.recall,
                      c.f1, static_cast<unsigned long long>(c.support));
        out << buf;
        total += c.support;
    }
    std::snprintf(buf, sizeof buf, "%-*s  %9.2f  %6.2f  %6.2f  %7llu\n", w, "Macro average", r.macro.precision,
                  r.macro.recall, r.macro.f1, static_cast<unsigned long long>(total));
    out << buf;
    if (r.auc) {
        std::snprintf(buf, sizeof buf, "ROC AUC %.4f   PR AUC %.4f\n", r.auc->roc, r.auc->pr);
        out << buf;
    }
    out << "Confusion (rows = truth, columns = prediction):\n";
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%-*s", w, i < r.classes.size() ? r.classes[i].name.c_str() : "?");
        out << buf;
        for (const auto v : r.confusion[i]) {
            std::snprintf(buf, sizeof buf, "  %6llu", static_cast<unsigned long long>(v));
            out << buf;
        }
        out << '\n';
    }
    if (!r.zero_division.empty()) {
        out << "Zero-division (reported as 0):";
        for (const auto& n : r.zero_division) out << ' ' << n;
        out << '\n';
    }
    return out.str();
}

}  // namespace aisoc
