#include <algorithm>
#include <cctype>

#include "aisoc/corpus.hpp"

namespace aisoc {

std::vector<std::string> dedup_tokens(std::string_view message) {
    std::vector<std::string> tokens;
    std::string cur;
    for (const char ch : message) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

// Inputs are sorted unique token sets.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

std::vector<LogRecord> dedup_near_identical(std::vector<LogRecord> records, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("dedup threshold must be in [0,1]");
    std::stable_sort(records.begin(), records.end(),
                     [](const LogRecord& a, const LogRecord& b) { return a.timestamp < b.timestamp; });

    struct Kept {
        std::vector<std::string> tokens;
        int stratum;
    };
    std::vector<Kept> kept;
    std::vector<LogRecord> out;
    for (auto& r : records) {
        auto tokens = dedup_tokens(r.message);
        const int stratum = stratum_of(r.label);
        // Jaccard >= t needs |A|/|B| >= t; skip candidates failing the size bound.
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Kept& k) {
            if (k.stratum != stratum) return false;
            const auto lo = std::min(k.tokens.size(), tokens.size());
            const auto hi = std::max(k.tokens.size(), tokens.size());
            if (hi > 0 && static_cast<double>(lo) < threshold * static_cast<double>(hi) - 1e-9) return false;
            return jaccard(k.tokens, tokens) >= threshold;
        });
        if (duplicate) continue;
        kept.push_back({std::move(tokens), stratum});
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace aisoc
