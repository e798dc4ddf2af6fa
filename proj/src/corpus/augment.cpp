#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aisoc/corpus.hpp"
#include "aisoc/rng.hpp"
#include "embedded_tables.hpp"

namespace aisoc {

// ---------------------------------------------------------------------------
// UTF-8

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(U'\uFFFD');
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const char32_t cp : s) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// ---------------------------------------------------------------------------
// Tables

namespace {

using Table = std::vector<std::pair<std::string, std::vector<std::string>>>;

Table parse_table(const nlohmann::json& obj, const char* what) {
    if (!obj.is_object()) throw ConfigError(std::string("augmentation table '") + what + "' must be an object");
    Table t;
    for (const auto& [key, value] : obj.items()) {
        if (!value.is_array() || value.empty())
            throw ConfigError("augmentation entry '" + key + "' needs a non-empty list");
        std::vector<std::string> alts;
        for (const auto& v : value) alts.push_back(v.get<std::string>());
        std::string lowered = key;
        for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        t.emplace_back(std::move(lowered), std::move(alts));
    }
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return t;
}

const std::vector<std::string>* lookup(const Table& t, const std::string& word) {
    const auto it = std::lower_bound(t.begin(), t.end(), word,
                                     [](const auto& e, const std::string& w) { return e.first < w; });
    return it != t.end() && it->first == word ? &it->second : nullptr;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0; }

bool is_space(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r'; }

// Rewrites every ASCII alphanumeric run for which `replace` returns a value.
template <typename Fn>
std::string rewrite_words(std::string_view message, Fn&& replace) {
    std::string out;
    out.reserve(message.size() + 16);
    std::size_t i = 0;
    while (i < message.size()) {
        if (!is_word_byte(static_cast<unsigned char>(message[i]))) {
            out.push_back(message[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < message.size() && is_word_byte(static_cast<unsigned char>(message[j]))) ++j;
        const std::string_view word = message.substr(i, j - i);
        std::string lowered(word);
        for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (auto r = replace(lowered, i)) {
            out += *r;
        } else {
            out += word;
        }
        i = j;
    }
    return out;
}

}  // namespace

AugmentTables AugmentTables::from_json(std::string_view obfuscation_json, std::string_view synonym_json) {
    AugmentTables t;
    try {
        const auto obf = nlohmann::json::parse(obfuscation_json);
        const auto syn = nlohmann::json::parse(synonym_json);
        t.obfuscation_version = obf.at("version").get<std::string>();
        t.synonym_version = syn.at("version").get<std::string>();
        t.obfuscations = parse_table(obf.at("keywords"), "keywords");
        t.synonyms = parse_table(syn.at("words"), "words");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid augmentation table: ") + e.what());
    }
    return t;
}

AugmentTables AugmentTables::from_files(const std::filesystem::path& obfuscation_file,
                                        const std::filesystem::path& synonym_file) {
    return from_json(read_file(obfuscation_file), read_file(synonym_file));
}

const AugmentTables& AugmentTables::builtin() {
    static const AugmentTables tables =
        from_json(embedded::kObfuscationTable, embedded::kSynonymTable);
    return tables;
}

// ---------------------------------------------------------------------------
// Operators

std::string obfuscate_keywords(std::string_view message, const AugmentTables& tables, Rng& rng) {
    return rewrite_words(message, [&](const std::string& word, std::size_t) -> std::optional<std::string> {
        const auto* alts = lookup(tables.obfuscations, word);
        if (!alts) return std::nullopt;
        return (*alts)[rng.below(alts->size())];
    });
}

std::string replace_synonyms(std::string_view message, const AugmentTables& tables, double rate, Rng& rng) {
    std::vector<std::size_t> eligible;
    rewrite_words(message, [&](const std::string& word, std::size_t pos) -> std::optional<std::string> {
        if (lookup(tables.synonyms, word)) eligible.push_back(pos);
        return std::nullopt;
    });
    if (eligible.empty()) return std::string(message);
    // At least one replacement per selected message.
    const std::size_t forced = eligible[rng.below(eligible.size())];
    return rewrite_words(message, [&](const std::string& word, std::size_t pos) -> std::optional<std::string> {
        const auto* alts = lookup(tables.synonyms, word);
        if (!alts) return std::nullopt;
        if (pos != forced && !rng.bernoulli(rate)) return std::nullopt;
        return (*alts)[rng.below(alts->size())];
    });
}

std::string char_noise(std::string_view message, double edit_rate, Rng& rng) {
    static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789._-";
    auto cps = decode_utf8(message);
    if (cps.empty() || edit_rate <= 0.0) return std::string(message);
    const auto budget = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(edit_rate * static_cast<double>(cps.size()) + 1e-9)));
    const auto edits = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(budget)));
    // Each edit changes the edit distance by at most one.
    for (std::size_t e = 0; e < edits; ++e) {
        const auto op = rng.below(3);
        const auto ch = static_cast<char32_t>(kAlphabet[rng.below(kAlphabet.size())]);
        if (op == 0) {
            cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(rng.below(cps.size() + 1)), ch);
            continue;
        }
        const auto pos = rng.below(cps.size());
        // Never delete the last visible character.
        const auto visible = std::count_if(cps.begin(), cps.end(), [](char32_t c) { return !is_space(c); });
        if (op == 1 && (is_space(cps[pos]) || visible > 1)) {
            cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(pos));
        } else {
            cps[pos] = ch;
        }
    }
    return encode_utf8(cps);
}

std::vector<LogRecord> augment(const std::vector<LogRecord>& records, const AugmentConfig& config) {
    if (config.ops.empty()) throw ConfigError("augment needs at least one operation");
    if (!(config.rate >= 0.0 && config.rate <= 1.0)) throw ConfigError("augment rate must be in [0,1]");
    if (!(config.char_noise_rate >= 0.0 && config.char_noise_rate <= kMaxCharNoiseRate))
        throw ConfigError("char noise rate must be in [0, 0.15]");
    if (!(config.synonym_rate >= 0.0 && config.synonym_rate <= 1.0))
        throw ConfigError("synonym rate must be in [0,1]");
    const AugmentTables& tables = config.tables ? *config.tables : AugmentTables::builtin();

    std::vector<LogRecord> out;
    out.reserve(records.size() * (config.replace ? 1 : 2));
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& src = records[i];
        Rng rng(derive_seed(config.seed, i));
        const bool selected = rng.bernoulli(config.rate);
        if (!selected) {
            out.push_back(src);
            continue;
        }
        if (!config.replace) out.push_back(src);
        LogRecord v = src;
        if (config.ops.contains(AugmentOp::SynonymReplacement))
            v.message = replace_synonyms(v.message, tables, config.synonym_rate, rng);
        if (config.ops.contains(AugmentOp::KeywordObfuscation))
            v.message = obfuscate_keywords(v.message, tables, rng);
        if (config.ops.contains(AugmentOp::CharNoise))
            v.message = char_noise(v.message, config.char_noise_rate, rng);
        v.origin = Origin::Augmented;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace aisoc
